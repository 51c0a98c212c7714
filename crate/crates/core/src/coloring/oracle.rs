//! Exact chromatic index by branch and bound over edges.
//!
//! Colors are tried from `φ` upward. Within one bound `k` the search colors
//! one edge at a time, always picking the edge with the fewest admissible
//! colors. Only the next unused color may be opened, and parallel edges take
//! strictly increasing colors in id order (each parallel class is colored
//! lowest id first), which removes both relabeling and parallel-edge symmetry.

use crate::graph::Multigraph;
use crate::invariants;

use super::{ColoringError, EdgeColoring};

pub const DEFAULT_ORACLE_EDGES: usize = 40;
pub const DEFAULT_ORACLE_BUDGET: u64 = 50_000_000;

struct Search {
    ends: Vec<(usize, usize)>,
    /// Parallel class of each edge and each class's member edges in id order.
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    degree_weight: Vec<usize>,
    color: Vec<Option<u32>>,
    used: Vec<u64>,
    remaining: Vec<u32>,
    k: u32,
    nodes: u64,
    budget: u64,
}

impl Search {
    fn new(g: &Multigraph) -> Self {
        let deg = g.degrees();
        let ends: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut class_of = vec![0; ends.len()];
        let mut index = std::collections::BTreeMap::new();
        for (i, &pair) in ends.iter().enumerate() {
            let c = *index.entry(pair).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[c].push(i);
            class_of[i] = c;
        }
        let mut remaining = vec![0u32; g.vertex_count()];
        for &(u, v) in &ends {
            remaining[u] += 1;
            remaining[v] += 1;
        }
        Search {
            degree_weight: ends.iter().map(|&(u, v)| deg[u] + deg[v]).collect(),
            color: vec![None; ends.len()],
            used: vec![0; g.vertex_count()],
            ends,
            class_of,
            classes,
            remaining,
            k: 0,
            nodes: 0,
            budget: 0,
        }
    }

    fn reset(&mut self, k: u32) {
        self.k = k;
        self.color.iter_mut().for_each(|c| *c = None);
        self.used.iter_mut().for_each(|u| *u = 0);
        self.remaining.iter_mut().for_each(|r| *r = 0);
        for &(u, v) in &self.ends {
            self.remaining[u] += 1;
            self.remaining[v] += 1;
        }
    }

    /// Admissible colors for the next uncolored member of class `c`.
    fn options(&self, c: usize, opened: u32) -> Option<(usize, u64)> {
        let members = &self.classes[c];
        let pos = members.iter().position(|&e| self.color[e].is_none())?;
        let e = members[pos];
        let floor = if pos == 0 { 0 } else { self.color[members[pos - 1]].unwrap() + 1 };
        let (u, v) = self.ends[e];
        let top = (opened + 1).min(self.k);
        let range = mask_below(top) & !mask_below(floor);
        Some((e, range & !(self.used[u] | self.used[v])))
    }

    fn run(&mut self, opened: u32, left: usize) -> Result<bool, ColoringError> {
        if left == 0 {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(ColoringError::OracleBudget(self.budget));
        }
        let mut best: Option<(usize, u64)> = None;
        for c in 0..self.classes.len() {
            let Some((e, opts)) = self.options(c, opened) else {
                continue;
            };
            let better = match best {
                None => true,
                Some((b, bo)) => {
                    let (x, y) = (opts.count_ones(), bo.count_ones());
                    x < y || (x == y && self.degree_weight[e] > self.degree_weight[b])
                }
            };
            if better {
                best = Some((e, opts));
                if opts == 0 {
                    return Ok(false);
                }
            }
        }
        let (e, mut opts) = best.expect("an uncolored edge remains");
        let (u, v) = self.ends[e];
        while opts != 0 {
            let col = opts.trailing_zeros();
            opts &= opts - 1;
            let bit = 1u64 << col;
            self.color[e] = Some(col);
            self.used[u] |= bit;
            self.used[v] |= bit;
            self.remaining[u] -= 1;
            self.remaining[v] -= 1;
            let fits = |x: usize, s: &Search| s.remaining[x] <= s.k - s.used[x].count_ones();
            if fits(u, self) && fits(v, self) && self.run(opened.max(col + 1), left - 1)? {
                return Ok(true);
            }
            self.color[e] = None;
            self.used[u] &= !bit;
            self.used[v] &= !bit;
            self.remaining[u] += 1;
            self.remaining[v] += 1;
        }
        Ok(false)
    }
}

fn mask_below(k: u32) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// `χ'(g)` with a witness coloring, for at most `DEFAULT_ORACLE_EDGES` edges.
pub fn exact_chromatic_index(g: &Multigraph) -> Result<(u32, EdgeColoring), ColoringError> {
    exact_chromatic_index_with(g, DEFAULT_ORACLE_EDGES, DEFAULT_ORACLE_BUDGET)
}

pub fn exact_chromatic_index_with(
    g: &Multigraph,
    max_edges: usize,
    budget: u64,
) -> Result<(u32, EdgeColoring), ColoringError> {
    let e = g.edge_count();
    if e > max_edges || e > 63 {
        return Err(ColoringError::OracleTooLarge {
            edges: e,
            limit: max_edges.min(63),
        });
    }
    if e == 0 {
        return Ok((0, EdgeColoring::default()));
    }
    let lower = if g.vertex_count() <= invariants::enumeration_limit() {
        invariants::phi(g)? as u32
    } else {
        g.max_degree() as u32
    };
    let mut search = Search::new(g);
    search.budget = budget;
    let mut k = lower.max(1);
    loop {
        search.reset(k);
        if search.run(0, e)? {
            let mut c = EdgeColoring::default();
            for (i, edge) in g.edges().iter().enumerate() {
                c.set(edge.id, search.color[i].expect("complete assignment"));
            }
            debug_assert!(search.class_of.len() == e);
            return Ok((k, c));
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        for k in 1..=4 {
            let (x, c) = exact_chromatic_index(&fat_triangle(k)).unwrap();
            assert_eq!(x as usize, 3 * k);
            c.check_proper(&fat_triangle(k)).unwrap();
        }
        assert_eq!(exact_chromatic_index(&petersen()).unwrap().0, 4);
        assert_eq!(exact_chromatic_index(&cycle(6)).unwrap().0, 2);
        assert_eq!(exact_chromatic_index(&cycle(7)).unwrap().0, 3);
        assert_eq!(exact_chromatic_index(&complete(4)).unwrap().0, 3);
        assert_eq!(exact_chromatic_index(&complete(5)).unwrap().0, 5);
        assert_eq!(exact_chromatic_index(&fig2()).unwrap().0, 6);
    }

    #[test]
    fn guard() {
        let big = Multigraph::from_pairs(2, &vec![(0, 1); 41]).unwrap();
        assert!(matches!(
            exact_chromatic_index(&big),
            Err(ColoringError::OracleTooLarge { edges: 41, .. })
        ));
    }

    /// Plain backtracking with no symmetry breaking or ordering.
    fn naive_index(g: &Multigraph) -> u32 {
        let ends: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        fn go(i: usize, k: u32, ends: &[(usize, usize)], col: &mut Vec<u32>) -> bool {
            if i == ends.len() {
                return true;
            }
            for c in 0..k {
                let clash = (0..i).any(|j| {
                    col[j] == c
                        && (ends[j].0 == ends[i].0
                            || ends[j].0 == ends[i].1
                            || ends[j].1 == ends[i].0
                            || ends[j].1 == ends[i].1)
                });
                if !clash {
                    col[i] = c;
                    if go(i + 1, k, ends, col) {
                        return true;
                    }
                }
            }
            false
        }
        let mut k = g.max_degree() as u32;
        loop {
            let mut col = vec![0; ends.len()];
            if go(0, k, &ends, &mut col) {
                return k;
            }
            k += 1;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn agrees_with_naive_backtracking(
            n in 2usize..7,
            pairs in proptest::collection::vec((0usize..7, 0usize..7), 1..13),
        ) {
            let pairs: Vec<_> = pairs.into_iter().filter(|&(u, v)| u != v && u < n && v < n).collect();
            let g = Multigraph::from_pairs(n, &pairs).unwrap();
            let (x, c) = exact_chromatic_index(&g).unwrap();
            c.check_proper(&g).unwrap();
            prop_assert_eq!(c.colors_used() as u32, x);
            prop_assert_eq!(x, naive_index(&g));
        }
    }
}
