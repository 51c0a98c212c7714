//! Extension of a multigraph to an `r`-graph.
//!
//! An `r`-graph is `r`-regular, has even order and `Γ <= r`. Any graph with
//! `φ <= r` embeds in one on the same vertex set (plus one isolated vertex
//! when the order is odd). The construction here adds edges one at a time
//! between deficient vertices of smallest degree, never letting an odd set
//! exceed `r(|S|-1)/2` edges, and backtracks if it runs out of candidates.

use thiserror::Error;

use crate::graph::{EdgeId, Multigraph};
use crate::invariants::{self, InvariantError, SubsetTable};

/// Upper bound on edge insertions tried (including backtracked ones).
const SEARCH_BUDGET: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompletionError {
    #[error("r = {r} is below φ = {phi}; no {r}-graph contains this graph")]
    BelowPhi { r: u64, phi: u64 },
    #[error("r must be at least 1")]
    ZeroR,
    #[error("completion search exhausted its budget")]
    SearchFailed,
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

#[derive(Clone, Debug)]
pub struct Completion {
    pub graph: Multigraph,
    /// Ids of the inserted edges, in insertion order.
    pub added_edges: Vec<EdgeId>,
    /// Index of the appended isolated vertex when the input order was odd.
    pub added_vertex: Option<usize>,
}

/// `r`-regular, even order, and every odd set has coboundary at least `r`.
///
/// The coboundary test is equivalent to `Γ <= r` on `r`-regular graphs; both
/// are evaluated from one subset table and must agree.
pub fn is_rgraph(g: &Multigraph, r: u64) -> Result<bool, InvariantError> {
    let n = g.vertex_count();
    if n == 0 || n % 2 == 1 {
        return Ok(false);
    }
    if g.degrees().iter().any(|&d| d as u64 != r) {
        return Ok(false);
    }
    let table = SubsetTable::new(g)?;
    let by_coboundary = table.odd_subsets(table.full_mask()).all(|m| table.coboundary(m) >= r);
    debug_assert_eq!(by_coboundary, is_rgraph_by_gamma_table(&table, r));
    Ok(by_coboundary)
}

/// `r`-graph test through `Γ` directly.
pub fn is_rgraph_by_gamma(g: &Multigraph, r: u64) -> Result<bool, InvariantError> {
    let n = g.vertex_count();
    if n == 0 || n % 2 == 1 || g.degrees().iter().any(|&d| d as u64 != r) {
        return Ok(false);
    }
    Ok(is_rgraph_by_gamma_table(&SubsetTable::new(g)?, r))
}

fn is_rgraph_by_gamma_table(table: &SubsetTable, r: u64) -> bool {
    table
        .gamma()
        .is_none_or(|(t, _)| t <= num_rational::Ratio::from_integer(r as i64))
}

struct Search {
    n: usize,
    r: u64,
    inner: Vec<u32>,
    degree: Vec<u64>,
    added: Vec<(usize, usize)>,
}

impl Search {
    fn capacity_ok(&self, u: usize, v: usize) -> bool {
        let full = (1u64 << self.n) - 1;
        let pair = 1u64 << u | 1u64 << v;
        let rest = full & !pair;
        let mut sub = rest;
        loop {
            let s = sub | pair;
            let c = s.count_ones() as u64;
            if c % 2 == 1 && self.inner[s as usize] as u64 + 1 > self.r * (c - 1) / 2 {
                return false;
            }
            if sub == 0 {
                return true;
            }
            sub = (sub - 1) & rest;
        }
    }

    fn apply(&mut self, u: usize, v: usize, delta: i32) {
        let full = (1u64 << self.n) - 1;
        let pair = 1u64 << u | 1u64 << v;
        let rest = full & !pair;
        let mut sub = rest;
        loop {
            let s = (sub | pair) as usize;
            self.inner[s] = (self.inner[s] as i64 + delta as i64) as u32;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        let step = if delta > 0 { 1 } else { u64::MAX };
        self.degree[u] = self.degree[u].wrapping_add(step);
        self.degree[v] = self.degree[v].wrapping_add(step);
    }

    /// Deficient pairs ordered by (smaller degree, larger degree, indices).
    fn candidates(&self) -> Vec<(usize, usize)> {
        let mut deficient: Vec<usize> = (0..self.n).filter(|&v| self.degree[v] < self.r).collect();
        deficient.sort_by_key(|&v| (self.degree[v], v));
        let mut out = Vec::new();
        for (i, &u) in deficient.iter().enumerate() {
            for &v in &deficient[i + 1..] {
                out.push((u, v));
            }
        }
        out
    }

    fn run(&mut self) -> bool {
        let mut stack: Vec<(Vec<(usize, usize)>, usize)> = vec![(self.candidates(), 0)];
        let mut budget = SEARCH_BUDGET;
        while let Some((cands, next)) = stack.last_mut() {
            if cands.is_empty() {
                // no deficient vertex left
                return true;
            }
            let mut chosen = None;
            while *next < cands.len() {
                let (u, v) = cands[*next];
                *next += 1;
                if budget == 0 {
                    return false;
                }
                budget -= 1;
                if self.capacity_ok(u, v) {
                    chosen = Some((u, v));
                    break;
                }
            }
            match chosen {
                Some((u, v)) => {
                    self.apply(u, v, 1);
                    self.added.push((u, v));
                    let c = self.candidates();
                    stack.push((c, 0));
                }
                None => {
                    stack.pop();
                    match self.added.pop() {
                        Some((u, v)) => self.apply(u, v, -1),
                        None => return false,
                    }
                }
            }
        }
        false
    }
}

/// Embeds `g` in an `r`-graph; original edge ids are preserved.
pub fn rgraph_complete(g: &Multigraph, r: u64) -> Result<Completion, CompletionError> {
    if r == 0 {
        return Err(CompletionError::ZeroR);
    }
    let phi = invariants::phi(g)?;
    if r < phi {
        return Err(CompletionError::BelowPhi { r, phi });
    }
    let (base, added_vertex) = if g.vertex_count() % 2 == 1 {
        (g.add_vertices(1), Some(g.vertex_count()))
    } else {
        (g.clone(), None)
    };
    let n = base.vertex_count();
    let table = SubsetTable::new(&base)?;
    let inner = (0..1u64 << n).map(|m| table.edges(m) as u32).collect();
    let mut search = Search {
        n,
        r,
        inner,
        degree: base.degrees().into_iter().map(|d| d as u64).collect(),
        added: Vec::new(),
    };
    if !search.run() {
        return Err(CompletionError::SearchFailed);
    }
    let (graph, added_edges) = base.add_edges(&search.added).expect("pairs are in range and loopless");
    if !is_rgraph(&graph, r)? {
        return Err(CompletionError::SearchFailed);
    }
    Ok(Completion {
        graph,
        added_edges,
        added_vertex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use proptest::prelude::*;

    #[test]
    fn single_edge_is_already_a_one_graph() {
        let g = Multigraph::from_pairs(2, &[(0, 1)]).unwrap();
        let c = rgraph_complete(&g, 1).unwrap();
        assert!(c.added_edges.is_empty());
        assert_eq!(c.added_vertex, None);
        assert_eq!(c.graph, g);
    }

    #[test]
    fn path_closes_into_a_four_cycle() {
        let g = Multigraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        let c = rgraph_complete(&g, 2).unwrap();
        assert_eq!(c.added_vertex, Some(3));
        assert_eq!(c.graph.vertex_count(), 4);
        assert!(is_rgraph(&c.graph, 2).unwrap());
        assert_eq!(invariants::gamma(&c.graph).unwrap().unwrap().0, num_rational::Ratio::from_integer(2));
        assert!(c.graph.contains_edge(EdgeId(0)) && c.graph.contains_edge(EdgeId(1)));
    }

    #[test]
    fn petersen_unchanged() {
        let c = rgraph_complete(&petersen(), 3).unwrap();
        assert!(c.added_edges.is_empty());
        assert!(is_rgraph(&petersen(), 3).unwrap());
    }

    #[test]
    fn rgraph_recognition() {
        assert!(!is_rgraph(&fat_triangle(2), 4).unwrap());
        let mut pairs = Vec::new();
        for i in 0..4 {
            pairs.push((i, (i + 1) % 4));
            pairs.push((i, (i + 1) % 4));
        }
        assert!(is_rgraph(&Multigraph::from_pairs(4, &pairs).unwrap(), 4).unwrap());
        // two disjoint triangles: 2-regular but each triangle has empty coboundary
        let two = Multigraph::from_pairs(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(!is_rgraph(&two, 2).unwrap());
        assert!(!is_rgraph_by_gamma(&two, 2).unwrap());
    }

    #[test]
    fn below_phi_rejected() {
        assert_eq!(
            rgraph_complete(&fat_triangle(2), 5).unwrap_err(),
            CompletionError::BelowPhi { r: 5, phi: 6 }
        );
    }

    #[test]
    fn fat_triangle_completion() {
        let c = rgraph_complete(&fat_triangle(2), 6).unwrap();
        assert_eq!(c.graph.vertex_count(), 4);
        assert!(is_rgraph(&c.graph, 6).unwrap());
        assert_eq!(c.added_edges.len(), 6);
    }

    fn arb_graph() -> impl Strategy<Value = Multigraph> {
        (3usize..10).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 1..35).prop_map(move |pairs| {
                let pairs: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
                Multigraph::from_pairs(n, &pairs).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn completion_is_an_rgraph_containing_the_input(g in arb_graph(), extra in 0u64..3) {
            let r = invariants::phi(&g).unwrap().max(1) + extra;
            let c = rgraph_complete(&g, r).unwrap();
            prop_assert!(is_rgraph(&c.graph, r).unwrap());
            prop_assert!(is_rgraph_by_gamma(&c.graph, r).unwrap());
            for e in g.edges() {
                prop_assert_eq!(c.graph.edge(e.id), Some(e));
            }
            prop_assert_eq!(c.graph.edge_count(), g.edge_count() + c.added_edges.len());
        }
    }
}
