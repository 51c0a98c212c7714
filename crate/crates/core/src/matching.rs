//! Perfect and near-perfect matchings.
//!
//! Matching existence only depends on the underlying simple graph, so the
//! search runs on collapsed adjacency and each matched pair is mapped back to
//! its lowest-id parallel edge. The engine is Edmonds' blossom algorithm with
//! a greedy start in vertex order; an exhaustive matcher is kept alongside as
//! an independent cross-check.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, Multigraph, VertexSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("perfect matching needs an even order, got {0}")]
    OddOrder(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("no vertex other than {s} has degree {d}")]
    NoDegreeVertex { s: usize, d: usize },
    #[error("removing {s} and {v} leaves no perfect matching")]
    NoNearPerfect { s: usize, v: usize },
    #[error("Tutte set construction failed for a graph without a perfect matching")]
    CertificateFailed,
}

/// Pairwise vertex-disjoint edges of a host graph.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Matching {
    pub edge_ids: Vec<EdgeId>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_ids.is_empty()
    }

    /// Vertices covered in `g`; `None` if an edge is missing or two edges meet.
    pub fn covered(&self, g: &Multigraph) -> Option<BTreeSet<usize>> {
        let mut seen = BTreeSet::new();
        for id in &self.edge_ids {
            let e = g.edge(*id)?;
            if !seen.insert(e.u) || !seen.insert(e.v) {
                return None;
            }
        }
        Some(seen)
    }

    pub fn is_perfect_in(&self, g: &Multigraph) -> bool {
        self.covered(g).is_some_and(|c| c.len() == g.vertex_count())
    }
}

/// A set `K` such that `G - K` has more odd components than `|K|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TutteCertificate {
    pub blocker: VertexSet,
}

impl TutteCertificate {
    /// Recounts the odd components of `G - K` and checks the violation.
    pub fn verify(&self, g: &Multigraph) -> bool {
        odd_components_without(g, &self.blocker) > self.blocker.len()
    }
}

/// Number of odd-order components of `G - K`.
pub fn odd_components_without(g: &Multigraph, removed: &VertexSet) -> usize {
    let keep = removed.complement(g.vertex_count());
    if keep.is_empty() {
        return 0;
    }
    let sub = g.induced(&keep).expect("complement is in range").graph;
    sub.components().iter().filter(|c| c.len() % 2 == 1).count()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PerfectMatchingOutcome {
    Found(Matching),
    Blocked(TutteCertificate),
}

impl PerfectMatchingOutcome {
    pub fn matching(self) -> Option<Matching> {
        match self {
            PerfectMatchingOutcome::Found(m) => Some(m),
            PerfectMatchingOutcome::Blocked(_) => None,
        }
    }
}

fn simple_adjacency(g: &Multigraph) -> Vec<Vec<usize>> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.vertex_count()];
    for e in g.edges() {
        adj[e.u].insert(e.v);
        adj[e.v].insert(e.u);
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Edmonds' blossom algorithm on a simple adjacency list.
struct Blossom<'a> {
    adj: &'a [Vec<usize>],
    mate: Vec<Option<usize>>,
    parent: Vec<Option<usize>>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
}

impl<'a> Blossom<'a> {
    fn new(adj: &'a [Vec<usize>]) -> Self {
        let n = adj.len();
        Blossom {
            adj,
            mate: vec![None; n],
            parent: vec![None; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
        }
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            match self.mate[a] {
                None => break,
                Some(m) => a = self.parent[m].expect("matched vertex on a tree path has a parent"),
            }
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            let m = self.mate[b].expect("path to common base follows matched edges");
            b = self.parent[m].expect("matched vertex on a tree path has a parent");
        }
    }

    fn mark_path(&mut self, mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            let m = self.mate[v].expect("odd tree vertex is matched");
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[m]] = true;
            self.parent[v] = Some(child);
            child = m;
            v = self.parent[m].expect("matched vertex on a tree path has a parent");
        }
    }

    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.adj.len();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = None);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for idx in 0..self.adj[v].len() {
                let to = self.adj[v][idx];
                if self.base[v] == self.base[to] || self.mate[v] == Some(to) {
                    continue;
                }
                let to_is_even = to == root || self.mate[to].is_some_and(|m| self.parent[m].is_some());
                if to_is_even {
                    let cur = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to].is_none() {
                    self.parent[to] = Some(v);
                    match self.mate[to] {
                        None => return Some(to),
                        Some(m) => {
                            self.used[m] = true;
                            queue.push_back(m);
                        }
                    }
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        loop {
            let pv = self.parent[v].expect("augmenting path vertex has a parent");
            let next = self.mate[pv];
            self.mate[v] = Some(pv);
            self.mate[pv] = Some(v);
            match next {
                None => break,
                Some(x) => v = x,
            }
        }
    }

    fn run(mut self) -> Vec<Option<usize>> {
        let n = self.adj.len();
        for v in 0..n {
            if self.mate[v].is_none() {
                if let Some(&u) = self.adj[v].iter().find(|&&u| self.mate[u].is_none()) {
                    self.mate[v] = Some(u);
                    self.mate[u] = Some(v);
                }
            }
        }
        for v in 0..n {
            if self.mate[v].is_none() {
                if let Some(end) = self.find_path(v) {
                    self.augment(end);
                }
            }
        }
        self.mate
    }
}

fn pairs_to_matching(g: &Multigraph, mate: &[Option<usize>]) -> Matching {
    let mut ids = Vec::new();
    for (v, m) in mate.iter().enumerate() {
        if let Some(u) = *m {
            if v < u {
                let id = g
                    .edges()
                    .iter()
                    .find(|e| e.u == v && e.v == u)
                    .map(|e| e.id)
                    .expect("matched pair is an edge");
                ids.push(id);
            }
        }
    }
    ids.sort();
    Matching { edge_ids: ids }
}

/// A maximum-cardinality matching of `g`.
pub fn maximum_matching(g: &Multigraph) -> Matching {
    let adj = simple_adjacency(g);
    let mate = Blossom::new(&adj).run();
    pairs_to_matching(g, &mate)
}

/// A perfect matching, or a Tutte set proving none exists.
pub fn perfect_matching(g: &Multigraph) -> Result<PerfectMatchingOutcome, MatchingError> {
    let n = g.vertex_count();
    if n % 2 == 1 {
        return Err(MatchingError::OddOrder(n));
    }
    let m = maximum_matching(g);
    if 2 * m.len() == n {
        return Ok(PerfectMatchingOutcome::Found(m));
    }
    tutte_set(g, m.len()).map(PerfectMatchingOutcome::Blocked)
}

/// Gallai–Edmonds: `D` are vertices missed by some maximum matching, `A` their
/// outside neighbours; `A` is a Tutte set whenever the matching is deficient.
fn tutte_set(g: &Multigraph, nu: usize) -> Result<TutteCertificate, MatchingError> {
    let n = g.vertex_count();
    let mut in_d = vec![false; n];
    for (v, slot) in in_d.iter_mut().enumerate() {
        let without = g.remove_vertex(v).expect("vertex in range");
        *slot = maximum_matching(&without).len() == nu;
    }
    let mut a = BTreeSet::new();
    for e in g.edges() {
        if in_d[e.u] && !in_d[e.v] {
            a.insert(e.v);
        }
        if in_d[e.v] && !in_d[e.u] {
            a.insert(e.u);
        }
    }
    let cert = TutteCertificate {
        blocker: VertexSet::new(a),
    };
    if cert.verify(g) {
        Ok(cert)
    } else {
        Err(MatchingError::CertificateFailed)
    }
}

/// The vertex left unmatched next to `s` by a near-perfect matching.
///
/// `v` has degree `d`; a degree-`d` vertex adjacent to a degree-`d+1` vertex
/// is preferred, and ties go to the smallest index.
pub fn select_v(g: &Multigraph, s: usize, d: usize) -> Result<usize, MatchingError> {
    let n = g.vertex_count();
    if s >= n {
        return Err(MatchingError::VertexOutOfRange { vertex: s, n });
    }
    let deg = g.degrees();
    let adj = simple_adjacency(g);
    let candidates: Vec<usize> = (0..n).filter(|&v| v != s && deg[v] == d).collect();
    candidates
        .iter()
        .copied()
        .find(|&v| adj[v].iter().any(|&u| deg[u] == d + 1))
        .or_else(|| candidates.first().copied())
        .ok_or(MatchingError::NoDegreeVertex { s, d })
}

/// A perfect matching of `g - exclude - v` for `v = select_v(g, exclude, d)`.
pub fn near_perfect_matching(g: &Multigraph, exclude: usize, d: usize) -> Result<(Matching, usize), MatchingError> {
    let n = g.vertex_count();
    if n % 2 == 1 {
        return Err(MatchingError::OddOrder(n));
    }
    let v = select_v(g, exclude, d)?;
    let keep = VertexSet::new((0..n).filter(|&x| x != exclude && x != v));
    let sub = g.induced(&keep).expect("in range").graph;
    let m = maximum_matching(&sub);
    if 2 * m.len() != sub.vertex_count() {
        return Err(MatchingError::NoNearPerfect { s: exclude, v });
    }
    // ids are shared with the host
    Ok((m, v))
}

/// Exhaustive perfect-matching search; exponential, for cross-checks only.
pub fn exhaustive_perfect_matching(g: &Multigraph) -> Option<Matching> {
    let n = g.vertex_count();
    if n % 2 == 1 {
        return None;
    }
    if n == 0 {
        return Some(Matching::default());
    }
    assert!(n <= 30, "exhaustive matcher is limited to 30 vertices");
    let adj = simple_adjacency(g);
    let full = (1u64 << n) - 1;
    let mut dead = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    fn go(
        covered: u64,
        full: u64,
        adj: &[Vec<usize>],
        dead: &mut std::collections::HashSet<u64>,
        pairs: &mut Vec<(usize, usize)>,
    ) -> bool {
        if covered == full {
            return true;
        }
        if dead.contains(&covered) {
            return false;
        }
        let v = (!covered & full).trailing_zeros() as usize;
        for &u in &adj[v] {
            if covered >> u & 1 == 0 {
                pairs.push((v, u));
                if go(covered | 1 << v | 1 << u, full, adj, dead, pairs) {
                    return true;
                }
                pairs.pop();
            }
        }
        dead.insert(covered);
        false
    }
    if !go(0, full, &adj, &mut dead, &mut pairs) {
        return None;
    }
    let mut mate = vec![None; n];
    for (a, b) in pairs {
        mate[a] = Some(b);
        mate[b] = Some(a);
    }
    Some(pairs_to_matching(g, &mate))
}

/// Maximum matching size by exhaustive search over subsets of the edges.
pub fn exhaustive_matching_number(g: &Multigraph) -> usize {
    let adj = simple_adjacency(g);
    let n = g.vertex_count();
    fn go(v: usize, covered: u64, n: usize, adj: &[Vec<usize>]) -> usize {
        if v >= n {
            return 0;
        }
        if covered >> v & 1 == 1 {
            return go(v + 1, covered, n, adj);
        }
        let mut best = go(v + 1, covered | 1 << v, n, adj);
        for &u in &adj[v] {
            if u > v && covered >> u & 1 == 0 {
                best = best.max(1 + go(v + 1, covered | 1 << v | 1 << u, n, adj));
            }
        }
        best
    }
    go(0, 0, n, &adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use proptest::prelude::*;

    #[test]
    fn k4_has_a_perfect_matching() {
        let m = perfect_matching(&complete(4)).unwrap().matching().unwrap();
        assert_eq!(m.len(), 2);
        assert!(m.is_perfect_in(&complete(4)));
    }

    #[test]
    fn star_plus_isolated_vertex_is_blocked_by_center() {
        let g = Multigraph::from_pairs(6, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        match perfect_matching(&g).unwrap() {
            PerfectMatchingOutcome::Blocked(c) => {
                assert!(c.verify(&g));
                assert_eq!(c.blocker, VertexSet::new([0]));
            }
            PerfectMatchingOutcome::Found(_) => panic!("star has no perfect matching"),
        }
    }

    #[test]
    fn petersen_perfect_matching() {
        let p = petersen();
        let m = perfect_matching(&p).unwrap().matching().unwrap();
        assert!(m.is_perfect_in(&p));
        assert_eq!(m.len(), 5);
    }

    #[test]
    fn fig2_greedy_start_picks_the_cross_factor() {
        let m = perfect_matching(&fig2()).unwrap().matching().unwrap();
        assert_eq!(m.edge_ids, vec![EdgeId(12), EdgeId(14), EdgeId(16)]);
    }

    #[test]
    fn odd_order_rejected() {
        assert_eq!(perfect_matching(&cycle(5)), Err(MatchingError::OddOrder(5)));
    }

    #[test]
    fn near_perfect_on_c5_plus_isolated() {
        // C5 on 1..=5 plus isolated 0
        let pairs: Vec<_> = (0..5).map(|i| (1 + i, 1 + (i + 1) % 5)).collect();
        let g = Multigraph::from_pairs(6, &pairs).unwrap();
        let (m, v) = near_perfect_matching(&g, 0, 2).unwrap();
        assert_eq!(v, 1);
        assert_eq!(m.len(), 2);
        let covered = m.covered(&g).unwrap();
        assert!(!covered.contains(&0) && !covered.contains(&v));
    }

    #[test]
    fn near_perfect_on_c6_with_a_bare_vertex() {
        // C6 on 0..6 with vertex 0's edges deleted leaves the path 1-2-3-4-5
        let g = Multigraph::from_pairs(6, &[(1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let (m, v) = near_perfect_matching(&g, 0, 1).unwrap();
        assert!(v == 1 || v == 5);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn near_perfect_failure() {
        // path 0-1-2-3, isolated s = 4 and t = 5
        let g = Multigraph::from_pairs(6, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(matches!(
            near_perfect_matching(&g, 4, 1),
            Err(MatchingError::NoNearPerfect { s: 4, .. })
        ));
        // brute force: no choice of a degree-1 vertex works either
        for v in [0, 3] {
            let keep = VertexSet::new((0..6).filter(|&x| x != 4 && x != v));
            assert!(exhaustive_perfect_matching(&g.induced(&keep).unwrap().graph).is_none());
        }
    }

    #[test]
    fn select_v_prefers_neighbours_of_type_one_vertices() {
        let g = Multigraph::from_pairs(6, &[(1, 5), (1, 5), (2, 3), (2, 4), (3, 4), (3, 4)]).unwrap();
        assert_eq!(g.degrees(), vec![0, 2, 2, 3, 3, 2]);
        assert_eq!(select_v(&g, 0, 2).unwrap(), 2);
        let pairs: Vec<_> = (0..5).map(|i| (1 + i, 1 + (i + 1) % 5)).collect();
        let c5 = Multigraph::from_pairs(6, &pairs).unwrap();
        assert_eq!(select_v(&c5, 0, 2).unwrap(), 1);
        assert_eq!(select_v(&c5, 0, 3), Err(MatchingError::NoDegreeVertex { s: 0, d: 3 }));
    }

    fn arb_simple(nmax: usize) -> impl Strategy<Value = Multigraph> {
        (2usize..nmax).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |pairs| {
                let pairs: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
                Multigraph::from_pairs(n, &pairs).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn blossom_agrees_with_exhaustive(g in arb_simple(13)) {
            let m = maximum_matching(&g);
            prop_assert!(m.covered(&g).is_some());
            prop_assert_eq!(m.len(), exhaustive_matching_number(&g));
        }

        #[test]
        fn outcome_is_sound(g in arb_simple(13)) {
            if g.vertex_count() % 2 == 0 {
                match perfect_matching(&g).unwrap() {
                    PerfectMatchingOutcome::Found(m) => prop_assert!(m.is_perfect_in(&g)),
                    PerfectMatchingOutcome::Blocked(c) => {
                        prop_assert!(c.verify(&g));
                        prop_assert!(exhaustive_perfect_matching(&g).is_none());
                    }
                }
            }
        }
    }
}
