//! Exact lower-bound invariants by exhaustive odd-subset enumeration.
//!
//! `t(H) = 2e(H)/(n(H)-1)` for odd `H`, `Γ(G)` is its maximum over odd
//! induced subgraphs of order at least three, `χ_f = max(Δ, Γ)` and
//! `φ = ⌈χ_f⌉`. All quantities are kept as exact rationals or integers.
//!
//! Subsets are bit masks, so every search here is exponential in the order.
//! [`enumeration_limit`] caps the order (22 by default, `GF_MAX_N` overrides).

use std::cmp::Ordering;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Multigraph, VertexSet};

pub const DEFAULT_MAX_N: usize = 22;

/// Hard ceiling regardless of `GF_MAX_N`: masks are `u64` and tables are dense.
const ABSOLUTE_MAX_N: usize = 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("graph order {n} exceeds the enumeration limit {limit} (set GF_MAX_N to raise it)")]
    TooLarge { n: usize, limit: usize },
    #[error("operation needs an odd vertex set of size at least 3, got {0}")]
    NotOddSubset(usize),
    #[error("operation needs an odd order of at least 3, got {0}")]
    NotOddOrder(usize),
    #[error("operation needs an even order, got {0}")]
    OddOrder(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
}

/// Current enumeration ceiling on the graph order.
pub fn enumeration_limit() -> usize {
    std::env::var("GF_MAX_N")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.min(ABSOLUTE_MAX_N))
        .unwrap_or(DEFAULT_MAX_N)
}

/// `ex(H, k) = e(H) - k(|H|-1)/2` for odd `|H|`.
pub fn excess_value(edges: u64, size: usize, k: u64) -> i64 {
    edges as i64 - (k as i64) * ((size as i64 - 1) / 2)
}

/// `sl(H, k) = (k+1)(|H|-1)/2 - e(H)` for odd `|H|`.
pub fn slack_value(edges: u64, size: usize, k: u64) -> i64 {
    (k as i64 + 1) * ((size as i64 - 1) / 2) - edges as i64
}

/// Lexicographic order on the sorted member lists of two sets.
pub fn lex_cmp(a: u64, b: u64) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let low = (a ^ b) & (a ^ b).wrapping_neg();
    if a & low != 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Deterministic witness order: smaller sets first, then lexicographic.
pub fn witness_cmp(a: u64, b: u64) -> Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| lex_cmp(a, b))
}

/// Edge counts of every induced subgraph of a graph, indexed by vertex mask.
#[derive(Clone, Debug)]
pub struct SubsetTable {
    n: usize,
    inner: Vec<u32>,
    degree: Vec<u32>,
}

impl SubsetTable {
    pub fn new(g: &Multigraph) -> Result<Self, InvariantError> {
        let n = g.vertex_count();
        let limit = enumeration_limit();
        if n > limit {
            return Err(InvariantError::TooLarge { n, limit });
        }
        let mult = g.multiplicity_matrix();
        let mut inner = vec![0u32; 1usize << n];
        for mask in 1usize..(1 << n) {
            let v = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let row = &mult[v * n..(v + 1) * n];
            let mut add = 0u32;
            let mut bits = rest;
            while bits != 0 {
                let u = bits.trailing_zeros() as usize;
                add += row[u];
                bits &= bits - 1;
            }
            inner[mask] = inner[rest] + add;
        }
        let degree = g.degrees().into_iter().map(|d| d as u32).collect();
        Ok(SubsetTable { n, inner, degree })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    /// `e(⟨S⟩)`.
    pub fn edges(&self, mask: u64) -> u64 {
        self.inner[mask as usize] as u64
    }

    pub fn degree(&self, v: usize) -> u64 {
        self.degree[v] as u64
    }

    pub fn max_degree(&self) -> u64 {
        self.degree.iter().copied().max().unwrap_or(0) as u64
    }

    /// `|∂(S)|`.
    pub fn coboundary(&self, mask: u64) -> u64 {
        let mut sum = 0u64;
        let mut bits = mask;
        while bits != 0 {
            sum += self.degree[bits.trailing_zeros() as usize] as u64;
            bits &= bits - 1;
        }
        sum - 2 * self.edges(mask)
    }

    pub fn excess(&self, mask: u64, k: u64) -> i64 {
        excess_value(self.edges(mask), mask.count_ones() as usize, k)
    }

    pub fn slack(&self, mask: u64, k: u64) -> i64 {
        slack_value(self.edges(mask), mask.count_ones() as usize, k)
    }

    pub fn t_value(&self, mask: u64) -> Ratio<i64> {
        Ratio::new(2 * self.edges(mask) as i64, mask.count_ones() as i64 - 1)
    }

    /// Odd submasks of `within` with at least three members.
    pub fn odd_subsets(&self, within: u64) -> impl Iterator<Item = u64> {
        let mut sub = within;
        let mut done = within == 0;
        std::iter::from_fn(move || loop {
            if done {
                return None;
            }
            let cur = sub;
            if sub == 0 {
                done = true;
            } else {
                sub = (sub - 1) & within;
            }
            let c = cur.count_ones();
            if c >= 3 && c % 2 == 1 {
                return Some(cur);
            }
        })
    }

    /// `Γ` with its witness; `None` when the order is below three.
    pub fn gamma(&self) -> Option<(Ratio<i64>, u64)> {
        let mut best: Option<(Ratio<i64>, u64)> = None;
        for mask in self.odd_subsets(self.full_mask()) {
            let t = self.t_value(mask);
            best = match best {
                None => Some((t, mask)),
                Some((bt, bm)) => match t.cmp(&bt) {
                    Ordering::Greater => Some((t, mask)),
                    Ordering::Equal if witness_cmp(mask, bm) == Ordering::Less => Some((t, mask)),
                    _ => Some((bt, bm)),
                },
            };
        }
        best
    }

    pub fn phi(&self) -> u64 {
        let delta = self.max_degree();
        match self.gamma() {
            Some((g, _)) => delta.max(g.ceil().to_integer() as u64),
            None => delta,
        }
    }

    /// Minimum slack over odd subsets passing `keep`, ties by [`witness_cmp`].
    pub fn min_slack_where(&self, within: u64, k: u64, keep: impl Fn(u64) -> bool) -> Option<(u64, i64)> {
        let mut best: Option<(u64, i64)> = None;
        for mask in self.odd_subsets(within) {
            if !keep(mask) {
                continue;
            }
            let sl = self.slack(mask, k);
            let better = match best {
                None => true,
                Some((bm, bs)) => sl < bs || (sl == bs && witness_cmp(mask, bm) == Ordering::Less),
            };
            if better {
                best = Some((mask, sl));
            }
        }
        best
    }

    /// First odd subset in witness order passing `keep`.
    pub fn first_where(&self, within: u64, keep: impl Fn(u64) -> bool) -> Option<u64> {
        let mut best: Option<u64> = None;
        for mask in self.odd_subsets(within) {
            if keep(mask) && best.is_none_or(|b| witness_cmp(mask, b) == Ordering::Less) {
                best = Some(mask);
            }
        }
        best
    }
}

/// Score of one odd induced subgraph at reference degree `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphScore {
    pub subset: VertexSet,
    pub excess: i64,
    pub slack: i64,
    pub k: u64,
}

impl SubgraphScore {
    fn from_mask(table: &SubsetTable, mask: u64, k: u64) -> Self {
        SubgraphScore {
            subset: VertexSet::from_mask(mask),
            excess: table.excess(mask, k),
            slack: table.slack(mask, k),
            k,
        }
    }
}

/// `Δ`, `Γ`, `χ_f` and `φ` of one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantReport {
    pub delta: u64,
    pub gamma: Option<Ratio<i64>>,
    pub chi_f: Ratio<i64>,
    pub phi: u64,
    pub witness: Option<VertexSet>,
}

impl InvariantReport {
    pub fn gamma_f64(&self) -> Option<f64> {
        self.gamma.and_then(|g| g.to_f64())
    }
}

fn odd_mask(g: &Multigraph, s: &VertexSet) -> Result<u64, InvariantError> {
    let n = g.vertex_count();
    if let Some(&v) = s.members().last() {
        if v >= n {
            return Err(InvariantError::VertexOutOfRange { vertex: v, n });
        }
    }
    if s.len() < 3 || s.len().is_multiple_of(2) {
        return Err(InvariantError::NotOddSubset(s.len()));
    }
    Ok(s.mask())
}

/// `t(H)` for an odd-order graph.
pub fn t_value(h: &Multigraph) -> Result<Ratio<i64>, InvariantError> {
    let n = h.vertex_count();
    if n < 3 || n.is_multiple_of(2) {
        return Err(InvariantError::NotOddOrder(n));
    }
    Ok(Ratio::new(2 * h.edge_count() as i64, n as i64 - 1))
}

/// `ex(⟨S⟩, k)` in `g`.
pub fn excess(g: &Multigraph, s: &VertexSet, k: u64) -> Result<i64, InvariantError> {
    odd_mask(g, s)?;
    let inner = g.induced(s).map_err(|_| InvariantError::NotOddSubset(0))?.graph.edge_count();
    Ok(excess_value(inner as u64, s.len(), k))
}

/// `sl(⟨S⟩, k)` in `g`.
pub fn slack(g: &Multigraph, s: &VertexSet, k: u64) -> Result<i64, InvariantError> {
    odd_mask(g, s)?;
    let inner = g.induced(s).map_err(|_| InvariantError::NotOddSubset(0))?.graph.edge_count();
    Ok(slack_value(inner as u64, s.len(), k))
}

/// `Γ(G)` and a witness set; `Ok(None)` when `n < 3`.
pub fn gamma(g: &Multigraph) -> Result<Option<(Ratio<i64>, VertexSet)>, InvariantError> {
    if g.vertex_count() < 3 {
        return Ok(None);
    }
    let table = SubsetTable::new(g)?;
    Ok(table.gamma().map(|(t, m)| (t, VertexSet::from_mask(m))))
}

/// `φ(G) = ⌈max(Δ, Γ)⌉`, with `Γ` ignored below order three.
pub fn phi(g: &Multigraph) -> Result<u64, InvariantError> {
    if g.vertex_count() < 3 {
        return Ok(g.max_degree() as u64);
    }
    Ok(SubsetTable::new(g)?.phi())
}

pub fn report(g: &Multigraph) -> Result<InvariantReport, InvariantError> {
    let delta = g.max_degree() as u64;
    let gm = gamma(g)?;
    let d = Ratio::from_integer(delta as i64);
    let chi_f = match &gm {
        Some((t, _)) if *t > d => *t,
        _ => d,
    };
    Ok(InvariantReport {
        delta,
        gamma: gm.as_ref().map(|(t, _)| *t),
        chi_f,
        phi: chi_f.ceil().to_integer() as u64,
        witness: gm.map(|(_, w)| w),
    })
}

fn restrict_mask(g: &Multigraph, restrict_to: Option<&VertexSet>) -> Result<u64, InvariantError> {
    let n = g.vertex_count();
    match restrict_to {
        None => Ok(if n == 0 { 0 } else { (1u64 << n) - 1 }),
        Some(s) => {
            if let Some(&v) = s.members().last() {
                if v >= n {
                    return Err(InvariantError::VertexOutOfRange { vertex: v, n });
                }
            }
            Ok(s.mask())
        }
    }
}

/// A `k`-overfull odd subset of minimum `k`-slack, optionally confined to
/// `restrict_to` and to coboundary at most `max_coboundary` (measured in `g`).
pub fn find_min_slack_overfull(
    g: &Multigraph,
    k: u64,
    restrict_to: Option<&VertexSet>,
    max_coboundary: Option<u64>,
) -> Result<Option<SubgraphScore>, InvariantError> {
    let within = restrict_mask(g, restrict_to)?;
    let table = SubsetTable::new(g)?;
    let found = table.min_slack_where(within, k, |m| {
        table.excess(m, k) > 0 && max_coboundary.is_none_or(|c| table.coboundary(m) <= c)
    });
    Ok(found.map(|(m, _)| SubgraphScore::from_mask(&table, m, k)))
}

/// A `k`-full or `k`-overfull odd subset of maximum `k`-excess.
pub fn find_max_excess_full_or_overfull(g: &Multigraph, k: u64) -> Result<Option<SubgraphScore>, InvariantError> {
    let table = SubsetTable::new(g)?;
    Ok(max_excess_in(&table, table.full_mask(), k, false).map(|m| SubgraphScore::from_mask(&table, m, k)))
}

/// Maximum-excess odd subset with excess `> 0` (`strict`) or `>= 0`.
pub(crate) fn max_excess_in(table: &SubsetTable, within: u64, k: u64, strict: bool) -> Option<u64> {
    let mut best: Option<(u64, i64)> = None;
    for mask in table.odd_subsets(within) {
        let ex = table.excess(mask, k);
        if ex < 0 || (strict && ex == 0) {
            continue;
        }
        let better = match best {
            None => true,
            Some((bm, be)) => ex > be || (ex == be && witness_cmp(mask, bm) == Ordering::Less),
        };
        if better {
            best = Some((mask, ex));
        }
    }
    best.map(|(m, _)| m)
}

/// Whether `H - s` has strictly smaller `d`-slack than every odd proper
/// subgraph `R` of `H - s` with `|R| >= 3` and `|∂_H(R)| <= d`.
pub fn is_slack_dominant(g: &Multigraph, s: usize, d: u64) -> Result<bool, InvariantError> {
    let n = g.vertex_count();
    if n % 2 == 1 {
        return Err(InvariantError::OddOrder(n));
    }
    if s >= n {
        return Err(InvariantError::VertexOutOfRange { vertex: s, n });
    }
    let table = SubsetTable::new(g)?;
    Ok(slack_dominance_witness(&table, s, d).is_none())
}

/// The minimum-slack subgraph that breaks `d`-slack dominance of `H - s`, if any.
pub(crate) fn slack_dominance_witness(table: &SubsetTable, s: usize, d: u64) -> Option<(u64, i64)> {
    let rest = table.full_mask() & !(1u64 << s);
    if rest.count_ones() < 3 {
        return None;
    }
    let whole = table.slack(rest, d);
    table
        .min_slack_where(rest, d, |m| m != rest && table.coboundary(m) <= d)
        .filter(|&(_, sl)| sl <= whole)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    #[test]
    fn t_value_examples() {
        assert_eq!(t_value(&fat_triangle(2)).unwrap(), r(6, 1));
        let p9 = petersen().remove_vertex(0).unwrap();
        assert_eq!(p9.edge_count(), 12);
        assert_eq!(t_value(&p9).unwrap(), r(3, 1));
        let p3 = Multigraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(t_value(&p3).unwrap(), r(2, 1));
        assert_eq!(t_value(&cycle(4)), Err(InvariantError::NotOddOrder(4)));
    }

    #[test]
    fn excess_and_slack_examples() {
        let t2 = fat_triangle(2);
        let all = VertexSet::new(0..3);
        assert_eq!(excess(&t2, &all, 5).unwrap(), 1);
        assert_eq!(excess(&t2, &all, 6).unwrap(), 0);
        assert_eq!(slack(&t2, &all, 5).unwrap(), 0);
        assert_eq!(slack(&t2, &all, 6).unwrap(), 1);
        let g6f = fig2().remove_edges(&[12, 14, 16].map(crate::graph::EdgeId)).unwrap();
        assert_eq!(excess(&g6f, &VertexSet::new([0, 2, 4]), 5).unwrap(), 1);
        let p = petersen();
        assert_eq!(slack(&p, &VertexSet::new(1..10), 3).unwrap(), 4);
        assert_eq!(excess(&p, &VertexSet::new([0, 1]), 3), Err(InvariantError::NotOddSubset(2)));
    }

    #[test]
    fn gamma_and_phi_examples() {
        let (g, w) = gamma(&petersen()).unwrap().unwrap();
        assert_eq!(g, r(3, 1));
        assert_eq!(w.len(), 9);
        let (g, w) = gamma(&fat_triangle(2)).unwrap().unwrap();
        assert_eq!((g, w.len()), (r(6, 1), 3));
        let p3 = Multigraph::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(gamma(&p3).unwrap().unwrap().0, r(2, 1));
        assert_eq!(phi(&petersen()).unwrap(), 3);
        for k in 1..=4 {
            assert_eq!(phi(&fat_triangle(k)).unwrap(), 3 * k as u64);
        }
        let single = Multigraph::from_pairs(2, &[(0, 1)]).unwrap();
        assert_eq!(gamma(&single).unwrap(), None);
        assert_eq!(phi(&single).unwrap(), 1);
        assert_eq!(phi(&cycle(5)).unwrap(), 3);
    }

    #[test]
    fn report_consistency() {
        let rep = report(&fat_triangle(3)).unwrap();
        assert_eq!(rep.delta, 6);
        assert_eq!(rep.chi_f, r(9, 1));
        assert_eq!(rep.phi, 9);
        let rep = report(&petersen()).unwrap();
        assert_eq!(rep.chi_f, r(3, 1));
    }

    #[test]
    fn min_slack_overfull_examples() {
        let g6f = fig2().remove_edges(&[12, 14, 16].map(crate::graph::EdgeId)).unwrap();
        let s = find_min_slack_overfull(&g6f, 5, None, None).unwrap().unwrap();
        assert_eq!(s.subset, VertexSet::new([0, 2, 4]));
        assert_eq!(s.slack, 0);
        assert!(find_min_slack_overfull(&petersen(), 3, None, None).unwrap().is_none());
        assert!(find_min_slack_overfull(&fat_triangle(2), 6, None, None).unwrap().is_none());
        let restricted =
            find_min_slack_overfull(&g6f, 5, Some(&VertexSet::new([1, 3, 5])), None).unwrap().unwrap();
        assert_eq!(restricted.subset, VertexSet::new([1, 3, 5]));
        assert!(find_min_slack_overfull(&g6f, 5, None, Some(2)).unwrap().is_none());
    }

    #[test]
    fn max_excess_examples() {
        let g6f = fig2().remove_edges(&[12, 14, 16].map(crate::graph::EdgeId)).unwrap();
        let s = find_max_excess_full_or_overfull(&g6f, 5).unwrap().unwrap();
        assert_eq!((s.excess, s.subset), (1, VertexSet::new([0, 2, 4])));
        let s = find_max_excess_full_or_overfull(&fat_triangle(2), 6).unwrap().unwrap();
        assert_eq!((s.excess, s.subset.len()), (0, 3));
        let s = find_max_excess_full_or_overfull(&cycle(4), 2).unwrap().unwrap();
        assert_eq!((s.excess, s.subset), (0, VertexSet::new([0, 1, 2])));
    }

    #[test]
    fn slack_dominance_examples() {
        let g6f = fig2().remove_edges(&[12, 14, 16].map(crate::graph::EdgeId)).unwrap();
        for s in 0..6 {
            assert!(!is_slack_dominant(&g6f, s, 5).unwrap());
        }
        let mut pairs = Vec::new();
        for i in 0..4 {
            pairs.push((i, (i + 1) % 4));
            pairs.push((i, (i + 1) % 4));
        }
        let c4x2 = Multigraph::from_pairs(4, &pairs).unwrap();
        assert!(is_slack_dominant(&c4x2, 0, 4).unwrap());
        assert!(is_slack_dominant(&complete(4), 0, 3).unwrap());
        assert_eq!(is_slack_dominant(&fat_triangle(1), 0, 2), Err(InvariantError::OddOrder(3)));
    }

    #[test]
    fn lex_order_on_member_lists() {
        // {0,3} precedes {1,2}
        assert_eq!(lex_cmp(0b1001, 0b0110), Ordering::Less);
        assert_eq!(witness_cmp(0b111, 0b1_1111), Ordering::Less);
    }

    #[test]
    fn enumeration_guard() {
        let g = Multigraph::new(DEFAULT_MAX_N + 1);
        if std::env::var("GF_MAX_N").is_err() {
            assert!(matches!(SubsetTable::new(&g), Err(InvariantError::TooLarge { .. })));
        }
    }

    fn arb_graph() -> impl Strategy<Value = Multigraph> {
        (3usize..10).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..40).prop_map(move |pairs| {
                let pairs: Vec<_> = pairs.into_iter().filter(|(u, v)| u != v).collect();
                Multigraph::from_pairs(n, &pairs).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn slack_plus_excess(g in arb_graph(), k in 0u64..12) {
            let table = SubsetTable::new(&g).unwrap();
            for m in table.odd_subsets(table.full_mask()) {
                let size = m.count_ones() as i64;
                prop_assert_eq!(table.excess(m, k) + table.slack(m, k), (size - 1) / 2);
            }
        }

        #[test]
        fn phi_by_integer_ceilings(g in arb_graph()) {
            let table = SubsetTable::new(&g).unwrap();
            let mut p = table.max_degree();
            for m in table.odd_subsets(table.full_mask()) {
                let num = 2 * table.edges(m);
                let den = m.count_ones() as u64 - 1;
                p = p.max(num.div_ceil(den));
            }
            prop_assert_eq!(phi(&g).unwrap(), p);
        }
    }
}
