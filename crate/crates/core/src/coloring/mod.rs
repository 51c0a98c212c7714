//! Edge colorings: leaf coloring, split merge, bottom-up reconstruction and
//! the bound certificate.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, Multigraph, ShrinkResult};
use crate::invariants::{self, InvariantError, SubsetTable};
use crate::matching::Matching;
use crate::reduction::{Criterion, DecompTree, Incoming, LeafPlan, ReductionError};

pub use oracle::{exact_chromatic_index, exact_chromatic_index_with, DEFAULT_ORACLE_BUDGET, DEFAULT_ORACLE_EDGES};

#[derive(Debug, Error)]
pub enum ColoringError {
    #[error("edge {0} is not colored")]
    Uncolored(EdgeId),
    #[error("color assigned to unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edges {a} and {b} share vertex {vertex} and color {color}")]
    Conflict {
        a: EdgeId,
        b: EdgeId,
        vertex: usize,
        color: u32,
    },
    #[error("oracle limited to {limit} edges, graph has {edges}")]
    OracleTooLarge { edges: usize, limit: usize },
    #[error("oracle search exceeded {0} nodes")]
    OracleBudget(u64),
    #[error("cannot peel {count} matchings from a graph with φ = {phi}")]
    PeelCount { count: u64, phi: u64 },
    #[error("no matching lowers φ below {0}")]
    PeelFailed(u64),
    #[error("merge failed: {0}")]
    Merge(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Assignment of a color index to each edge id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeColoring {
    assignment: BTreeMap<EdgeId, u32>,
}

impl EdgeColoring {
    pub fn from_map(assignment: BTreeMap<EdgeId, u32>) -> Self {
        EdgeColoring { assignment }
    }

    pub fn get(&self, id: EdgeId) -> Option<u32> {
        self.assignment.get(&id).copied()
    }

    pub fn set(&mut self, id: EdgeId, color: u32) {
        self.assignment.insert(id, color);
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, u32)> + '_ {
        self.assignment.iter().map(|(&e, &c)| (e, c))
    }

    pub fn assignment(&self) -> &BTreeMap<EdgeId, u32> {
        &self.assignment
    }

    /// Number of distinct colors.
    pub fn colors_used(&self) -> usize {
        self.assignment.values().collect::<BTreeSet<_>>().len()
    }

    /// One past the largest color index.
    pub fn palette(&self) -> u32 {
        self.assignment.values().max().map_or(0, |&c| c + 1)
    }

    /// Every edge of `g` colored, nothing else colored, no clash at a vertex.
    pub fn check_proper(&self, g: &Multigraph) -> Result<(), ColoringError> {
        for &id in self.assignment.keys() {
            if !g.contains_edge(id) {
                return Err(ColoringError::UnknownEdge(id));
            }
        }
        let mut seen: BTreeMap<(usize, u32), EdgeId> = BTreeMap::new();
        for e in g.edges() {
            let color = self.get(e.id).ok_or(ColoringError::Uncolored(e.id))?;
            for vertex in [e.u, e.v] {
                if let Some(&a) = seen.get(&(vertex, color)) {
                    return Err(ColoringError::Conflict {
                        a,
                        b: e.id,
                        vertex,
                        color,
                    });
                }
                seen.insert((vertex, color), e.id);
            }
        }
        Ok(())
    }

    pub fn is_proper(&self, g: &Multigraph) -> bool {
        self.check_proper(g).is_ok()
    }

    /// Keeps only the listed edges.
    pub fn restrict<'a>(&self, ids: impl IntoIterator<Item = &'a EdgeId>) -> EdgeColoring {
        let mut out = EdgeColoring::default();
        for id in ids {
            if let Some(c) = self.get(*id) {
                out.set(*id, c);
            }
        }
        out
    }

    /// Renumbers colors to `0..colors_used()` preserving their order.
    pub fn compact(&self) -> EdgeColoring {
        let used: Vec<u32> = self.assignment.values().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let rank: BTreeMap<u32, u32> = used.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();
        EdgeColoring {
            assignment: self.assignment.iter().map(|(&e, c)| (e, rank[c])).collect(),
        }
    }

    /// Adds `by` to every color.
    pub fn shifted(&self, by: u32) -> EdgeColoring {
        EdgeColoring {
            assignment: self.assignment.iter().map(|(&e, &c)| (e, c + by)).collect(),
        }
    }

    /// Edge ids of each color class, by color index.
    pub fn classes(&self) -> Vec<Vec<EdgeId>> {
        let mut out = vec![Vec::new(); self.palette() as usize];
        for (&e, &c) in &self.assignment {
            out[c as usize].push(e);
        }
        out
    }
}

/// A matching `M` of `h` with `φ(h - M) = φ(h) - 1`, if one exists.
///
/// Enumerates matchings of the underlying simple graph that cover every
/// vertex of degree `φ`, largest first, and checks the odd-set demands
/// `|M ∩ E(S)| >= ex(S, φ - 1)`.
pub fn phi_decreasing_matching(h: &Multigraph) -> Result<Option<Matching>, ColoringError> {
    let t = SubsetTable::new(h)?;
    let phi = t.phi();
    if phi == 0 {
        return Ok(None);
    }
    let n = h.vertex_count();
    let demands: Vec<(u64, i64)> = t
        .odd_subsets(t.full_mask())
        .filter_map(|m| {
            let ex = t.excess(m, phi - 1);
            (ex > 0).then_some((m, ex))
        })
        .collect();
    let mut lowest: BTreeMap<(usize, usize), EdgeId> = BTreeMap::new();
    for e in h.edges() {
        lowest.entry((e.u, e.v)).or_insert(e.id);
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in lowest.keys() {
        adj[u].push(v);
    }
    let must = |v: usize| t.degree(v) == phi;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut budget = 2_000_000u64;
    fn go(
        v: usize,
        covered: u64,
        n: usize,
        adj: &[Vec<usize>],
        must: &dyn Fn(usize) -> bool,
        demands: &[(u64, i64)],
        pairs: &mut Vec<(usize, usize)>,
        budget: &mut u64,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if v == n {
            return demands.iter().all(|&(m, need)| {
                pairs.iter().filter(|&&(a, b)| m >> a & 1 == 1 && m >> b & 1 == 1).count() as i64 >= need
            });
        }
        if covered >> v & 1 == 1 {
            return go(v + 1, covered, n, adj, must, demands, pairs, budget);
        }
        for &u in &adj[v] {
            if covered >> u & 1 == 0 {
                pairs.push((v, u));
                if go(v + 1, covered | 1 << v | 1 << u, n, adj, must, demands, pairs, budget) {
                    return true;
                }
                pairs.pop();
            }
        }
        !must(v) && go(v + 1, covered | 1 << v, n, adj, must, demands, pairs, budget)
    }
    if !go(0, 0, n, &adj, &must, &demands, &mut pairs, &mut budget) {
        return Ok(None);
    }
    let mut ids: Vec<EdgeId> = pairs.iter().map(|p| lowest[p]).collect();
    ids.sort();
    Ok(Some(Matching { edge_ids: ids }))
}

/// Removes `count` matchings, each lowering `φ` by exactly one.
pub fn peel_matchings(h: &Multigraph, count: u64) -> Result<(Vec<Matching>, Multigraph), ColoringError> {
    let phi = invariants::phi(h)?;
    if count > phi {
        return Err(ColoringError::PeelCount { count, phi });
    }
    let mut cur = h.clone();
    let mut out = Vec::new();
    for i in 0..count {
        let m = phi_decreasing_matching(&cur)?.ok_or(ColoringError::PeelFailed(phi - i))?;
        cur = cur.remove_edges(&m.edge_ids).expect("matching edges are present");
        debug_assert_eq!(invariants::phi(&cur)?, phi - i - 1);
        out.push(m);
    }
    Ok((out, cur))
}

/// Proper coloring of a graph with `Δ <= 2` in `φ` colors.
pub fn color_paths_and_cycles(h: &Multigraph) -> EdgeColoring {
    assert!(h.max_degree() <= 2, "path and cycle coloring needs Δ <= 2");
    let mut c = EdgeColoring::default();
    let mut done = BTreeSet::new();
    let deg = h.degrees();
    let mut starts: Vec<usize> = (0..h.vertex_count()).filter(|&v| deg[v] == 1).collect();
    starts.extend((0..h.vertex_count()).filter(|&v| deg[v] == 2));
    for start in starts {
        let mut walk = Vec::new();
        let mut at = start;
        while let Some(e) = h.edges().iter().find(|e| e.touches(at) && !done.contains(&e.id)) {
            done.insert(e.id);
            walk.push(e.id);
            at = e.other(at);
        }
        let closed = !walk.is_empty() && at == start && deg[start] == 2;
        for (i, id) in walk.iter().enumerate() {
            c.set(*id, (i % 2) as u32);
        }
        if closed && walk.len() % 2 == 1 {
            c.set(*walk.last().unwrap(), 2);
        }
    }
    c
}

/// Colors a leaf: `1A`/`2A` with `φ` colors, anything else exactly.
pub fn color_terminal(h: &Multigraph, tag: Criterion) -> Result<EdgeColoring, ColoringError> {
    if h.edge_count() == 0 {
        return Ok(EdgeColoring::default());
    }
    if !tag.is_terminal() {
        return Ok(exact_chromatic_index(h)?.1);
    }
    if h.max_degree() <= 2 {
        return Ok(color_paths_and_cycles(h));
    }
    let phi = invariants::phi(h)?;
    match peel_matchings(h, phi) {
        Ok((classes, rest)) if rest.edge_count() == 0 => {
            let mut c = EdgeColoring::default();
            for (i, m) in classes.iter().enumerate() {
                for &id in &m.edge_ids {
                    c.set(id, i as u32);
                }
            }
            Ok(c)
        }
        _ => Ok(exact_chromatic_index(h)?.1),
    }
}

/// Combines colorings of the two sides of a split into one of the host.
///
/// `coloring_s` colors `shrink_s.shrunk` (the side where `S` became a
/// vertex) and `coloring_sc` colors `shrink_sc.shrunk`. The coboundary edges
/// appear in both; `coloring_sc` is permuted to agree with `coloring_s` on
/// them and the permutation is completed in increasing order.
pub fn merge_split(
    coloring_s: &EdgeColoring,
    coloring_sc: &EdgeColoring,
    shrink_s: &ShrinkResult,
    shrink_sc: &ShrinkResult,
    k: u32,
) -> Result<EdgeColoring, ColoringError> {
    let n = shrink_s.host_to_shrunk.len();
    if shrink_sc.host_to_shrunk.len() != n || shrink_s.set.complement(n) != shrink_sc.set {
        return Err(ColoringError::Merge("shrink results are not complementary".into()));
    }
    if shrink_s.coboundary != shrink_sc.coboundary {
        return Err(ColoringError::Merge("the two sides disagree on the coboundary".into()));
    }
    let mut forward: BTreeMap<u32, u32> = BTreeMap::new();
    let mut taken = BTreeSet::new();
    for &e in &shrink_s.coboundary {
        let (a, b) = match (coloring_sc.get(e), coloring_s.get(e)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(ColoringError::Merge(format!("coboundary edge {e} is uncolored"))),
        };
        if forward.insert(a, b).is_some() || !taken.insert(b) {
            return Err(ColoringError::Merge(format!("coboundary colors repeat at edge {e}")));
        }
    }
    let mut free = (0..k).filter(|c| !taken.contains(c));
    for c in 0..k {
        if let std::collections::btree_map::Entry::Vacant(slot) = forward.entry(c) {
            slot.insert(free.next().expect("permutation of 0..k"));
        }
    }
    let mut out = coloring_s.clone();
    let cob: BTreeSet<EdgeId> = shrink_s.coboundary.iter().copied().collect();
    for (e, c) in coloring_sc.iter() {
        if cob.contains(&e) {
            continue;
        }
        let mapped = *forward
            .get(&c)
            .ok_or_else(|| ColoringError::Merge(format!("color {c} exceeds k = {k}")))?;
        out.set(e, mapped);
    }
    if out.palette() > k {
        return Err(ColoringError::Merge(format!("merged coloring exceeds k = {k}")));
    }
    Ok(out)
}

/// Coloring of the input graph of `tree`, assembled leaf to root.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub coloring: EdgeColoring,
    /// Palette at the root before virtual edges are stripped.
    pub root_palette: u32,
    /// `max(mr(Z) + colors(Z))` over leaves `Z`.
    pub leaf_bound: u32,
}

pub fn reconstruct(tree: &DecompTree) -> Result<EdgeColoring, ColoringError> {
    Ok(reconstruct_detailed(tree)?.coloring)
}

pub fn reconstruct_detailed(tree: &DecompTree) -> Result<Reconstruction, ColoringError> {
    let mut colorings: Vec<Option<EdgeColoring>> = vec![None; tree.nodes.len()];
    let mut leaf_bound = 0u32;
    for id in (0..tree.nodes.len()).rev() {
        let node = &tree.nodes[id];
        let c = match node.children.as_slice() {
            [] => {
                let c = color_leaf(tree, id)?;
                leaf_bound = leaf_bound.max((node.mr - tree.origin_mr()) as u32 + c.palette());
                c
            }
            [only] => {
                let child = colorings[*only].take().expect("children are colored first");
                match &tree.nodes[*only].incoming {
                    Incoming::MatchingRemoved { edges, .. } => {
                        let mut c = child.shifted(1);
                        for &e in edges {
                            c.set(e, 0);
                        }
                        c
                    }
                    _ => child.restrict(node.graph.edge_ids().collect::<Vec<_>>().iter()),
                }
            }
            [a, b] => {
                let ca = colorings[*a].take().expect("children are colored first");
                let cb = colorings[*b].take().expect("children are colored first");
                let (Incoming::Split { shrink: sa }, Incoming::Split { shrink: sb }) =
                    (&tree.nodes[*a].incoming, &tree.nodes[*b].incoming)
                else {
                    return Err(ColoringError::Merge(format!("node {id} has two non-split children")));
                };
                let k = ca.palette().max(cb.palette());
                merge_split(&ca, &cb, sa, sb, k)?
            }
            _ => return Err(ColoringError::Merge(format!("node {id} has more than two children"))),
        };
        c.check_proper(&node.graph)?;
        colorings[id] = Some(c);
    }
    let root = colorings[0].take().expect("root colored");
    let root_palette = root.palette();
    let original: Vec<EdgeId> = tree.input_edges.clone();
    let coloring = root.restrict(original.iter()).compact();
    Ok(Reconstruction {
        coloring,
        root_palette,
        leaf_bound,
    })
}

fn color_leaf(tree: &DecompTree, id: usize) -> Result<EdgeColoring, ColoringError> {
    let node = &tree.nodes[id];
    let g = &node.graph;
    match &node.leaf {
        Some(LeafPlan::Terminal) => color_terminal(g, node.criterion.unwrap_or(Criterion::OneA)),
        Some(LeafPlan::Oracle) => Ok(exact_chromatic_index(g)?.1),
        Some(LeafPlan::Subtree(sub)) => reconstruct(sub),
        Some(LeafPlan::Fallback) | None => {
            if g.edge_count() <= DEFAULT_ORACLE_EDGES {
                Ok(exact_chromatic_index(g)?.1)
            } else {
                Ok(greedy_by_matchings(g))
            }
        }
    }
}

/// Repeatedly removes a maximum matching; proper but not optimal.
pub fn greedy_by_matchings(g: &Multigraph) -> EdgeColoring {
    let mut c = EdgeColoring::default();
    let mut cur = g.clone();
    let mut color = 0;
    while cur.edge_count() > 0 {
        let m = crate::matching::maximum_matching(&cur);
        for &e in &m.edge_ids {
            c.set(e, color);
        }
        cur = cur.remove_edges(&m.edge_ids).expect("matching edges are present");
        color += 1;
    }
    c
}

/// Checked form of `χ' <= φ + log_{3/2} min(n'/3, φ)`, `n'` the order
/// rounded up to even. The bound is stated for order at least 3; below that
/// `applicable` is false and `satisfied` means at most `φ` colors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub n: usize,
    pub phi: u64,
    pub colors_used: usize,
    /// Floating-point value of the bound, for display.
    pub bound_value: f64,
    /// `⌊bound_value⌋`, computed exactly.
    pub bound_floor: u64,
    pub applicable: bool,
    pub satisfied: bool,
}

/// `colors <= φ + log_{3/2}(a/3)` with `a = min(n', 3φ)`, evaluated as
/// `3^(j+1) <= 2^j a` for `j = colors - φ >= 0`. Requires `n >= 3`.
pub fn within_bound(n: usize, phi: u64, colors: u64) -> bool {
    debug_assert!(n >= 3);
    if colors < phi {
        return true;
    }
    let a = (even_order(n) as u64).min(3 * phi);
    let j = colors - phi;
    if j > 80 {
        return false;
    }
    crate::reduction::reduced_by(3, a, j as u32)
}

fn even_order(n: usize) -> usize {
    n + n % 2
}

/// Largest integer `c` with [`within_bound`]; at least `φ` for `n >= 3`.
pub fn bound_floor(n: usize, phi: u64) -> u64 {
    let mut c = phi;
    while within_bound(n, phi, c + 1) {
        c += 1;
    }
    c
}

pub fn bound_value(n: usize, phi: u64) -> f64 {
    let a = (even_order(n) as f64 / 3.0).min(phi as f64);
    phi as f64 + a.ln() / 1.5f64.ln()
}

pub fn certify(g: &Multigraph, c: &EdgeColoring) -> Result<BoundCertificate, ColoringError> {
    c.check_proper(g)?;
    let n = g.vertex_count();
    let phi = if g.edge_count() == 0 { 0 } else { invariants::phi(g)? };
    let colors = c.colors_used();
    let applicable = n >= 3 && phi > 0;
    let (value, floor) = if applicable {
        (bound_value(n, phi), bound_floor(n, phi))
    } else {
        (phi as f64, phi)
    };
    Ok(BoundCertificate {
        n,
        phi,
        colors_used: colors,
        bound_value: value,
        bound_floor: floor,
        applicable,
        satisfied: colors as u64 <= floor,
    })
}

#[cfg(test)]
mod tests;
