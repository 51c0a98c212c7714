//! Loopless multigraphs with permanent edge identities.
//!
//! Every edge carries an [`EdgeId`] that is assigned once and never reused by
//! any graph derived from it. Induced subgraphs, shrunk graphs, matching
//! removals and edge additions all keep the ids of the edges they retain, so a
//! coloring keyed by id can be moved between any two graphs of one
//! decomposition without translation tables.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stable edge token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An edge with endpoints normalized so that `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: EdgeId,
    pub u: usize,
    pub v: usize,
}

impl Edge {
    pub fn touches(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }

    /// The endpoint opposite `x`. `x` must be an endpoint.
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("loop at vertex {0} is not allowed")]
    Loop(usize),
    #[error("vertex set must be non-empty")]
    EmptySet,
    #[error("vertex set must be a proper subset of the vertices")]
    FullSet,
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("edge id space exhausted")]
    IdOverflow,
}

/// A subset of the vertices of some host graph, kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = members.into_iter().collect();
        VertexSet(set.into_iter().collect())
    }

    pub fn from_mask(mask: u64) -> Self {
        VertexSet((0..64).filter(|&i| mask >> i & 1 == 1).collect())
    }

    /// Bit mask of the members; all members must be below 64.
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &v| m | 1u64 << v)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// `V \ self` for a host on `n` vertices.
    pub fn complement(&self, n: usize) -> VertexSet {
        VertexSet((0..n).filter(|v| !self.contains(*v)).collect())
    }

    pub(crate) fn check(&self, n: usize) -> Result<(), GraphError> {
        match self.0.last() {
            Some(&v) if v >= n => Err(GraphError::VertexOutOfRange { vertex: v, n }),
            _ => Ok(()),
        }
    }

    pub(crate) fn check_proper(&self, n: usize) -> Result<(), GraphError> {
        self.check(n)?;
        if self.0.is_empty() {
            return Err(GraphError::EmptySet);
        }
        if self.0.len() == n {
            return Err(GraphError::FullSet);
        }
        Ok(())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Loopless multigraph on vertices `0..n`.
///
/// Edges are stored in increasing id order. `next_id` is a watermark that is
/// inherited by every derived graph, so ids handed out by [`add_edges`] on a
/// descendant never collide with any id of an ancestor.
///
/// [`add_edges`]: Multigraph::add_edges
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: Vec<Edge>,
    next_id: u32,
}

/// Result of [`Multigraph::induced`].
#[derive(Clone, Debug)]
pub struct InducedSubgraph {
    pub graph: Multigraph,
    /// `vertex_map[i]` is the host vertex behind subgraph vertex `i`.
    pub vertex_map: Vec<usize>,
}

/// Result of [`Multigraph::shrink`].
///
/// The shrunk graph keeps the ids of all surviving edges, so the edge
/// provenance map is the identity on `shrunk.edge_ids()`. Coboundary edges are
/// re-terminated at `s_vertex`; edges inside the shrunk set are listed in
/// `dropped`.
#[derive(Clone, Debug)]
pub struct ShrinkResult {
    pub shrunk: Multigraph,
    pub s_vertex: usize,
    /// `vertex_map[i]` is the host vertex behind shrunk vertex `i`, or `None`
    /// for the replacement vertex.
    pub vertex_map: Vec<Option<usize>>,
    /// Host vertex to shrunk vertex (members of the shrunk set map to `s_vertex`).
    pub host_to_shrunk: Vec<usize>,
    pub coboundary: Vec<EdgeId>,
    pub dropped: Vec<EdgeId>,
    pub set: VertexSet,
}

impl Multigraph {
    /// Edgeless graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        Multigraph {
            n,
            edges: Vec::new(),
            next_id: 0,
        }
    }

    /// Graph on `n` vertices with one edge per pair; ids are `0..pairs.len()`.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let (g, _) = Multigraph::new(n).add_edges(pairs)?;
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|e| e.id)
    }

    /// Smallest id that no edge of this graph or its ancestors has used.
    pub fn next_edge_id(&self) -> EdgeId {
        EdgeId(self.next_id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edge(id).is_some()
    }

    pub fn degree(&self, v: usize) -> Result<usize, GraphError> {
        if v >= self.n {
            return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
        }
        Ok(self.edges.iter().filter(|e| e.touches(v)).count())
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.degrees().into_iter().min().unwrap_or(0)
    }

    /// Row-major `n × n` matrix of edge multiplicities.
    pub fn multiplicity_matrix(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.n * self.n];
        for e in &self.edges {
            m[e.u * self.n + e.v] += 1;
            m[e.v * self.n + e.u] += 1;
        }
        m
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.multiplicity_matrix().into_iter().max().unwrap_or(0)
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        let (a, b) = (u.min(v), u.max(v));
        self.edges.iter().filter(|e| e.u == a && e.v == b).count()
    }

    /// Edge ids incident to `v`, in id order.
    pub fn incident(&self, v: usize) -> Vec<EdgeId> {
        self.edges.iter().filter(|e| e.touches(v)).map(|e| e.id).collect()
    }

    /// Appends one edge per pair and returns the new graph with the fresh ids.
    pub fn add_edges(&self, pairs: &[(usize, usize)]) -> Result<(Multigraph, Vec<EdgeId>), GraphError> {
        let mut g = self.clone();
        let mut ids = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            for x in [u, v] {
                if x >= g.n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n: g.n });
                }
            }
            if u == v {
                return Err(GraphError::Loop(u));
            }
            let id = EdgeId(g.next_id);
            g.next_id = g.next_id.checked_add(1).ok_or(GraphError::IdOverflow)?;
            g.edges.push(Edge {
                id,
                u: u.min(v),
                v: u.max(v),
            });
            ids.push(id);
        }
        Ok((g, ids))
    }

    /// Appends `k` isolated vertices.
    pub fn add_vertices(&self, k: usize) -> Multigraph {
        let mut g = self.clone();
        g.n += k;
        g
    }

    /// Removes the listed edges; the id watermark is kept.
    pub fn remove_edges(&self, ids: &[EdgeId]) -> Result<Multigraph, GraphError> {
        let set: BTreeSet<EdgeId> = ids.iter().copied().collect();
        for id in &set {
            if !self.contains_edge(*id) {
                return Err(GraphError::UnknownEdge(*id));
            }
        }
        Ok(Multigraph {
            n: self.n,
            edges: self.edges.iter().filter(|e| !set.contains(&e.id)).copied().collect(),
            next_id: self.next_id,
        })
    }

    /// Keeps only the edges whose ids are listed (unknown ids are ignored).
    pub fn restrict_edges(&self, keep: &BTreeSet<EdgeId>) -> Multigraph {
        Multigraph {
            n: self.n,
            edges: self.edges.iter().filter(|e| keep.contains(&e.id)).copied().collect(),
            next_id: self.next_id,
        }
    }

    /// Removes vertex `v`, renumbering the later vertices down by one.
    pub fn remove_vertex(&self, v: usize) -> Result<Multigraph, GraphError> {
        if v >= self.n {
            return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
        }
        let keep = VertexSet::new((0..self.n).filter(|&x| x != v));
        if keep.is_empty() {
            return Ok(Multigraph {
                n: 0,
                edges: Vec::new(),
                next_id: self.next_id,
            });
        }
        Ok(self.induced(&keep)?.graph)
    }

    /// Edges with exactly one endpoint in `s`.
    pub fn coboundary(&self, s: &VertexSet) -> Result<Vec<EdgeId>, GraphError> {
        s.check_proper(self.n)?;
        let inside = self.membership(s);
        Ok(self
            .edges
            .iter()
            .filter(|e| inside[e.u] != inside[e.v])
            .map(|e| e.id)
            .collect())
    }

    /// The subgraph induced by `s`, with its vertices renumbered in order.
    pub fn induced(&self, s: &VertexSet) -> Result<InducedSubgraph, GraphError> {
        s.check(self.n)?;
        if s.is_empty() {
            return Err(GraphError::EmptySet);
        }
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in s.members().iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| index[e.u] != usize::MAX && index[e.v] != usize::MAX)
            .map(|e| Edge {
                id: e.id,
                u: index[e.u],
                v: index[e.v],
            })
            .collect();
        Ok(InducedSubgraph {
            graph: Multigraph {
                n: s.len(),
                edges,
                next_id: self.next_id,
            },
            vertex_map: s.members().to_vec(),
        })
    }

    /// Replaces `s` by a single new vertex, placed last.
    ///
    /// Vertices outside `s` keep their relative order. Each coboundary edge is
    /// re-terminated at the new vertex and keeps its id; edges inside `s` are
    /// dropped.
    pub fn shrink(&self, s: &VertexSet) -> Result<ShrinkResult, GraphError> {
        s.check_proper(self.n)?;
        let inside = self.membership(s);
        let m = self.n - s.len() + 1;
        let s_vertex = m - 1;
        let mut host_to_shrunk = vec![s_vertex; self.n];
        let mut vertex_map = Vec::with_capacity(m);
        for v in 0..self.n {
            if !inside[v] {
                host_to_shrunk[v] = vertex_map.len();
                vertex_map.push(Some(v));
            }
        }
        vertex_map.push(None);
        let mut edges = Vec::new();
        let mut coboundary = Vec::new();
        let mut dropped = Vec::new();
        for e in &self.edges {
            match (inside[e.u], inside[e.v]) {
                (true, true) => dropped.push(e.id),
                (a, b) => {
                    if a != b {
                        coboundary.push(e.id);
                    }
                    let (x, y) = (host_to_shrunk[e.u], host_to_shrunk[e.v]);
                    edges.push(Edge {
                        id: e.id,
                        u: x.min(y),
                        v: x.max(y),
                    });
                }
            }
        }
        Ok(ShrinkResult {
            shrunk: Multigraph {
                n: m,
                edges,
                next_id: self.next_id,
            },
            s_vertex,
            vertex_map,
            host_to_shrunk,
            coboundary,
            dropped,
            set: s.clone(),
        })
    }

    fn membership(&self, s: &VertexSet) -> Vec<bool> {
        let mut inside = vec![false; self.n];
        for &v in s.members() {
            inside[v] = true;
        }
        inside
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..self.n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// `T_k`: triangle with every pair joined by `k` parallel edges.
    pub fn fat_triangle(k: usize) -> Multigraph {
        let mut pairs = Vec::new();
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            pairs.extend(std::iter::repeat_n((u, v), k));
        }
        Multigraph::from_pairs(3, &pairs).unwrap()
    }

    pub fn petersen() -> Multigraph {
        let mut pairs = Vec::new();
        for i in 0..5 {
            pairs.push((i, (i + 1) % 5));
            pairs.push((i, i + 5));
            pairs.push((5 + i, 5 + (i + 2) % 5));
        }
        Multigraph::from_pairs(10, &pairs).unwrap()
    }

    pub fn cycle(n: usize) -> Multigraph {
        let pairs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Multigraph::from_pairs(n, &pairs).unwrap()
    }

    pub fn complete(n: usize) -> Multigraph {
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                pairs.push((u, v));
            }
        }
        Multigraph::from_pairs(n, &pairs).unwrap()
    }

    /// Two doubled triangles `{0,2,4}` and `{1,3,5}` joined by the doubled
    /// perfect matching `0-1, 2-3, 4-5`.
    pub fn fig2() -> Multigraph {
        let mut pairs = Vec::new();
        for (u, v) in [(0, 2), (2, 4), (0, 4), (1, 3), (3, 5), (1, 5), (0, 1), (2, 3), (4, 5)] {
            pairs.push((u, v));
            pairs.push((u, v));
        }
        Multigraph::from_pairs(6, &pairs).unwrap()
    }
}
