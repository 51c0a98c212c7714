//! Decomposition of an `r`-graph into small leaves.
//!
//! Every node of a [`DecompTree`] is a multigraph reached from its parent by
//! one of three operations: removing a matching, adding virtual edges, or
//! taking one side of a split (shrink `S`, shrink `S^c`). Leaves carry the
//! halting criterion that stopped the descent. The tree is built top-down by
//! [`reduce`]; colorings are assembled bottom-up in [`crate::coloring`].
//!
//! Each step re-checks the structural facts it relies on. A failed check is a
//! [`Violation`]: an error by default, or with [`ReduceConfig::fallback`] a
//! leaf that is colored directly and flagged.

mod stage1;
mod stage2;
mod verify;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::completion::{self, CompletionError};
use crate::graph::{EdgeId, GraphError, Multigraph, ShrinkResult, VertexSet};
use crate::invariants::{InvariantError, SubsetTable};

pub use verify::{verify_tree, LeafCheck, TreeIssue, TreeReport};
pub(crate) use verify::reduced_by;
pub use stage1::stage1_postcheck_1b;

/// Halting criteria. `1C` hands a node over to the second stage instead of
/// producing a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "1A")]
    OneA,
    #[serde(rename = "1B")]
    OneB,
    #[serde(rename = "1C")]
    OneC,
    #[serde(rename = "2A")]
    TwoA,
    #[serde(rename = "2B")]
    TwoB,
    #[serde(rename = "2C")]
    TwoC,
    #[serde(rename = "2D")]
    TwoD,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::OneA => "1A",
            Criterion::OneB => "1B",
            Criterion::OneC => "1C",
            Criterion::TwoA => "2A",
            Criterion::TwoB => "2B",
            Criterion::TwoC => "2C",
            Criterion::TwoD => "2D",
        }
    }

    /// Small leaves colored with exactly `φ` colors.
    pub fn is_terminal(self) -> bool {
        matches!(self, Criterion::OneA | Criterion::TwoA)
    }

    /// Largest cost a leaf with this tag may carry.
    pub fn cost_allowance(self) -> i64 {
        if self == Criterion::TwoC {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceConfig {
    /// Orders at or below this halt as `1A`/`2A`; at most 8.
    pub terminal_order: usize,
    /// Non-terminal leaves with at most this many edges go to the exact
    /// oracle; larger ones are reduced again as a subtree.
    pub leaf_oracle_edges: usize,
    /// Turn violations into flagged leaves instead of errors.
    pub fallback: bool,
    /// Node budget per tree.
    pub max_nodes: usize,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            terminal_order: 8,
            leaf_oracle_edges: 40,
            fallback: false,
            max_nodes: 20_000,
        }
    }
}

/// A failed runtime check, with the offending graph in `mgraph` form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub node: usize,
    pub check: String,
    pub detail: String,
    pub repro: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}: {} failed: {}", self.node, self.check, self.detail)
    }
}

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("state violation at {0}")]
    StateViolation(Box<Violation>),
    #[error("tree exceeded {0} nodes")]
    NodeLimit(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Completion(#[from] CompletionError),
}

/// What a node still has to do.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Phase {
    /// An `r`-graph: remove a 1-factor.
    EntryRegular,
    /// `(Δ-1)`-regular with `φ = Δ`: split on a maximum-excess set.
    EntryOverfull,
    /// First stage with special vertex `s`.
    Stage1 { s: usize },
    /// Two low vertices after a split: add `a b` edges.
    Augment { a: usize, b: usize },
    /// Split on a saturated set `W` found while augmenting.
    SplitW { w: VertexSet },
    /// The `W^c` side of such a split; expected to halt as `1B`.
    Forced1B,
    /// Second stage; `hint` is the preferred special vertex. `expect_halt`
    /// marks a split side that gained a vertex of degree `d+1`.
    Stage2 { hint: Option<usize>, expect_halt: bool },
}

/// How a node was obtained from its parent.
#[derive(Clone, Debug)]
pub enum Incoming {
    Root,
    /// `edges` is the removed matching; `unmatched` lists vertices it missed.
    MatchingRemoved { edges: Vec<EdgeId>, unmatched: Vec<usize> },
    /// Parent shrunk by `shrink.set` (child 0 shrinks `S`, child 1 `S^c`).
    Split { shrink: ShrinkResult },
    VirtualEdges { edges: Vec<EdgeId> },
}

impl Incoming {
    pub fn kind(&self) -> &'static str {
        match self {
            Incoming::Root => "root",
            Incoming::MatchingRemoved { .. } => "matching",
            Incoming::Split { .. } => "split",
            Incoming::VirtualEdges { .. } => "virtual",
        }
    }

    pub fn matching_weight(&self) -> u64 {
        u64::from(matches!(self, Incoming::MatchingRemoved { .. }))
    }
}

/// How a leaf is colored.
#[derive(Clone, Debug)]
pub enum LeafPlan {
    /// Greedy `φ`-decreasing matchings (or a direct path/cycle coloring).
    Terminal,
    Oracle,
    Subtree(Box<DecompTree>),
    /// A violation stopped the descent here.
    Fallback,
}

#[derive(Clone, Debug)]
pub struct DecompNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub graph: Multigraph,
    pub incoming: Incoming,
    /// Matchings removed on the path from the root.
    pub mr: u64,
    pub phi: u64,
    /// `Δ*` in the first stage, `d` in the second; always `r - mr`.
    pub d: u64,
    pub stage: u8,
    pub phase: Phase,
    /// Node against which the halting criteria are measured.
    pub reference: usize,
    /// Virtual edge ids accumulated on the path from the root.
    pub virtual_edges: Vec<EdgeId>,
    pub special: Option<usize>,
    pub steps: Vec<String>,
    pub criterion: Option<Criterion>,
    pub leaf: Option<LeafPlan>,
    pub violation: Option<Violation>,
}

impl DecompNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// `mr + φ - r`: colors spent beyond the root's `φ`.
    pub fn cost(&self, root_r: u64) -> i64 {
        self.mr as i64 + self.phi as i64 - root_r as i64
    }
}

#[derive(Clone, Debug)]
pub struct DecompTree {
    pub nodes: Vec<DecompNode>,
    /// `φ` of the input, which is the regularity of the root.
    pub root_r: u64,
    pub input_n: usize,
    pub input_edges: Vec<EdgeId>,
    pub added_vertex: Option<usize>,
    pub completion_edges: Vec<EdgeId>,
    pub config: ReduceConfig,
    /// Set for trees started in the second stage: the graph the root is
    /// taken to have been reduced from.
    pub origin: Option<Origin>,
}

/// An assumed starting graph `G` for a tree rooted at a second-stage graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    /// `n(G)`.
    pub n: usize,
    /// `φ(G)`, equal to the tree's `root_r`.
    pub phi: u64,
    /// Matchings removed between `G` and the root.
    pub mr: u64,
}

impl DecompTree {
    /// `(n, φ)` of the graph a node's halting criteria are measured against.
    pub fn reference_of(&self, node: &DecompNode) -> (usize, u64) {
        match self.origin {
            Some(o) if node.reference == 0 => (o.n, o.phi),
            _ => {
                let r = &self.nodes[node.reference];
                (r.graph.vertex_count(), r.phi)
            }
        }
    }

    /// `n(G)` for the Part-3 comparison.
    pub fn origin_order(&self) -> usize {
        self.origin.map_or(self.nodes[0].graph.vertex_count(), |o| o.n)
    }

    pub fn origin_mr(&self) -> u64 {
        self.origin.map_or(0, |o| o.mr)
    }
}

impl DecompTree {
    pub fn root(&self) -> &DecompNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &DecompNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for n in &self.nodes {
            if let Some(p) = n.parent {
                depth[n.id] = depth[p] + 1;
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }

    /// Node, subtree and leaf counts including nested subtrees.
    pub fn total_nodes(&self) -> usize {
        self.nodes.len()
            + self
                .nodes
                .iter()
                .filter_map(|n| match &n.leaf {
                    Some(LeafPlan::Subtree(t)) => Some(t.total_nodes()),
                    _ => None,
                })
                .sum::<usize>()
    }
}

/// A child produced by a step, before it gets an id.
pub(crate) struct Draft {
    pub graph: Multigraph,
    pub incoming: Incoming,
    pub phase: Phase,
    pub stage: u8,
    pub special: Option<usize>,
    pub new_reference: bool,
}

pub(crate) enum Action {
    Halt(Criterion, String),
    /// `1C`: continue the same node in the second stage.
    Handoff(String),
    Children(Vec<Draft>, String),
}

/// Read-only context for one step.
pub(crate) struct Ctx<'a> {
    pub config: &'a ReduceConfig,
    pub root_r: u64,
    pub ref_n: usize,
    pub ref_phi: u64,
    pub node: &'a DecompNode,
}

impl Ctx<'_> {
    pub fn fail(&self, check: &str, detail: impl Into<String>) -> Violation {
        Violation {
            node: self.node.id,
            check: check.to_string(),
            detail: detail.into(),
            repro: crate::format::emit_multigraph(&self.node.graph),
        }
    }

    pub fn ensure(&self, ok: bool, check: &str, detail: impl FnOnce() -> String) -> Result<(), Violation> {
        if ok {
            Ok(())
        } else {
            Err(self.fail(check, detail()))
        }
    }

    pub fn small(&self, g: &Multigraph) -> bool {
        g.vertex_count() <= self.config.terminal_order || g.max_degree() <= 2
    }
}

/// Mask helpers shared by both stages.
pub(crate) fn mask_of(v: usize) -> u64 {
    1u64 << v
}

pub(crate) fn set_of(mask: u64) -> VertexSet {
    VertexSet::from_mask(mask)
}

/// Splits `g` on `s`: child 0 shrinks `s`, child 1 shrinks its complement.
pub(crate) fn split_pair(g: &Multigraph, s: &VertexSet) -> Result<[ShrinkResult; 2], GraphError> {
    Ok([g.shrink(s)?, g.shrink(&s.complement(g.vertex_count()))?])
}

/// Builds the decomposition tree of `g` (completed to a `φ(g)`-graph first).
pub fn reduce(g: &Multigraph, config: &ReduceConfig) -> Result<DecompTree, ReductionError> {
    check_config(g, config)?;
    let r = crate::invariants::phi(g)?;
    let completed = completion::rgraph_complete(g, r)?;
    let root_phi = SubsetTable::new(&completed.graph)?.phi();
    debug_assert_eq!(root_phi, r);
    let root = DecompNode {
        id: 0,
        parent: None,
        children: Vec::new(),
        graph: completed.graph,
        incoming: Incoming::Root,
        mr: 0,
        phi: root_phi,
        d: r,
        stage: 1,
        phase: Phase::EntryRegular,
        reference: 0,
        virtual_edges: completed.added_edges.clone(),
        special: None,
        steps: Vec::new(),
        criterion: None,
        leaf: None,
        violation: None,
    };
    let mut tree = DecompTree {
        nodes: vec![root],
        root_r: r,
        input_n: g.vertex_count(),
        input_edges: g.edge_ids().collect(),
        added_vertex: completed.added_vertex,
        completion_edges: completed.added_edges,
        config: config.clone(),
        origin: None,
    };
    grow(&mut tree)?;
    Ok(tree)
}

/// Second stage alone, from a graph `g` of even order whose degrees are all
/// `d = Δ(g)` except one vertex `s` of smaller degree.
///
/// `g` is treated as the graph a `1C` halt hands over: reached by removing
/// one matching from a graph with `n_origin` vertices and `φ = d + 1`. The
/// entry conditions of that handoff are checked: `φ(g) <= d + 1`,
/// `3d <= n_origin`, `p <= n_origin` and `4 ex(g - s, d) < p`.
pub fn reduce_stage2(g: &Multigraph, n_origin: usize, config: &ReduceConfig) -> Result<DecompTree, ReductionError> {
    check_config(g, config)?;
    let invalid = |m: String| Err(ReductionError::InvalidInput(m));
    let p = g.vertex_count();
    let d = g.max_degree() as u64;
    if p % 2 == 1 || p < 4 {
        return invalid(format!("order {p} must be even and at least 4"));
    }
    let deg = g.degrees();
    let low: Vec<usize> = (0..p).filter(|&v| (deg[v] as u64) < d).collect();
    if low.len() > 1 {
        return invalid(format!("{} vertices below Δ = {d}", low.len()));
    }
    let s = low.first().copied().unwrap_or(0);
    let t = SubsetTable::new(g)?;
    let phi = t.phi();
    if phi > d + 1 {
        return invalid(format!("φ = {phi} exceeds Δ + 1 = {}", d + 1));
    }
    if 3 * d > n_origin as u64 || p > n_origin {
        return invalid(format!("n(G) = {n_origin} is below max(3Δ, p) for Δ = {d}, p = {p}"));
    }
    let ex = t.excess(t.full_mask() & !(1u64 << s), d);
    if 4 * ex >= p as i64 {
        return invalid(format!("ex(g - s, d) = {ex} is at least p/4"));
    }
    let root = DecompNode {
        id: 0,
        parent: None,
        children: Vec::new(),
        graph: g.clone(),
        incoming: Incoming::Root,
        mr: 1,
        phi,
        d,
        stage: 2,
        phase: Phase::Stage2 {
            hint: Some(s),
            expect_halt: false,
        },
        reference: 0,
        virtual_edges: Vec::new(),
        special: Some(s),
        steps: Vec::new(),
        criterion: None,
        leaf: None,
        violation: None,
    };
    let mut tree = DecompTree {
        nodes: vec![root],
        root_r: d + 1,
        input_n: p,
        input_edges: g.edge_ids().collect(),
        added_vertex: None,
        completion_edges: Vec::new(),
        config: config.clone(),
        origin: Some(Origin {
            n: n_origin,
            phi: d + 1,
            mr: 1,
        }),
    };
    grow(&mut tree)?;
    Ok(tree)
}

fn check_config(g: &Multigraph, config: &ReduceConfig) -> Result<(), ReductionError> {
    if config.terminal_order > 8 {
        return Err(ReductionError::InvalidInput(format!(
            "terminal order {} exceeds 8",
            config.terminal_order
        )));
    }
    if g.edge_count() == 0 {
        return Err(ReductionError::InvalidInput("graph has no edges".into()));
    }
    Ok(())
}

fn context<'a>(tree: &'a DecompTree, id: usize) -> Ctx<'a> {
    let node = &tree.nodes[id];
    let (ref_n, ref_phi) = tree.reference_of(node);
    Ctx {
        config: &tree.config,
        root_r: tree.root_r,
        ref_n,
        ref_phi,
        node,
    }
}

fn grow(tree: &mut DecompTree) -> Result<(), ReductionError> {
    let config = tree.config.clone();
    let config = &config;
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let outcome = run_step(&context(tree, id));
        match outcome {
            Ok(Action::Halt(criterion, note)) => {
                let plan = leaf_plan(&tree.nodes[id].graph, criterion, config)?;
                let node = &mut tree.nodes[id];
                node.steps.push(note);
                node.criterion = Some(criterion);
                node.leaf = Some(plan);
            }
            Ok(Action::Handoff(note)) => {
                let node = &mut tree.nodes[id];
                node.steps.push(note);
                node.stage = 2;
                node.phase = Phase::Stage2 {
                    hint: node.special,
                    expect_halt: false,
                };
                queue.push_front(id);
            }
            Ok(Action::Children(drafts, note)) => {
                tree.nodes[id].steps.push(note);
                for draft in drafts {
                    let child = attach(tree, id, draft)?;
                    queue.push_back(child);
                }
                if tree.nodes.len() > config.max_nodes {
                    return Err(ReductionError::NodeLimit(config.max_nodes));
                }
            }
            Err(violation) => {
                if !config.fallback {
                    return Err(ReductionError::StateViolation(Box::new(violation)));
                }
                let node = &mut tree.nodes[id];
                node.steps.push(format!("fallback: {}", violation.check));
                node.violation = Some(violation);
                node.leaf = Some(LeafPlan::Fallback);
            }
        }
    }
    Ok(())
}

/// A child proposed by one step.
#[derive(Clone, Debug)]
pub struct ProposedChild {
    pub graph: Multigraph,
    pub incoming: Incoming,
    pub phase: Phase,
    pub stage: u8,
}

/// Outcome of a single step on a node, children not yet attached.
#[derive(Clone, Debug)]
pub enum StepOutcome {
    Halt { criterion: Criterion, note: String },
    /// `1C`: the node continues in the second stage.
    Handoff { note: String },
    Children { children: Vec<ProposedChild>, note: String },
}

/// Replays the step taken at node `id` of `tree` under its stored phase.
pub fn step_node(tree: &DecompTree, id: usize) -> Result<StepOutcome, Violation> {
    Ok(match run_step(&context(tree, id))? {
        Action::Halt(criterion, note) => StepOutcome::Halt { criterion, note },
        Action::Handoff(note) => StepOutcome::Handoff { note },
        Action::Children(drafts, note) => StepOutcome::Children {
            children: drafts
                .into_iter()
                .map(|d| ProposedChild {
                    graph: d.graph,
                    incoming: d.incoming,
                    phase: d.phase,
                    stage: d.stage,
                })
                .collect(),
            note,
        },
    })
}

/// [`step_node`] restricted to first-stage nodes.
pub fn stage1_step(tree: &DecompTree, id: usize) -> Result<StepOutcome, Violation> {
    let ctx = context(tree, id);
    if matches!(ctx.node.phase, Phase::Stage2 { .. }) {
        return Err(ctx.fail("stage", "node is in the second stage"));
    }
    step_node(tree, id)
}

/// [`step_node`] restricted to second-stage nodes.
pub fn stage2_step(tree: &DecompTree, id: usize) -> Result<StepOutcome, Violation> {
    let ctx = context(tree, id);
    if !matches!(ctx.node.phase, Phase::Stage2 { .. }) {
        return Err(ctx.fail("stage", "node is in the first stage"));
    }
    step_node(tree, id)
}

fn run_step(ctx: &Ctx) -> Result<Action, Violation> {
    match &ctx.node.phase {
        Phase::EntryRegular => stage1::entry_regular(ctx),
        Phase::EntryOverfull => stage1::entry_overfull(ctx),
        Phase::Stage1 { s } => stage1::step(ctx, *s),
        Phase::Augment { a, b } => stage1::augment(ctx, *a, *b),
        Phase::SplitW { w } => stage1::split_w(ctx, w),
        Phase::Forced1B => stage1::forced_1b(ctx),
        Phase::Stage2 { hint, expect_halt } => stage2::step(ctx, *hint, *expect_halt),
    }
}

fn leaf_plan(g: &Multigraph, criterion: Criterion, config: &ReduceConfig) -> Result<LeafPlan, ReductionError> {
    if g.edge_count() == 0 || criterion.is_terminal() {
        return Ok(LeafPlan::Terminal);
    }
    if g.edge_count() <= config.leaf_oracle_edges {
        return Ok(LeafPlan::Oracle);
    }
    Ok(LeafPlan::Subtree(Box::new(reduce(g, config)?)))
}

fn attach(tree: &mut DecompTree, parent: usize, draft: Draft) -> Result<usize, ReductionError> {
    let id = tree.nodes.len();
    let p = &tree.nodes[parent];
    let mr = p.mr + draft.incoming.matching_weight();
    let mut virtual_edges = p.virtual_edges.clone();
    if let Incoming::VirtualEdges { edges } = &draft.incoming {
        virtual_edges.extend(edges.iter().copied());
    }
    virtual_edges.retain(|e| draft.graph.contains_edge(*e));
    let phi = SubsetTable::new(&draft.graph)?.phi();
    let reference = if draft.new_reference { id } else { p.reference };
    let node = DecompNode {
        id,
        parent: Some(parent),
        children: Vec::new(),
        graph: draft.graph,
        incoming: draft.incoming,
        mr,
        phi,
        d: tree.root_r.saturating_sub(mr),
        stage: draft.stage,
        phase: draft.phase,
        reference,
        virtual_edges,
        special: draft.special,
        steps: Vec::new(),
        criterion: None,
        leaf: None,
        violation: None,
    };
    tree.nodes.push(node);
    tree.nodes[parent].children.push(id);
    Ok(id)
}

/// Vertices of `g` with degree below `k`, by (degree, index).
pub(crate) fn low_vertices(g: &Multigraph, k: u64) -> Vec<usize> {
    let deg = g.degrees();
    let mut low: Vec<usize> = (0..g.vertex_count()).filter(|&v| (deg[v] as u64) < k).collect();
    low.sort_by_key(|&v| (deg[v], v));
    low
}

/// Split sets must leave at least three vertices on each side.
pub(crate) fn check_nontrivial(ctx: &Ctx, mask: u64, what: &str) -> Result<(), Violation> {
    let p = ctx.node.graph.vertex_count();
    let c = mask.count_ones() as usize;
    ctx.ensure(c >= 3 && c + 3 <= p, what, || {
        format!("split set {} of size {c} is trivial in order {p}", set_of(mask))
    })
}
