//! Independent audit of a finished decomposition tree.

use serde::{Deserialize, Serialize};

use crate::invariants::SubsetTable;

use super::{Criterion, DecompNode, DecompTree, Incoming, LeafPlan};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeIssue {
    pub node: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafCheck {
    pub node: usize,
    pub criterion: Option<Criterion>,
    pub n: usize,
    pub phi: u64,
    pub cost: i64,
    /// `min(n(H), 3φ(H)) 3^k <= 2^k min(n(G), 3φ(G))` with `k` the cost.
    pub reduced: bool,
    /// For a terminal leaf short of that reduction: the number of extra
    /// `φ`-decreasing matchings that make it up.
    pub peel: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeReport {
    pub leaves: Vec<LeafCheck>,
    pub issues: Vec<TreeIssue>,
    /// Reports for leaves colored through a nested tree.
    pub subtrees: Vec<(usize, TreeReport)>,
}

impl TreeReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty() && self.subtrees.iter().all(|(_, r)| r.is_clean())
    }

    /// Leaves whose bound relies on extra matching peels.
    pub fn peel_reliant(&self) -> Vec<usize> {
        self.leaves.iter().filter(|l| l.peel.is_some()).map(|l| l.node).collect()
    }

    pub fn all_issues(&self) -> Vec<TreeIssue> {
        let mut out = self.issues.clone();
        for (at, sub) in &self.subtrees {
            out.extend(sub.all_issues().into_iter().map(|i| TreeIssue {
                node: *at,
                message: format!("subtree node {}: {}", i.node, i.message),
            }));
        }
        out
    }
}

/// `a 3^k <= 2^k b`, false on overflow.
pub(crate) fn reduced_by(a: u64, b: u64, k: u32) -> bool {
    let lhs = 3u128.checked_pow(k).and_then(|p| p.checked_mul(a as u128));
    let rhs = 2u128.checked_pow(k).and_then(|p| p.checked_mul(b as u128));
    matches!((lhs, rhs), (Some(l), Some(r)) if l <= r)
}

pub fn verify_tree(tree: &DecompTree) -> TreeReport {
    let mut issues = Vec::new();
    let mut leaves = Vec::new();
    let mut issue = |node: usize, message: String| issues.push(TreeIssue { node, message });
    let root = tree.root();
    if root.parent.is_some() || root.mr != tree.origin_mr() || !matches!(root.incoming, Incoming::Root) {
        issue(0, "root must have no parent, the origin mr and incoming root".into());
    }
    for node in &tree.nodes {
        check_node(tree, node, &mut issue);
    }
    let root_n = tree.origin_order() as u64;
    let a_root = root_n.min(3 * tree.root_r);
    let mut subtrees = Vec::new();
    for node in tree.leaves() {
        let p = node.graph.vertex_count();
        let cost = node.cost(tree.root_r);
        let k = cost.max(0) as u32;
        let a_leaf = (p as u64).min(3 * node.phi);
        let reduced = reduced_by(a_leaf, a_root, k);
        let mut peel = None;
        match node.criterion {
            Some(c) => {
                if cost > c.cost_allowance() {
                    issue(node.id, format!("{c} leaf has cost {cost}"));
                }
                if let Err(m) = side_conditions(tree, node, c) {
                    issue(node.id, m);
                }
                if !reduced {
                    if c.is_terminal() && reduced_by(3, a_root, k) {
                        // φ-colorable leaf: peel until min(n, 3φ') is small enough
                        let j = (1..=node.phi)
                            .find(|&j| reduced_by((p as u64).min(3 * (node.phi - j)), a_root, k))
                            .unwrap_or(node.phi);
                        peel = Some(j);
                    } else {
                        issue(node.id, format!("{c} leaf with cost {k} is not reduced by (2/3)^{k}"));
                    }
                }
            }
            None => {
                let why = match &node.violation {
                    Some(v) => format!("fallback leaf: {v}"),
                    None => "leaf without a halting criterion".into(),
                };
                issue(node.id, why);
            }
        }
        if let Some(LeafPlan::Subtree(sub)) = &node.leaf {
            subtrees.push((node.id, verify_tree(sub)));
        }
        leaves.push(LeafCheck {
            node: node.id,
            criterion: node.criterion,
            n: p,
            phi: node.phi,
            cost,
            reduced,
            peel,
        });
    }
    TreeReport {
        leaves,
        issues,
        subtrees,
    }
}

fn check_node(tree: &DecompTree, node: &DecompNode, issue: &mut impl FnMut(usize, String)) {
    match SubsetTable::new(&node.graph) {
        Ok(t) if t.phi() != node.phi => issue(node.id, format!("stored φ {} but graph has {}", node.phi, t.phi())),
        Ok(_) => {}
        Err(e) => issue(node.id, e.to_string()),
    }
    if node.d as i64 != tree.root_r as i64 - node.mr as i64 {
        issue(node.id, format!("d = {} but r - mr = {}", node.d, tree.root_r as i64 - node.mr as i64));
    }
    if node.reference >= tree.nodes.len() || node.reference > node.id {
        issue(node.id, format!("reference {} is not an earlier node", node.reference));
    }
    if let Some(p) = node.parent {
        let parent = &tree.nodes[p];
        if !parent.children.contains(&node.id) {
            issue(node.id, format!("parent {p} does not list this node"));
        }
        let expected = parent.mr + node.incoming.matching_weight();
        if node.mr != expected {
            issue(node.id, format!("mr = {} but the path gives {expected}", node.mr));
        }
    }
    let kids: Vec<&DecompNode> = node.children.iter().map(|&c| &tree.nodes[c]).collect();
    match kids.as_slice() {
        [] => {}
        [only] => {
            if !matches!(only.incoming, Incoming::MatchingRemoved { .. } | Incoming::VirtualEdges { .. }) {
                issue(node.id, "single child must come from a matching removal or edge addition".into());
            }
        }
        [a, b] => match (&a.incoming, &b.incoming) {
            (Incoming::Split { shrink: x }, Incoming::Split { shrink: y }) => {
                let n = node.graph.vertex_count();
                if x.set.complement(n) != y.set {
                    issue(node.id, "split children do not shrink complementary sets".into());
                }
            }
            _ => issue(node.id, "two children must both be split sides".into()),
        },
        _ => issue(node.id, format!("{} children", kids.len())),
    }
    if node.children.is_empty() != node.leaf.is_some() {
        issue(node.id, "leaf plan present exactly on leaves".into());
    }
}

fn side_conditions(tree: &DecompTree, node: &DecompNode, c: Criterion) -> Result<(), String> {
    let (n_ref, phi_ref) = tree.reference_of(node);
    let n_ref = n_ref as u64;
    let p = node.graph.vertex_count() as u64;
    let phi = node.phi;
    let ok = match c {
        Criterion::OneA | Criterion::TwoA => {
            p as usize <= tree.config.terminal_order || node.graph.max_degree() <= 2
        }
        Criterion::OneB | Criterion::TwoB => 3 * p <= 2 * n_ref && 2 * phi >= p,
        Criterion::TwoC => p <= phi_ref && 3 * p <= n_ref,
        Criterion::TwoD => 9 * phi <= 2 * n_ref && 2 * phi <= phi_ref,
        Criterion::OneC => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "{c} side conditions fail: n(H) = {p}, φ(H) = {phi}, n(G) = {n_ref}, φ(G) = {phi_ref}"
        ))
    }
}
