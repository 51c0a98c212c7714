//! First stage: 1-factor removal and splitting while every vertex but one
//! keeps degree `Δ*`.

use crate::graph::{Multigraph, ShrinkResult, VertexSet};
use crate::invariants::{max_excess_in, SubsetTable};
use crate::matching::{perfect_matching, PerfectMatchingOutcome};

use super::{
    check_nontrivial, low_vertices, mask_of, set_of, split_pair, Action, Criterion, Ctx, Draft, Incoming, Phase,
};

fn table(ctx: &Ctx, g: &Multigraph) -> Result<SubsetTable, super::Violation> {
    SubsetTable::new(g).map_err(|e| ctx.fail("enumeration", e.to_string()))
}

fn remove_factor(ctx: &Ctx, g: &Multigraph, check: &str) -> Result<(Multigraph, Incoming), super::Violation> {
    let outcome = perfect_matching(g).map_err(|e| ctx.fail(check, e.to_string()))?;
    match outcome {
        PerfectMatchingOutcome::Found(m) => {
            let child = g.remove_edges(&m.edge_ids).expect("matching edges belong to the graph");
            Ok((
                child,
                Incoming::MatchingRemoved {
                    edges: m.edge_ids,
                    unmatched: Vec::new(),
                },
            ))
        }
        PerfectMatchingOutcome::Blocked(cert) => Err(ctx.fail(
            check,
            format!("no 1-factor; Tutte set {} leaves too many odd components", cert.blocker),
        )),
    }
}

/// The root and every cost-free descendant: an `r`-graph.
pub(super) fn entry_regular(ctx: &Ctx) -> Result<Action, super::Violation> {
    let g = &ctx.node.graph;
    let r = ctx.node.d;
    ctx.ensure(g.degrees().iter().all(|&x| x as u64 == r), "r-graph regularity", || {
        format!("degrees {:?} are not all {r}", g.degrees())
    })?;
    let t = table(ctx, g)?;
    ctx.ensure(t.phi() == r, "r-graph", || format!("φ = {} but r = {r}", t.phi()))?;
    if ctx.small(g) {
        return Ok(Action::Halt(Criterion::OneA, small_note(g)));
    }
    let (child, incoming) = remove_factor(ctx, g, "1-factor of an r-graph")?;
    let child_phi = table(ctx, &child)?.phi();
    if child_phi + 1 == r {
        let note = format!("remove 1-factor; φ drops to {child_phi}, new reference");
        return Ok(Action::Children(
            vec![Draft {
                graph: child,
                incoming,
                phase: Phase::EntryRegular,
                stage: 1,
                special: None,
                new_reference: true,
            }],
            note,
        ));
    }
    ctx.ensure(child_phi == r, "φ after 1-factor removal", || {
        format!("φ(G-F) = {child_phi}, expected {} or {r}", r - 1)
    })?;
    Ok(Action::Children(
        vec![Draft {
            graph: child,
            incoming,
            phase: Phase::EntryOverfull,
            stage: 1,
            special: None,
            new_reference: false,
        }],
        format!("remove 1-factor; φ stays {r} (cost 1)"),
    ))
}

/// `G - F`: `(Δ-1)`-regular with an overfull set; split on maximum excess.
pub(super) fn entry_overfull(ctx: &Ctx) -> Result<Action, super::Violation> {
    let g = &ctx.node.graph;
    let k = ctx.node.d;
    ctx.ensure(g.degrees().iter().all(|&x| x as u64 == k), "regularity after 1-factor removal", || {
        format!("degrees {:?} are not all {k}", g.degrees())
    })?;
    if ctx.small(g) {
        return Ok(Action::Halt(Criterion::OneA, small_note(g)));
    }
    let t = table(ctx, g)?;
    let s = max_excess_in(&t, t.full_mask(), k, true)
        .ok_or_else(|| ctx.fail("overfull set after 1-factor removal", "none found"))?;
    check_nontrivial(ctx, s, "maximum-excess split")?;
    let set = set_of(s);
    let shrinks = split_pair(g, &set).map_err(|e| ctx.fail("split", e.to_string()))?;
    let drafts = shrinks
        .into_iter()
        .map(|sr| {
            let sv = sr.s_vertex;
            ctx.ensure(sr.shrunk.max_degree() as u64 <= k, "maximum-excess split degree", || {
                format!("Δ of child exceeds {k}")
            })?;
            Ok(Draft {
                graph: sr.shrunk.clone(),
                incoming: Incoming::Split { shrink: sr },
                phase: Phase::Stage1 { s: sv },
                stage: 1,
                special: Some(sv),
                new_reference: false,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Action::Children(
        drafts,
        format!("split on maximum-excess {k}-overfull {set}"),
    ))
}

fn small_note(g: &Multigraph) -> String {
    if g.max_degree() <= 2 {
        format!("Δ = {} ≤ 2", g.max_degree())
    } else {
        format!("order {} is terminal", g.vertex_count())
    }
}

/// Checks properties (i)-(iii) for special vertex `s` at degree `k`.
fn check_properties(ctx: &Ctx, t: &SubsetTable, s: usize, k: u64) -> Result<(), super::Violation> {
    let p = t.order();
    ctx.ensure(s < p, "special vertex", || format!("s = {s} outside order {p}"))?;
    ctx.ensure(
        (0..p).all(|v| if v == s { t.degree(v) <= k } else { t.degree(v) == k }),
        "property (i)",
        || format!("degrees {:?} with s = {s}, Δ* = {k}", (0..p).map(|v| t.degree(v)).collect::<Vec<_>>()),
    )?;
    check_ii_iii(ctx, t, k)
}

fn check_ii_iii(ctx: &Ctx, t: &SubsetTable, k: u64) -> Result<(), super::Violation> {
    let phi = t.phi();
    ctx.ensure(phi <= k + 1, "property (ii)", || format!("φ = {phi} > Δ* + 1 = {}", k + 1))?;
    let n = ctx.ref_n as i64;
    let bad = t.first_where(t.full_mask(), |m| {
        let ex = t.excess(m, k);
        ex > 0 && 2 * ex > n - m.count_ones() as i64 - 1
    });
    ctx.ensure(bad.is_none(), "property (iii)", || {
        let m = bad.unwrap_or(0);
        format!("{} has excess {} beyond (n(G) - |R| - 1)/2", set_of(m), t.excess(m, k))
    })
}

/// One step on a node satisfying (i)-(iii) with special vertex `s`.
pub(super) fn step(ctx: &Ctx, s: usize) -> Result<Action, super::Violation> {
    let g = &ctx.node.graph;
    let k = ctx.node.d;
    let t = table(ctx, g)?;
    check_properties(ctx, &t, s, k)?;
    let p = t.order();
    if ctx.small(g) {
        return Ok(Action::Halt(Criterion::OneA, small_note(g)));
    }
    let full = t.full_mask();
    let rest = full & !mask_of(s);
    let deg_s = t.degree(s);
    let ex_rest = t.excess(rest, k);
    ctx.ensure(2 * ex_rest == k as i64 - deg_s as i64, "Claim 2", || {
        format!("ex(H-s) = {ex_rest} but (Δ* - deg s)/2 = {}", (k as i64 - deg_s as i64) / 2)
    })?;
    if 4 * ex_rest >= p as i64 {
        postcheck_1b(ctx, p, g.max_degree() as u64)?;
        return Ok(Action::Halt(
            Criterion::OneB,
            format!("ex(H-s, {k}) = {ex_rest} ≥ n(H)/4"),
        ));
    }
    if deg_s == 0 {
        ctx.ensure(3 * g.max_degree() <= ctx.ref_n, "1C postcondition", || {
            format!("Δ = {} > n(G)/3 = {}/3", g.max_degree(), ctx.ref_n)
        })?;
        return Ok(Action::Handoff(format!("vertex {s} has degree 0; second stage with d = {k}")));
    }
    let sl_rest = t.slack(rest, k);
    let case_b = t
        .min_slack_where(rest, k, |m| t.excess(m, k) > 0)
        .filter(|&(_, sl)| sl < sl_rest);
    match case_b {
        None => case_a(ctx, &t, s, k, rest),
        Some(_) => case_b_split(ctx, &t, s, k),
    }
}

fn case_a(ctx: &Ctx, t: &SubsetTable, s: usize, k: u64, rest: u64) -> Result<Action, super::Violation> {
    let g = &ctx.node.graph;
    let p = t.order();
    let small = t.first_where(rest, |m| t.excess(m, k) > 0 && 2 * (m.count_ones() as usize) < p);
    ctx.ensure(small.is_none(), "Claim 3", || {
        format!("overfull {} has fewer than p/2 vertices", set_of(small.unwrap_or(0)))
    })?;
    let (child, incoming) = remove_factor(ctx, g, "Claim 5")?;
    let child_phi = table(ctx, &child)?.phi();
    ctx.ensure(child_phi <= k, "Claim 7", || format!("φ(H-F) = {child_phi} > Δ* = {k}"))?;
    Ok(Action::Children(
        vec![Draft {
            graph: child,
            incoming,
            phase: Phase::Stage1 { s },
            stage: 1,
            special: Some(s),
            new_reference: false,
        }],
        format!("case A: remove 1-factor, Δ* → {}", k - 1),
    ))
}

fn case_b_split(ctx: &Ctx, t: &SubsetTable, s: usize, k: u64) -> Result<Action, super::Violation> {
    let g = &ctx.node.graph;
    let (r, sl) = t
        .min_slack_where(t.full_mask(), k, |m| t.excess(m, k) > 0)
        .expect("case B has an overfull set");
    check_nontrivial(ctx, r, "case B split")?;
    let set = set_of(r);
    let shrinks = split_pair(g, &set).map_err(|e| ctx.fail("split", e.to_string()))?;
    let mut drafts = Vec::with_capacity(2);
    for sr in shrinks {
        drafts.push(classify_stage1_child(ctx, sr, s, k)?);
    }
    Ok(Action::Children(
        drafts,
        format!("case B: split on minimum-slack overfull {set} (slack {sl})"),
    ))
}

/// Child of a first-stage split: at most two vertices below `k`.
fn classify_stage1_child(ctx: &Ctx, sr: ShrinkResult, old_s: usize, k: u64) -> Result<Draft, super::Violation> {
    let g = &sr.shrunk;
    ctx.ensure(g.max_degree() as u64 <= k, "Lemma H degree", || {
        format!("child Δ = {} exceeds Δ* = {k}", g.max_degree())
    })?;
    let low = low_vertices(g, k);
    let mapped = sr.host_to_shrunk[old_s];
    let sv = sr.s_vertex;
    let phase = match low.len() {
        0 => Phase::Stage1 { s: sv },
        1 => Phase::Stage1 { s: low[0] },
        2 => {
            if low.contains(&mapped) && low.contains(&sv) && mapped != sv {
                Phase::Augment { a: mapped, b: sv }
            } else {
                Phase::Augment { a: low[0], b: low[1] }
            }
        }
        _ => {
            return Err(ctx.fail(
                "split child degrees",
                format!("{} vertices below Δ* = {k} after splitting", low.len()),
            ))
        }
    };
    let special = match &phase {
        Phase::Stage1 { s } => Some(*s),
        Phase::Augment { a, .. } => Some(*a),
        _ => None,
    };
    Ok(Draft {
        graph: g.clone(),
        incoming: Incoming::Split { shrink: sr },
        phase,
        stage: 1,
        special,
        new_reference: false,
    })
}

/// Adds `a b` edges until one endpoint reaches `k` or a set through both
/// becomes `(k+1)`-full.
pub(super) fn augment(ctx: &Ctx, a: usize, b: usize) -> Result<Action, super::Violation> {
    let g = &ctx.node.graph;
    let k = ctx.node.d;
    let p = g.vertex_count();
    let deg = g.degrees();
    ctx.ensure(
        (0..p).all(|v| if v == a || v == b { (deg[v] as u64) < k } else { deg[v] as u64 == k }),
        "augmentation degrees",
        || format!("degrees {deg:?} with low pair ({a}, {b}), Δ* = {k}"),
    )?;
    let both = mask_of(a) | mask_of(b);
    let mut cur = g.clone();
    let mut added = Vec::new();
    let saturated = loop {
        let t = table(ctx, &cur)?;
        check_ii_iii(ctx, &t, k)?;
        let degs = (t.degree(a), t.degree(b));
        if degs.0 == k || degs.1 == k {
            break None;
        }
        let w = t.first_where(t.full_mask(), |m| {
            m & both == both && 2 * t.edges(m) == (k + 1) * (m.count_ones() as u64 - 1)
        });
        if w.is_some() {
            break w;
        }
        let (next, ids) = cur.add_edges(&[(a, b)]).expect("a and b are distinct vertices");
        cur = next;
        added.extend(ids);
    };
    match saturated {
        None => {
            let s = if cur.degree(a).unwrap() as u64 == k { b } else { a };
            Ok(Action::Children(
                vec![Draft {
                    graph: cur,
                    incoming: Incoming::VirtualEdges { edges: added.clone() },
                    phase: Phase::Stage1 { s },
                    stage: 1,
                    special: Some(s),
                    new_reference: false,
                }],
                format!("add {} edge(s) {a}-{b} until a degree reaches {k}", added.len()),
            ))
        }
        Some(w) if !added.is_empty() => Ok(Action::Children(
            vec![Draft {
                graph: cur,
                incoming: Incoming::VirtualEdges { edges: added.clone() },
                phase: Phase::SplitW { w: set_of(w) },
                stage: 1,
                special: Some(a),
                new_reference: false,
            }],
            format!("add {} edge(s) {a}-{b} until {} is {}-full", added.len(), set_of(w), k + 1),
        )),
        Some(w) => split_w(ctx, &set_of(w)),
    }
}

/// Splits on a `(Δ*+1)`-full `W`; the `W^c` side is expected to halt as `1B`.
pub(super) fn split_w(ctx: &Ctx, w: &VertexSet) -> Result<Action, super::Violation> {
    let g = &ctx.node.graph;
    check_nontrivial(ctx, w.mask(), "W split")?;
    let [keep, leaf] = split_pair(g, w).map_err(|e| ctx.fail("split", e.to_string()))?;
    let sv = keep.s_vertex;
    let drafts = vec![
        Draft {
            graph: keep.shrunk.clone(),
            incoming: Incoming::Split { shrink: keep },
            phase: Phase::Stage1 { s: sv },
            stage: 1,
            special: Some(sv),
            new_reference: false,
        },
        Draft {
            graph: leaf.shrunk.clone(),
            incoming: Incoming::Split { shrink: leaf },
            phase: Phase::Forced1B,
            stage: 1,
            special: None,
            new_reference: false,
        },
    ];
    Ok(Action::Children(drafts, format!("split on saturated {w}")))
}

/// The `W^c` side of a saturated split.
pub(super) fn forced_1b(ctx: &Ctx) -> Result<Action, super::Violation> {
    let g = &ctx.node.graph;
    if ctx.small(g) {
        return Ok(Action::Halt(Criterion::OneA, small_note(g)));
    }
    let p = g.vertex_count();
    let phi = ctx.node.phi;
    ctx.ensure(phi <= ctx.node.d + 1, "saturated-side cost", || {
        format!("φ = {phi} > Δ* + 1 = {}", ctx.node.d + 1)
    })?;
    ctx.ensure(3 * p <= 2 * ctx.ref_n, "1B postcondition (a)", || {
        format!("n(H) = {p} > 2n(G)/3 with n(G) = {}", ctx.ref_n)
    })?;
    ctx.ensure(2 * phi >= p as u64, "1B postcondition (b)", || {
        format!("φ(H) = {phi} < n(H)/2 = {p}/2")
    })?;
    Ok(Action::Halt(Criterion::OneB, "saturated side of a W split".into()))
}

/// `n(H) <= 2n(G)/3` and `Δ(H) >= n(H)/2` on a `1B` leaf.
fn postcheck_1b(ctx: &Ctx, p: usize, delta: u64) -> Result<(), super::Violation> {
    ctx.ensure(3 * p <= 2 * ctx.ref_n, "1B postcondition (a)", || {
        format!("n(H) = {p} > 2n(G)/3 with n(G) = {}", ctx.ref_n)
    })?;
    ctx.ensure(2 * delta >= p as u64, "1B postcondition (b)", || {
        format!("Δ(H) = {delta} < n(H)/2 = {p}/2")
    })
}

/// The `1B` side conditions of a leaf against a reference order: `n(H) <=
/// 2n(G)/3` and `φ(H) >= n(H)/2`.
pub fn stage1_postcheck_1b(h: &Multigraph, ref_n: usize) -> Result<bool, crate::invariants::InvariantError> {
    let p = h.vertex_count();
    let phi = crate::invariants::phi(h)?;
    Ok(3 * p <= 2 * ref_n && 2 * phi >= p as u64)
}
