//! Second stage: degrees in `{d, d+1}` apart from a special vertex `s`;
//! near 1-factors may be removed.

use crate::graph::{Multigraph, ShrinkResult};
use crate::invariants::{slack_dominance_witness, SubsetTable};
use crate::matching::{near_perfect_matching, perfect_matching, PerfectMatchingOutcome};

use super::{check_nontrivial, low_vertices, mask_of, set_of, split_pair, Action, Criterion, Ctx, Draft, Incoming, Phase, Violation};

/// Vertices of degree `d + 1`.
pub(crate) fn type_one_count(g: &Multigraph, d: u64) -> usize {
    g.degrees().iter().filter(|&&x| x as u64 == d + 1).count()
}

/// First second-stage criterion met, in the order 2A, 2B, 2C, 2D.
pub(crate) fn stage2_criterion(
    p: usize,
    delta: u64,
    phi: u64,
    cost: i64,
    ref_n: usize,
    ref_phi: u64,
    terminal_order: usize,
) -> Option<Criterion> {
    let (p64, n64) = (p as u64, ref_n as u64);
    if (p <= terminal_order || delta <= 2) && cost <= 1 {
        Some(Criterion::TwoA)
    } else if 3 * p64 <= 2 * n64 && 2 * phi >= p64 && cost <= 1 {
        Some(Criterion::TwoB)
    } else if p64 <= ref_phi && 3 * p64 <= n64 && cost <= 2 {
        Some(Criterion::TwoC)
    } else if 9 * phi <= 2 * n64 && 2 * phi <= ref_phi && cost <= 1 {
        Some(Criterion::TwoD)
    } else {
        None
    }
}

fn choose_special(deg: &[usize], hint: Option<usize>) -> usize {
    let min = deg.iter().copied().min().unwrap_or(0);
    match hint {
        Some(h) if h < deg.len() && deg[h] == min => h,
        _ => deg.iter().position(|&x| x == min).unwrap_or(0),
    }
}

fn child_hint(sr: &ShrinkResult, s: usize) -> usize {
    sr.host_to_shrunk[s]
}

struct Node<'a> {
    ctx: &'a Ctx<'a>,
    g: &'a Multigraph,
    t: SubsetTable,
    d: u64,
    s: usize,
    r1: usize,
}

pub(super) fn step(ctx: &Ctx, hint: Option<usize>, expect_halt: bool) -> Result<Action, Violation> {
    let g = &ctx.node.graph;
    let d = ctx.node.d;
    let p = g.vertex_count();
    let t = SubsetTable::new(g).map_err(|e| ctx.fail("enumeration", e.to_string()))?;
    let deg = g.degrees();
    let phi = t.phi();
    let s = choose_special(&deg, hint);
    let cost = ctx.node.cost(ctx.root_r);
    let delta = g.max_degree() as u64;
    if let Some(c) = stage2_criterion(p, delta, phi, cost, ctx.ref_n, ctx.ref_phi, ctx.config.terminal_order) {
        return Ok(Action::Halt(c, format!("n = {p}, φ = {phi}, cost = {cost}")));
    }
    ctx.ensure(!expect_halt, "Observation B", || {
        "split side with a new degree-(d+1) vertex is not terminal".to_string()
    })?;
    ctx.ensure(delta <= d + 1, "degree profile", || format!("Δ = {delta} > d + 1 = {}", d + 1))?;
    ctx.ensure(phi <= d + 2, "Observation A", || format!("φ = {phi} > d + 2 = {}", d + 2))?;
    let r1 = type_one_count(g, d);
    if phi <= d + 1 {
        ctx.ensure(r1 as u64 <= d, "Observation C", || {
            format!("{r1} vertices of degree d + 1 exceed d = {d}")
        })?;
    }
    let rest = t.full_mask() & !mask_of(s);
    ctx.ensure(2 * t.edges(rest) <= (d + 1) * (p as u64 - 2), "Observation D", || {
        format!("t(H - s) = {} > d + 1", t.t_value(rest))
    })?;
    let node = Node { ctx, g, t, d, s, r1 };
    if phi > d + 1 {
        return node.splitting_lemma_1();
    }
    if let Some(action) = node.splitting_lemma_2()? {
        return Ok(action);
    }
    let low = low_vertices(g, d);
    if low.len() >= 2 {
        return node.add_edge(&low);
    }
    ctx.ensure(p >= 4 && d >= 2, "lemma hypotheses p ≥ 4, d ≥ 2", || format!("p = {p}, d = {d}"))?;
    match slack_dominance_witness(&node.t, s, d) {
        None => node.matching_lemma(),
        Some((r, sl)) => node.splitting_lemma_3(r, sl),
    }
}

impl Node<'_> {
    fn split_drafts(&self, mask: u64, lemma: &str, phi_cap: u64) -> Result<Vec<(Draft, usize)>, Violation> {
        let ctx = self.ctx;
        check_nontrivial(ctx, mask, lemma)?;
        let shrinks = split_pair(self.g, &set_of(mask)).map_err(|e| ctx.fail("split", e.to_string()))?;
        let mut out = Vec::with_capacity(2);
        for sr in shrinks {
            let h = &sr.shrunk;
            let phi = SubsetTable::new(h).map_err(|e| ctx.fail("enumeration", e.to_string()))?.phi();
            ctx.ensure(h.max_degree() as u64 <= self.d + 1, lemma, || {
                format!("child Δ = {} > d + 1", h.max_degree())
            })?;
            ctx.ensure(phi <= phi_cap, lemma, || format!("child φ = {phi} > {phi_cap}"))?;
            let ones = type_one_count(h, self.d);
            let hint = child_hint(&sr, self.s);
            out.push((
                Draft {
                    graph: h.clone(),
                    incoming: Incoming::Split { shrink: sr },
                    phase: Phase::Stage2 {
                        hint: Some(hint),
                        expect_halt: false,
                    },
                    stage: 2,
                    special: Some(hint),
                    new_reference: false,
                },
                ones,
            ));
        }
        Ok(out)
    }

    fn check_type_one(&self, drafts: Vec<(Draft, usize)>, lemma: &str) -> Result<Vec<Draft>, Violation> {
        drafts
            .into_iter()
            .map(|(draft, ones)| {
                self.ctx.ensure(ones <= self.r1, lemma, || {
                    format!("child has {ones} vertices of degree d + 1, parent {}", self.r1)
                })?;
                Ok(draft)
            })
            .collect()
    }

    fn splitting_lemma_1(&self) -> Result<Action, Violation> {
        let (t, d) = (&self.t, self.d);
        let (mask, sl) = t
            .min_slack_where(t.full_mask(), d + 1, |m| t.excess(m, d + 1) > 0)
            .ok_or_else(|| self.ctx.fail("Splitting Lemma 1", "φ > d + 1 without an overfull set"))?;
        let drafts = self.split_drafts(mask, "Splitting Lemma 1", d + 2)?;
        let drafts = self.check_type_one(drafts, "Splitting Lemma 1")?;
        Ok(Action::Children(
            drafts,
            format!("step 1: split on minimum-slack {}-overfull {} (slack {sl})", d + 1, set_of(mask)),
        ))
    }

    fn full_set(&self, t: &SubsetTable, extra: impl Fn(u64) -> bool) -> Option<u64> {
        let p = t.order() as u64;
        let k = self.d + 1;
        t.first_where(t.full_mask(), |m| {
            let c = m.count_ones() as u64;
            c + 1 < p && 2 * t.edges(m) == k * (c - 1) && extra(m)
        })
    }

    fn splitting_lemma_2(&self) -> Result<Option<Action>, Violation> {
        let Some(mask) = self.full_set(&self.t, |_| true) else {
            return Ok(None);
        };
        let d = self.d;
        let drafts = self.split_drafts(mask, "Splitting Lemma 2", d + 1)?;
        let mut out = Vec::with_capacity(2);
        for (mut draft, ones) in drafts {
            if ones > self.r1 {
                let all_high = draft.graph.degrees().iter().all(|&x| x as u64 == d + 1);
                self.ctx.ensure(ones == self.r1 + 1 && all_high, "Splitting Lemma 2", || {
                    format!("child has {ones} vertices of degree d + 1, parent {}", self.r1)
                })?;
                if let Phase::Stage2 { expect_halt, .. } = &mut draft.phase {
                    *expect_halt = true;
                }
            }
            out.push(draft);
        }
        Ok(Some(Action::Children(
            out,
            format!("step 2: split on {}-full {}", d + 1, set_of(mask)),
        )))
    }

    fn add_edge(&self, low: &[usize]) -> Result<Action, Violation> {
        let s = if low.contains(&self.s) { self.s } else { low[0] };
        let w = *low.iter().find(|&&v| v != s).expect("two low vertices");
        let (h, ids) = self.g.add_edges(&[(s, w)]).expect("distinct vertices");
        let phi = SubsetTable::new(&h)
            .map_err(|e| self.ctx.fail("enumeration", e.to_string()))?
            .phi();
        self.ctx.ensure(phi <= self.d + 1, "step 3 edge addition", || {
            format!("adding {s}-{w} raises φ to {phi} > d + 1")
        })?;
        Ok(Action::Children(
            vec![Draft {
                graph: h,
                incoming: Incoming::VirtualEdges { edges: ids },
                phase: Phase::Stage2 {
                    hint: Some(s),
                    expect_halt: false,
                },
                stage: 2,
                special: Some(s),
                new_reference: false,
            }],
            format!("step 3: add edge {s}-{w}"),
        ))
    }

    fn matching_lemma(&self) -> Result<Action, Violation> {
        let (ctx, g, t, d, s) = (self.ctx, self.g, &self.t, self.d, self.s);
        let p = t.order();
        let deg = g.degrees();
        ctx.ensure(self.r1 as u64 <= d, "Matching Lemma", || format!("{} vertices of degree d + 1", self.r1))?;
        ctx.ensure((0..p).any(|v| v != s && deg[v] as u64 == d), "Matching Lemma", || {
            "no vertex other than s has degree d".to_string()
        })?;
        let rest = t.full_mask() & !mask_of(s);
        let ex = t.excess(rest, d);
        ctx.ensure(4 * ex < p as i64, "Matching Lemma", || format!("ex(H - s, d) = {ex} ≥ p/4"))?;
        let (edges, unmatched, what) = if deg[s] > 0 {
            match perfect_matching(g).map_err(|e| ctx.fail("Matching Lemma", e.to_string()))? {
                PerfectMatchingOutcome::Found(m) => (m.edge_ids, Vec::new(), "perfect matching".to_string()),
                PerfectMatchingOutcome::Blocked(cert) => {
                    return Err(ctx.fail(
                        "Matching Lemma",
                        format!("no perfect matching; Tutte set {}", cert.blocker),
                    ))
                }
            }
        } else {
            let (m, v) = near_perfect_matching(g, s, d as usize).map_err(|e| ctx.fail("Matching Lemma", e.to_string()))?;
            (m.edge_ids, vec![s, v], format!("near-perfect matching missing {s} and {v}"))
        };
        let child = g.remove_edges(&edges).expect("matching edges belong to the graph");
        let ones = type_one_count(&child, d - 1);
        ctx.ensure(ones <= self.r1 + 1, "Proposition 2(b)", || {
            format!("removal leaves {ones} vertices of maximum degree, parent had {}", self.r1)
        })?;
        Ok(Action::Children(
            vec![Draft {
                graph: child,
                incoming: Incoming::MatchingRemoved { edges, unmatched },
                phase: Phase::Stage2 {
                    hint: Some(s),
                    expect_halt: false,
                },
                stage: 2,
                special: Some(s),
                new_reference: false,
            }],
            format!("step 4: slack dominant, remove {what}, d → {}", d - 1),
        ))
    }

    fn splitting_lemma_3(&self, r: u64, sl: i64) -> Result<Action, Violation> {
        let (ctx, g, t, d) = (self.ctx, self.g, &self.t, self.d);
        let deg = g.degrees();
        let members: Vec<usize> = set_of(r).members().iter().copied().filter(|&v| deg[v] as u64 == d).collect();
        ctx.ensure(sl >= 1 && 2 * sl as usize <= members.len(), "Splitting Lemma 3 matching", || {
            format!("slack {sl} with {} degree-d vertices in {}", members.len(), set_of(r))
        })?;
        let pairs: Vec<(usize, usize)> = members.chunks(2).take(sl as usize).map(|c| (c[0], c[1])).collect();
        let mut found = None;
        for j in 1..=pairs.len() {
            let (h, _) = g.add_edges(&pairs[..j]).expect("distinct vertices");
            let tj = SubsetTable::new(&h).map_err(|e| ctx.fail("enumeration", e.to_string()))?;
            if self.full_set(&tj, |_| true).is_some() {
                let s = self.full_set(&tj, |m| t.coboundary(m) <= d);
                ctx.ensure(s.is_some(), "Splitting Lemma 3 coboundary", || {
                    format!("after {j} added edge(s) every {}-full set has coboundary above d", d + 1)
                })?;
                found = Some((s.unwrap(), j));
                break;
            }
        }
        let (mask, j) =
            found.ok_or_else(|| ctx.fail("Splitting Lemma 3", format!("no full set after adding all {sl} edges")))?;
        let drafts = self.split_drafts(mask, "Splitting Lemma 3", d + 1)?;
        let drafts = self.check_type_one(drafts, "Splitting Lemma 3")?;
        Ok(Action::Children(
            drafts,
            format!(
                "step 4: not slack dominant (witness {}, slack {sl}); {j} of {} edge(s) make {} full",
                set_of(r),
                pairs.len(),
                set_of(mask)
            ),
        ))
    }
}
