//! Text formats: multigraphs, colorings and decomposition traces.
//!
//! Multigraphs use a DIMACS-like layout with 1-based vertices:
//!
//! ```text
//! # comment
//! p mgraph 3 3
//! e 1 2 2
//! e 2 3
//! e 1 3
//! ```
//!
//! `m` counts `e` lines; the optional third field is a multiplicity.
//! Colorings are `s colors k` followed by `c <edge id> <color>` lines.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::EdgeColoring;
use crate::graph::{EdgeId, GraphError, Multigraph};
use crate::reduction::DecompTree;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing problem line")]
    MissingHeader,
    #[error("header announces {expected} edge lines, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| syntax(line, format!("bad {what} `{tok}`")))
}

pub fn parse_multigraph(text: &str) -> Result<Multigraph, FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut pairs = Vec::new();
    let mut lines = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("p") => {
                if header.is_some() {
                    return Err(syntax(line, "second problem line"));
                }
                if toks.next() != Some("mgraph") {
                    return Err(syntax(line, "expected `p mgraph n m`"));
                }
                let n = field(toks.next(), line, "vertex count")?;
                let m = field(toks.next(), line, "edge line count")?;
                header = Some((n, m));
            }
            Some("e") => {
                let (n, _) = header.ok_or(FormatError::MissingHeader)?;
                let u: usize = field(toks.next(), line, "endpoint")?;
                let v: usize = field(toks.next(), line, "endpoint")?;
                let mult: usize = match toks.next() {
                    Some(t) => field(Some(t), line, "multiplicity")?,
                    None => 1,
                };
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(syntax(line, format!("vertex out of range 1..={n}")));
                }
                if u == v {
                    return Err(syntax(line, "loops are not allowed"));
                }
                pairs.extend(std::iter::repeat_n((u - 1, v - 1), mult));
                lines += 1;
            }
            Some(other) => return Err(syntax(line, format!("unknown line type `{other}`"))),
            None => {}
        }
        if toks.next().is_some() {
            return Err(syntax(line, "trailing fields"));
        }
    }
    let (n, m) = header.ok_or(FormatError::MissingHeader)?;
    if m != lines {
        return Err(FormatError::EdgeCount {
            expected: m,
            found: lines,
        });
    }
    Ok(Multigraph::from_pairs(n, &pairs)?)
}

/// Runs of equal consecutive endpoint pairs become one line with a multiplicity.
pub fn emit_multigraph(g: &Multigraph) -> String {
    let mut runs: Vec<((usize, usize), usize)> = Vec::new();
    for e in g.edges() {
        match runs.last_mut() {
            Some((pair, k)) if *pair == (e.u, e.v) => *k += 1,
            _ => runs.push(((e.u, e.v), 1)),
        }
    }
    let mut out = format!("p mgraph {} {}\n", g.vertex_count(), runs.len());
    for ((u, v), k) in runs {
        if k == 1 {
            let _ = writeln!(out, "e {} {}", u + 1, v + 1);
        } else {
            let _ = writeln!(out, "e {} {} {k}", u + 1, v + 1);
        }
    }
    out
}

pub fn emit_coloring(c: &EdgeColoring) -> String {
    let mut out = format!("s colors {}\n", c.colors_used());
    for (e, col) in c.iter() {
        let _ = writeln!(out, "c {} {col}", e.0);
    }
    out
}

pub fn parse_coloring(text: &str) -> Result<EdgeColoring, FormatError> {
    let mut c = EdgeColoring::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut toks = content.split_whitespace();
        match toks.next() {
            None | Some("s") => continue,
            Some("c") => {
                let id: u32 = field(toks.next(), line, "edge id")?;
                let col: u32 = field(toks.next(), line, "color")?;
                if c.get(EdgeId(id)).is_some() {
                    return Err(syntax(line, format!("edge {id} colored twice")));
                }
                c.set(EdgeId(id), col);
            }
            Some(other) => return Err(syntax(line, format!("unknown line type `{other}`"))),
        }
        if toks.next().is_some() {
            return Err(syntax(line, "trailing fields"));
        }
    }
    Ok(c)
}

pub const TRACE_SCHEMA: &str = "multicolor-trace/1";

/// First line of a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: String,
    pub root_r: u64,
    pub input_n: usize,
    pub input_edges: usize,
    pub nodes: usize,
    pub origin: Option<crate::reduction::Origin>,
}

/// One line per node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub incoming: String,
    pub stage: u8,
    pub n: usize,
    pub e: usize,
    pub delta: usize,
    pub phi: u64,
    pub mr: u64,
    pub d: u64,
    pub cost: i64,
    pub reference: usize,
    /// Vertices of the parent shrunk to form this node, for split sides.
    pub shrunk_set: Option<Vec<usize>>,
    /// Matching removed to form this node.
    pub matching: Option<Vec<u32>>,
    pub virtual_edges: Vec<u32>,
    pub criterion: Option<String>,
    pub leaf: Option<String>,
    pub steps: Vec<String>,
    pub violation: Option<String>,
    /// Nested tree of a leaf reduced on its own.
    pub subtree: Option<Vec<TraceRecord>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

fn records(tree: &DecompTree) -> Vec<TraceRecord> {
    use crate::reduction::{Incoming, LeafPlan};
    tree.nodes
        .iter()
        .map(|n| TraceRecord {
            id: n.id,
            parent: n.parent,
            children: n.children.clone(),
            incoming: n.incoming.kind().to_string(),
            stage: n.stage,
            n: n.graph.vertex_count(),
            e: n.graph.edge_count(),
            delta: n.graph.max_degree(),
            phi: n.phi,
            mr: n.mr,
            d: n.d,
            cost: n.cost(tree.root_r),
            reference: n.reference,
            shrunk_set: match &n.incoming {
                Incoming::Split { shrink } => Some(shrink.set.members().to_vec()),
                _ => None,
            },
            matching: match &n.incoming {
                Incoming::MatchingRemoved { edges, .. } => Some(edges.iter().map(|e| e.0).collect()),
                _ => None,
            },
            virtual_edges: n.virtual_edges.iter().map(|e| e.0).collect(),
            criterion: n.criterion.map(|c| c.to_string()),
            leaf: n.leaf.as_ref().map(|l| {
                match l {
                    LeafPlan::Terminal => "terminal",
                    LeafPlan::Oracle => "oracle",
                    LeafPlan::Subtree(_) => "subtree",
                    LeafPlan::Fallback => "fallback",
                }
                .to_string()
            }),
            steps: n.steps.clone(),
            violation: n.violation.as_ref().map(|v| format!("{}: {}", v.check, v.detail)),
            subtree: match &n.leaf {
                Some(LeafPlan::Subtree(t)) => Some(records(t)),
                _ => None,
            },
        })
        .collect()
}

pub fn trace_of(tree: &DecompTree) -> Trace {
    Trace {
        header: TraceHeader {
            schema: TRACE_SCHEMA.to_string(),
            root_r: tree.root_r,
            input_n: tree.input_n,
            input_edges: tree.input_edges.len(),
            nodes: tree.nodes.len(),
            origin: tree.origin,
        },
        records: records(tree),
    }
}

/// JSON lines: the header, then one record per node.
pub fn emit_trace(tree: &DecompTree) -> String {
    let t = trace_of(tree);
    let mut out = serde_json::to_string(&t.header).expect("serializable") + "\n";
    for r in &t.records {
        out += &serde_json::to_string(r).expect("serializable");
        out.push('\n');
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Trace, FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(FormatError::MissingHeader)?;
    let header: TraceHeader = serde_json::from_str(first)?;
    if header.schema != TRACE_SCHEMA {
        return Err(syntax(1, format!("unknown schema `{}`", header.schema)));
    }
    let records = lines
        .map(|(_, l)| serde_json::from_str(l))
        .collect::<Result<Vec<TraceRecord>, _>>()?;
    Ok(Trace { header, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn graph_round_trip() {
        for g in [fat_triangle(3), petersen(), fig2()] {
            let text = emit_multigraph(&g);
            let back = parse_multigraph(&text).unwrap();
            assert_eq!(back.vertex_count(), g.vertex_count());
            assert_eq!(back.multiplicity_matrix(), g.multiplicity_matrix());
        }
    }

    #[test]
    fn multiplicity_and_comments() {
        let g = parse_multigraph("# fat triangle\np mgraph 3 3\ne 1 2 2\ne 2 3 2 # two\n\ne 1 3 2\n").unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.max_degree(), 4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_multigraph("e 1 2\n"), Err(FormatError::MissingHeader)));
        assert!(parse_multigraph("p mgraph 2 1\ne 1 1\n").is_err());
        assert!(parse_multigraph("p mgraph 2 1\ne 1 3\n").is_err());
        assert!(matches!(
            parse_multigraph("p mgraph 2 2\ne 1 2\n"),
            Err(FormatError::EdgeCount { expected: 2, found: 1 })
        ));
        assert!(parse_multigraph("p mgraph 2 1\ne 1 2 x\n").is_err());
        assert!(parse_multigraph("p graph 2 1\ne 1 2\n").is_err());
    }

    #[test]
    fn coloring_round_trip() {
        let mut c = EdgeColoring::default();
        c.set(EdgeId(0), 1);
        c.set(EdgeId(4), 0);
        let back = parse_coloring(&emit_coloring(&c)).unwrap();
        assert_eq!(back, c);
        assert!(parse_coloring("c 1 0\nc 1 2\n").is_err());
    }
}
