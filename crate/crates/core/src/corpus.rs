//! Batch runs over instance lists, with a CSV summary.
//!
//! A corpus file has one entry per line (`#` starts a comment):
//!
//! ```text
//! fat-triangle 3                  # one instance
//! random 10 4 0.5 seed 7          # one instance with seed 7
//! random 10 4 0.5 seeds 0..50     # fifty instances
//! random-mix 3 14 4 seeds 0..500  # n in 3..=14, multiplicity cap in 1..=4, p in [0.15, 0.85)
//! file graphs/petersen.mgraph     # relative to the corpus file
//! ```

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{self, ColoringError, DEFAULT_ORACLE_BUDGET, DEFAULT_ORACLE_EDGES};
use crate::format::{self, FormatError};
use crate::generate::{Family, GenerateError};
use crate::graph::Multigraph;
use crate::invariants::{self, SubsetTable};
use crate::pipeline::{self, PipelineConfig};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("corpus line {line}: {source}")]
    Generate { line: usize, source: GenerateError },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: FormatError },
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub graph: Multigraph,
}

fn parse_range(tok: &str, line: usize) -> Result<(u64, u64), CorpusError> {
    let bad = || CorpusError::Line {
        line,
        message: format!("bad seed range `{tok}`, expected A..B"),
    };
    let (a, b) = tok.split_once("..").ok_or_else(bad)?;
    let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

pub fn parse_corpus(text: &str, base: Option<&Path>) -> Result<Vec<Instance>, CorpusError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks[0] == "file" {
            if toks.len() != 2 {
                return Err(CorpusError::Line {
                    line,
                    message: "expected `file PATH`".into(),
                });
            }
            let path = base.map_or_else(|| PathBuf::from(toks[1]), |b| b.join(toks[1]));
            let text = std::fs::read_to_string(&path).map_err(|source| CorpusError::File {
                path: path.clone(),
                source,
            })?;
            let graph = format::parse_multigraph(&text).map_err(|source| CorpusError::Parse {
                path: path.clone(),
                source,
            })?;
            out.push(Instance {
                name: format!("file {}", toks[1]),
                graph,
            });
            continue;
        }
        let (body, seeds) = match toks.iter().position(|&t| t == "seed" || t == "seeds") {
            Some(at) => {
                if at + 2 != toks.len() {
                    return Err(CorpusError::Line {
                        line,
                        message: format!("`{}` takes exactly one argument at the end", toks[at]),
                    });
                }
                let seeds = if toks[at] == "seed" {
                    let s: u64 = toks[at + 1].parse().map_err(|_| CorpusError::Line {
                        line,
                        message: format!("bad seed `{}`", toks[at + 1]),
                    })?;
                    (s, s + 1)
                } else {
                    parse_range(toks[at + 1], line)?
                };
                (&toks[..at], seeds)
            }
            None => (&toks[..], (0, 1)),
        };
        if body[0] == "random-mix" {
            let nums: Vec<usize> = body[1..]
                .iter()
                .map(|t| t.parse())
                .collect::<Result<_, _>>()
                .map_err(|_| CorpusError::Line {
                    line,
                    message: "random-mix takes NMIN NMAX MAXMULT".into(),
                })?;
            let [nmin, nmax, maxmult] = nums[..] else {
                return Err(CorpusError::Line {
                    line,
                    message: "random-mix takes NMIN NMAX MAXMULT".into(),
                });
            };
            if nmin > nmax || maxmult == 0 {
                return Err(CorpusError::Line {
                    line,
                    message: "random-mix needs NMIN <= NMAX and MAXMULT >= 1".into(),
                });
            }
            for seed in seeds.0..seeds.1 {
                let (family, sub) = mix_member(nmin, nmax, maxmult, seed);
                out.push(Instance {
                    name: format!("random-mix {nmin} {nmax} {maxmult} seed {seed} ({family})"),
                    graph: family.generate(sub).expect("random family always generates"),
                });
            }
            continue;
        }
        let family: Family = body.join(" ").parse().map_err(|source| CorpusError::Generate { line, source })?;
        for seed in seeds.0..seeds.1 {
            let graph = family.generate(seed).map_err(|source| CorpusError::Generate { line, source })?;
            let name = if family.is_random() {
                format!("{family} seed {seed}")
            } else {
                family.to_string()
            };
            out.push(Instance { name, graph });
        }
    }
    Ok(out)
}

/// Family and seed drawn for one `random-mix` member.
pub fn mix_member(nmin: usize, nmax: usize, maxmult: usize, seed: u64) -> (Family, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(nmin..=nmax);
    let maxmult = rng.gen_range(1..=maxmult);
    let p = (rng.gen_range(15..85) as f64) / 100.0;
    (Family::Random { n, maxmult, p }, rng.gen())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusOptions {
    pub pipeline: PipelineConfig,
    pub oracle_edges: usize,
    pub oracle_budget: u64,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
    /// Instance whose coloring is deliberately broken before checking.
    pub corrupt: Option<usize>,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            pipeline: PipelineConfig::default(),
            oracle_edges: DEFAULT_ORACLE_EDGES,
            oracle_budget: DEFAULT_ORACLE_BUDGET,
            threads: 0,
            corrupt: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub index: usize,
    pub name: String,
    pub n: usize,
    pub e: usize,
    pub delta: usize,
    /// `Γ` as a reduced fraction, empty when there is no odd subset.
    pub gamma: String,
    pub phi: u64,
    pub colors: usize,
    pub oracle: Option<u32>,
    pub bound_value: f64,
    pub bound: u64,
    /// Leaves relying on extra matching peels.
    pub peel_leaves: usize,
    pub failures: Vec<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CorpusRow {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn status(&self) -> String {
        if self.failures.is_empty() {
            "pass".into()
        } else {
            format!("fail: {}", self.failures.join("; "))
        }
    }
}

pub const CSV_HEADER: [&str; 11] = [
    "index", "name", "n", "e", "delta", "gamma", "phi", "colors", "oracle", "bound", "status",
];

/// Breaks a proper coloring: the second edge at the busiest vertex takes
/// the first one's color.
fn corrupt(g: &Multigraph, c: &mut coloring::EdgeColoring) {
    let Some(v) = (0..g.vertex_count()).max_by_key(|&v| g.degree(v).unwrap_or(0)) else {
        return;
    };
    let inc = g.incident(v);
    if inc.len() >= 2 {
        if let Some(col) = c.get(inc[0]) {
            c.set(inc[1], col);
        }
    }
}

pub fn run_instance(index: usize, inst: &Instance, opts: &CorpusOptions) -> CorpusRow {
    let start = Instant::now();
    let g = &inst.graph;
    let mut failures = Vec::new();
    let (gamma, phi) = match SubsetTable::new(g) {
        Ok(t) => (
            t.gamma().map(|(r, _)| r.to_string()).unwrap_or_default(),
            if g.edge_count() == 0 { 0 } else { t.phi() },
        ),
        Err(e) => {
            failures.push(e.to_string());
            (String::new(), 0)
        }
    };
    let mut row = CorpusRow {
        index,
        name: inst.name.clone(),
        n: g.vertex_count(),
        e: g.edge_count(),
        delta: g.max_degree(),
        gamma,
        phi,
        colors: 0,
        oracle: None,
        bound_value: 0.0,
        bound: 0,
        peel_leaves: 0,
        failures: Vec::new(),
        elapsed: Duration::ZERO,
    };
    match pipeline::color(g, &opts.pipeline) {
        Ok(out) => {
            let mut c = out.coloring;
            if opts.corrupt == Some(index) {
                corrupt(g, &mut c);
            }
            match coloring::certify(g, &c) {
                Ok(cert) => {
                    row.colors = cert.colors_used;
                    row.bound = cert.bound_floor;
                    row.bound_value = cert.bound_value;
                    if !cert.satisfied {
                        failures.push(format!("{} colors exceed the bound {}", cert.colors_used, cert.bound_floor));
                    }
                }
                Err(e) => failures.push(format!("improper coloring: {e}")),
            }
            if let Some(report) = out.report {
                row.peel_leaves = report.peel_reliant().len();
                for issue in report.all_issues() {
                    failures.push(format!("node {}: {}", issue.node, issue.message));
                }
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    match coloring::exact_chromatic_index_with(g, opts.oracle_edges, opts.oracle_budget) {
        Ok((x, _)) => {
            row.oracle = Some(x);
            if (x as u64) < phi || (row.colors > 0 && (x as usize) > row.colors) {
                failures.push(format!("oracle {x} outside [φ = {phi}, colors = {}]", row.colors));
            }
        }
        Err(ColoringError::OracleTooLarge { .. } | ColoringError::OracleBudget(_)) => {}
        Err(e) => failures.push(format!("oracle: {e}")),
    }
    if phi > 0 && (invariants::phi(g) != Ok(phi)) {
        failures.push("φ recomputation disagrees".into());
    }
    row.failures = failures;
    row.elapsed = start.elapsed();
    row
}

/// Runs every instance; rows come back in instance order.
pub fn run_corpus(instances: &[Instance], opts: &CorpusOptions) -> Vec<CorpusRow> {
    let threads = match opts.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(instances.len().max(1));
    let next = AtomicUsize::new(0);
    let rows = Mutex::new(vec![None; instances.len()]);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= instances.len() {
                    break;
                }
                let row = run_instance(i, &instances[i], opts);
                rows.lock().expect("no worker panicked")[i] = Some(row);
            });
        }
    });
    rows.into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every instance ran"))
        .collect()
}

pub fn to_csv(rows: &[CorpusRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.index.to_string(),
            r.name.clone(),
            r.n.to_string(),
            r.e.to_string(),
            r.delta.to_string(),
            r.gamma.clone(),
            r.phi.to_string(),
            r.colors.to_string(),
            r.oracle.map(|x| x.to_string()).unwrap_or_default(),
            r.bound.to_string(),
            r.status(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// The corpus shipped with the repository.
pub const DEFAULT_CORPUS: &str = include_str!("../../../data/default.corpus");

pub fn default_instances() -> Vec<Instance> {
    parse_corpus(DEFAULT_CORPUS, None).expect("default corpus is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_forms() {
        let v = parse_corpus("petersen\nrandom 6 2 0.5 seeds 3..6\nrandom 6 2 0.5 seed 3 # c\n", None).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v[1].name, "random 6 2 0.5 seed 3");
        assert_eq!(format::emit_multigraph(&v[1].graph), format::emit_multigraph(&v[4].graph));
        assert!(parse_corpus("random 6 2 0.5 seeds 5..3", None).is_err());
        assert!(parse_corpus("cube", None).is_err());
        assert!(parse_corpus("file", None).is_err());
        assert!(parse_corpus("", None).unwrap().is_empty());
    }

    #[test]
    fn empty_corpus_csv() {
        assert_eq!(to_csv(&[]), "index,name,n,e,delta,gamma,phi,colors,oracle,bound,status\n");
    }

    #[test]
    fn corruption_fails_the_row() {
        let inst = parse_corpus("petersen\nfig2", None).unwrap();
        let opts = CorpusOptions {
            corrupt: Some(1),
            ..CorpusOptions::default()
        };
        let rows = run_corpus(&inst, &opts);
        assert!(rows[0].passed(), "{:?}", rows[0].failures);
        assert!(!rows[1].passed());
        assert!(rows[1].status().starts_with("fail: improper"));
    }
}
