//! `multicolor`: color multigraph edges within `φ + log_{3/2} min(n'/3, φ)`.
//!
//! Exit status: 0 success, 1 a coloring or bound check failed, 2 bad input,
//! 3 a runtime state check inside the reduction failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multicolor::coloring::{self, DEFAULT_ORACLE_BUDGET, DEFAULT_ORACLE_EDGES};
use multicolor::corpus::{self, CorpusOptions};
use multicolor::format;
use multicolor::generate::Family;
use multicolor::invariants;
use multicolor::pipeline::{self, PipelineConfig, PipelineError};
use multicolor::reduction::{self, ReduceConfig, ReductionError};
use multicolor::Multigraph;

#[derive(Parser)]
#[command(name = "multicolor", version, about = "Edge coloring of multigraphs by reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Color a graph and certify the bound.
    Color {
        graph: PathBuf,
        /// Write the coloring here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the decomposition trace (JSON lines).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the certificate as JSON on stdout instead of the coloring.
        #[arg(long)]
        certify: bool,
        #[command(flatten)]
        reduce: ReduceArgs,
    },
    /// Run the second stage alone on a graph handed over with `n(G)` given.
    Stage2 {
        graph: PathBuf,
        /// Order of the graph the input was reduced from.
        #[arg(long)]
        origin_n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        reduce: ReduceArgs,
    },
    /// Exact chromatic index by branch and bound.
    Oracle {
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORACLE_EDGES)]
        max_edges: usize,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        budget: u64,
    },
    /// Check a coloring file against a graph and the bound.
    Verify { graph: PathBuf, coloring: PathBuf },
    /// Print Δ, Γ, the fractional chromatic index and φ.
    Invariants { graph: PathBuf },
    /// Generate an instance, e.g. `gen random 10 4 0.5 --seed 3`.
    Gen {
        #[arg(required = true, num_args = 1..)]
        family: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a corpus file (the built-in corpus when omitted) and emit CSV.
    Corpus {
        list: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Worker threads, 0 for all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[command(flatten)]
        reduce: ReduceArgs,
    },
}

#[derive(Args)]
struct ReduceArgs {
    /// Order at or below which a node halts as terminal (at most 8).
    #[arg(long, default_value_t = 8)]
    terminal_order: usize,
    /// Turn state violations into flagged leaves colored by fallback.
    #[arg(long)]
    fallback: bool,
}

impl ReduceArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            reduce: ReduceConfig {
                terminal_order: self.terminal_order,
                fallback: self.fallback,
                ..ReduceConfig::default()
            },
        }
    }
}

enum Failure {
    Check(String),
    Input(String),
    State(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Input(_) => 2,
            Failure::State(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<Multigraph, Failure> {
    format::parse_multigraph(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_color(graph: &Path, output: Option<&Path>, trace: Option<&Path>, certify: bool, args: &ReduceArgs) -> Outcome {
    let g = read_graph(graph)?;
    let out = pipeline::color(&g, &args.config()).map_err(|e| match e {
        e if e.is_state_violation() => Failure::State(e.to_string()),
        PipelineError::Reduction(ReductionError::InvalidInput(m)) => Failure::Input(m),
        PipelineError::Reduction(ReductionError::Invariant(e)) => input(e),
        e => Failure::Check(e.to_string()),
    })?;
    if let (Some(p), Some(tree)) = (trace, &out.tree) {
        fs::write(p, format::emit_trace(tree)).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    }
    let cert = &out.certificate;
    eprintln!(
        "n = {}, φ = {}, colors = {}, bound = {} ({:.4})",
        cert.n, cert.phi, cert.colors_used, cert.bound_floor, cert.bound_value
    );
    if certify {
        println!("{}", serde_json::to_string_pretty(cert).expect("serializable"));
        if let Some(p) = output {
            write_or_print(Some(p), &format::emit_coloring(&out.coloring))?;
        }
    } else {
        write_or_print(output, &format::emit_coloring(&out.coloring))?;
    }
    if let Some(report) = &out.report {
        let issues = report.all_issues();
        if !issues.is_empty() {
            for i in &issues {
                eprintln!("node {}: {}", i.node, i.message);
            }
            return Err(Failure::Check(format!("{} tree audit issue(s)", issues.len())));
        }
    }
    if !cert.satisfied {
        return Err(Failure::Check(format!(
            "{} colors exceed the bound {}",
            cert.colors_used, cert.bound_floor
        )));
    }
    Ok(())
}

fn run_stage2(graph: &Path, origin_n: usize, output: Option<&Path>, trace: Option<&Path>, args: &ReduceArgs) -> Outcome {
    let g = read_graph(graph)?;
    let tree = reduction::reduce_stage2(&g, origin_n, &args.config().reduce).map_err(|e| match e {
        ReductionError::StateViolation(_) => Failure::State(e.to_string()),
        ReductionError::InvalidInput(m) => Failure::Input(m),
        e => input(e),
    })?;
    if let Some(p) = trace {
        fs::write(p, format::emit_trace(&tree)).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    }
    for leaf in tree.leaves() {
        let tag = leaf.criterion.map_or("fallback".to_string(), |c| c.to_string());
        eprintln!(
            "leaf {}: {tag}, n = {}, φ = {}, cost = {}",
            leaf.id,
            leaf.graph.vertex_count(),
            leaf.phi,
            leaf.cost(tree.root_r)
        );
    }
    let c = coloring::reconstruct(&tree).map_err(|e| Failure::Check(e.to_string()))?;
    c.check_proper(&g).map_err(|e| Failure::Check(e.to_string()))?;
    write_or_print(output, &format::emit_coloring(&c))?;
    let issues = reduction::verify_tree(&tree).all_issues();
    for i in &issues {
        eprintln!("node {}: {}", i.node, i.message);
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} tree audit issue(s)", issues.len())))
    }
}

fn run_oracle(graph: &Path, max_edges: usize, budget: u64) -> Outcome {
    let g = read_graph(graph)?;
    let (x, c) = coloring::exact_chromatic_index_with(&g, max_edges, budget).map_err(input)?;
    println!("{x}");
    c.check_proper(&g).map_err(|e| Failure::Check(e.to_string()))
}

fn run_verify(graph: &Path, col: &Path) -> Outcome {
    let g = read_graph(graph)?;
    let c = format::parse_coloring(&read(col)?).map_err(|e| Failure::Input(format!("{}: {e}", col.display())))?;
    let cert = coloring::certify(&g, &c).map_err(|e| Failure::Check(e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&cert).expect("serializable"));
    if cert.satisfied {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} colors exceed the bound {}",
            cert.colors_used, cert.bound_floor
        )))
    }
}

fn run_invariants(graph: &Path) -> Outcome {
    let g = read_graph(graph)?;
    let r = invariants::report(&g).map_err(input)?;
    println!("n = {}", g.vertex_count());
    println!("e = {}", g.edge_count());
    println!("Δ = {}", r.delta);
    match (&r.gamma, &r.witness) {
        (Some(gm), Some(w)) => {
            let members: Vec<String> = w.members().iter().map(|v| (v + 1).to_string()).collect();
            println!("Γ = {gm} at {{{}}}", members.join(","))
        }
        _ => println!("Γ = none"),
    }
    println!("χ'_f = {}", r.chi_f);
    println!("φ = {}", r.phi);
    if g.vertex_count() >= 3 && r.phi > 0 {
        println!(
            "bound = {} ({:.4})",
            coloring::bound_floor(g.vertex_count(), r.phi),
            coloring::bound_value(g.vertex_count(), r.phi)
        );
    }
    Ok(())
}

fn run_gen(family: &[String], seed: u64, output: Option<&Path>) -> Outcome {
    let fam: Family = family.join(" ").parse().map_err(input)?;
    let g = fam.generate(seed).map_err(input)?;
    let mut text = if fam.is_random() {
        format!("# {fam} seed {seed}\n")
    } else {
        format!("# {fam}\n")
    };
    text += &format::emit_multigraph(&g);
    write_or_print(output, &text)
}

fn run_corpus(list: Option<&Path>, output: Option<&Path>, threads: usize, args: &ReduceArgs) -> Outcome {
    let instances = match list {
        Some(p) => corpus::parse_corpus(&read(p)?, p.parent()).map_err(input)?,
        None => corpus::default_instances(),
    };
    let opts = CorpusOptions {
        pipeline: args.config(),
        threads,
        ..CorpusOptions::default()
    };
    let rows = corpus::run_corpus(&instances, &opts);
    write_or_print(output, &corpus::to_csv(&rows))?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.passed()).collect();
    eprintln!("{} instance(s), {} failed", rows.len(), failed.len());
    if failed.is_empty() {
        return Ok(());
    }
    let state = failed
        .iter()
        .any(|r| r.failures.iter().any(|f| f.starts_with("state violation")));
    let msg = format!("{} instance(s) failed", failed.len());
    Err(if state { Failure::State(msg) } else { Failure::Check(msg) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Color {
            graph,
            output,
            trace,
            certify,
            reduce,
        } => run_color(graph, output.as_deref(), trace.as_deref(), *certify, reduce),
        Command::Stage2 {
            graph,
            origin_n,
            output,
            trace,
            reduce,
        } => run_stage2(graph, *origin_n, output.as_deref(), trace.as_deref(), reduce),
        Command::Oracle {
            graph,
            max_edges,
            budget,
        } => run_oracle(graph, *max_edges, *budget),
        Command::Verify { graph, coloring } => run_verify(graph, coloring),
        Command::Invariants { graph } => run_invariants(graph),
        Command::Gen { family, seed, output } => run_gen(family, *seed, output.as_deref()),
        Command::Corpus {
            list,
            output,
            threads,
            reduce,
        } => run_corpus(list.as_deref(), output.as_deref(), *threads, reduce),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Check(m) | Failure::Input(m) | Failure::State(m)) = &f;
            eprintln!("multicolor: {m}");
            ExitCode::from(f.code())
        }
    }
}
