use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use localflow::bench::{
    accuracy_slope, accuracy_sweep, empty_demand_sweep, format_table, size_sweep,
};
use localflow::generate::{generate_demand, generate_graph, DemandSpec, GraphKind};
use localflow::io::{
    format_demand, format_graph, read_demand, read_graph, verify_artifact, Artifact,
};
use localflow::{solve_multi_with, solve_single_with, RunStats, SolveConfig};

const EXIT_FLOW: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_CERTIFICATE: u8 = 2;
const EXIT_REJECTED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "localflow",
    version,
    about = "Local flow solver with infeasibility certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Route a demand or certify that it cannot be routed.
    ///
    /// Exits 0 with a flow, 2 with a certificate, 1 on bad input.
    Solve {
        graph: PathBuf,
        demand: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Expected number of commodities; checked against the demand file.
        #[arg(long)]
        k: Option<usize>,
        /// Use the k-commodity solver even when k = 1.
        #[arg(long)]
        multi: bool,
        /// Check the locality invariants every round.
        #[arg(long)]
        audit: bool,
        /// Artifact path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write run statistics as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Check a flow or certificate artifact. Exits 0 if it holds, 3 if not.
    Verify {
        graph: PathBuf,
        demand: PathBuf,
        artifact: PathBuf,
        /// Residual tolerance for flows; defaults to the artifact's own.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Generate a graph and optionally a demand.
    Gen {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        /// Edge count for random-gnm.
        #[arg(long)]
        edges: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Graph path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `pairs s t d [s t d ...]` or `random-balanced l0 l1`.
        #[arg(long)]
        demand: Option<String>,
        /// Commodities for random-balanced demands.
        #[arg(long, default_value_t = 1)]
        commodities: usize,
        /// Demand path; stdout when absent.
        #[arg(long)]
        demand_out: Option<PathBuf>,
    },
    /// Print work-unit tables for the scaling sweeps.
    Bench {
        #[arg(value_enum, default_value_t = Sweep::All)]
        sweep: Sweep,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Largest edge count in the size sweep.
        #[arg(long, default_value_t = 2_000_000)]
        max_m: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Path,
    Grid,
    RandomRegular,
    RandomGnm,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Sweep {
    Size,
    Eps,
    Zero,
    All,
}

type Failure = Box<dyn std::error::Error>;

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn required(name: &str, value: Option<usize>) -> Result<usize, Failure> {
    value.ok_or_else(|| format!("--{name} is required for this graph kind").into())
}

fn report_stats(stats: &RunStats, path: Option<&Path>) -> Result<(), Failure> {
    for v in &stats.violations {
        eprintln!(
            "audit: {:?} at iteration {} (commodity {}, vertex {:?}): {} vs bound {}",
            v.kind,
            v.iteration,
            v.commodity + 1,
            v.vertex,
            v.measured,
            v.bound
        );
    }
    if let Some(p) = path {
        fs::write(p, serde_json::to_string_pretty(&stats.report())? + "\n")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    graph: &Path,
    demand: &Path,
    eps: f64,
    k: Option<usize>,
    multi: bool,
    audit: bool,
    out: Option<&Path>,
    stats_path: Option<&Path>,
) -> Result<u8, Failure> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(format!("--eps must lie in (0, 1), got {eps}").into());
    }
    let g = read_graph(graph)?;
    let b = read_demand(demand, g.vertex_count())?;
    if let Some(k) = k {
        if k != b.k() {
            return Err(format!("--k {k} disagrees with the demand file's k = {}", b.k()).into());
        }
    }
    let mut config = SolveConfig::new(eps);
    config.audit = audit;
    let (artifact, stats) = if b.k() == 1 && !multi {
        let (result, stats) = solve_single_with(&g, b.commodity(0), &config)?;
        (Artifact::from_single(&g, &result, eps), stats)
    } else {
        let (result, stats) = solve_multi_with(&g, &b, &config)?;
        (Artifact::from_multi(&g, &result, eps), stats)
    };
    emit(out, &artifact.to_json())?;
    report_stats(&stats, stats_path)?;
    match &artifact {
        Artifact::Flow {
            iterations,
            residual,
            ..
        } => {
            eprintln!(
                "flow after {iterations} rounds; max |residual|/deg = {}",
                residual.max_relative
            );
            Ok(EXIT_FLOW)
        }
        Artifact::CutCertificate {
            set,
            b_of_s,
            boundary,
            ..
        } => {
            eprintln!(
                "infeasible: |b(S)| = {} > {boundary} = cut(S) for |S| = {}",
                b_of_s.abs(),
                set.len()
            );
            Ok(EXIT_CERTIFICATE)
        }
        Artifact::PotentialCertificate { lhs, rhs, .. } => {
            eprintln!("infeasible: potential certificate {lhs} > {rhs}");
            Ok(EXIT_CERTIFICATE)
        }
    }
}

fn verify(graph: &Path, demand: &Path, artifact: &Path, eps: Option<f64>) -> Result<u8, Failure> {
    let g = read_graph(graph)?;
    let b = read_demand(demand, g.vertex_count())?;
    let a = Artifact::read(artifact)?;
    let report = verify_artifact(&g, &b, &a, eps);
    if report.ok {
        eprintln!("ok");
        return Ok(EXIT_FLOW);
    }
    for v in &report.violations {
        eprintln!(
            "{:?} at {}: {} vs bound {}",
            v.kind, v.location, v.measured, v.bound
        );
    }
    Ok(EXIT_REJECTED)
}

fn bench(sweep: Sweep, seed: u64, max_m: usize) -> Result<u8, Failure> {
    if matches!(sweep, Sweep::Size | Sweep::All) {
        let ms: Vec<usize> = [2_000, 20_000, 200_000, 2_000_000]
            .into_iter()
            .filter(|&m| m <= max_m)
            .collect();
        let rows = size_sweep(&ms, 0.2, seed)?;
        println!("size sweep: random 4-regular, |supp b| = 20, |b|_1 = 10, eps = 0.2");
        print!("{}", format_table(&rows));
        let (lo, hi) = rows.iter().fold((u64::MAX, 0), |(lo, hi), r| {
            (lo.min(r.total_work), hi.max(r.total_work))
        });
        if !rows.is_empty() {
            println!("max/min work = {:.3}\n", hi as f64 / lo.max(1) as f64);
        }
    }
    if matches!(sweep, Sweep::Eps | Sweep::All) {
        let rows = accuracy_sweep(2_000, &[0.4, 0.2, 0.1, 0.05], seed)?;
        println!("accuracy sweep: random 4-regular n = 2000, |supp b| = 20, |b|_1 = 10");
        print!("{}", format_table(&rows));
        if let Some(s) = accuracy_slope(&rows) {
            println!("log-log slope of work against 1/eps = {s:.3}\n");
        }
    }
    if matches!(sweep, Sweep::Zero | Sweep::All) {
        let rows = empty_demand_sweep(&[1_000, 10_000, 100_000], 0.2, seed)?;
        println!("empty demand: work should equal T");
        print!("{}", format_table(&rows));
    }
    Ok(EXIT_FLOW)
}

#[allow(clippy::too_many_arguments)]
fn generate(
    kind: Kind,
    n: Option<usize>,
    rows: Option<usize>,
    cols: Option<usize>,
    degree: usize,
    edges: Option<usize>,
    seed: u64,
    out: Option<&Path>,
    demand: Option<&str>,
    commodities: usize,
    demand_out: Option<&Path>,
) -> Result<u8, Failure> {
    let kind = match kind {
        Kind::Path => GraphKind::Path {
            n: required("n", n)?,
        },
        Kind::Grid => GraphKind::Grid {
            rows: required("rows", rows)?,
            cols: required("cols", cols)?,
        },
        Kind::RandomRegular => GraphKind::RandomRegular {
            n: required("n", n)?,
            d: degree,
        },
        Kind::RandomGnm => GraphKind::RandomGnm {
            n: required("n", n)?,
            m: required("edges", edges)?,
        },
    };
    let g = generate_graph(kind, seed)?;
    let b = demand
        .map(|spec| generate_demand(&g, &DemandSpec::parse(spec, commodities)?, seed))
        .transpose()?;
    emit(out, &format_graph(&g))?;
    if let Some(b) = b {
        emit(demand_out, &format_demand(&b))?;
    }
    Ok(EXIT_FLOW)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_FLOW
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Solve {
            graph,
            demand,
            eps,
            k,
            multi,
            audit,
            out,
            stats,
        } => solve(
            &graph,
            &demand,
            eps,
            k,
            multi,
            audit,
            out.as_deref(),
            stats.as_deref(),
        ),
        Command::Verify {
            graph,
            demand,
            artifact,
            eps,
        } => verify(&graph, &demand, &artifact, eps),
        Command::Gen {
            kind,
            n,
            rows,
            cols,
            degree,
            edges,
            seed,
            out,
            demand,
            commodities,
            demand_out,
        } => generate(
            kind,
            n,
            rows,
            cols,
            degree,
            edges,
            seed,
            out.as_deref(),
            demand.as_deref(),
            commodities,
            demand_out.as_deref(),
        ),
        Command::Bench { sweep, seed, max_m } => bench(sweep, seed, max_m),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
