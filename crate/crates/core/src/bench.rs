//! Work-unit sweeps: how total work responds to graph size, accuracy, and an empty demand.

use std::fmt::Write;

use crate::error::BenchError;
use crate::flow::{KSource, SourceFunction};
use crate::generate::{generate_demand, generate_graph, DemandSpec, GraphKind};
use crate::single::{solve_single_with, SolveConfig};
use crate::stats::{ResultKind, RunStats};

/// Demand shape used by the size and accuracy sweeps.
pub const SWEEP_L0: usize = 20;
pub const SWEEP_L1: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub iterations: usize,
    pub total_work: u64,
    pub work_scale: f64,
    pub max_active_volume: usize,
    pub result: Option<ResultKind>,
}

impl SweepRow {
    fn from_stats(stats: &RunStats) -> Self {
        Self {
            n: stats.n,
            m: stats.m,
            eps: stats.eps,
            iterations: stats.planned_iterations,
            total_work: stats.total_work,
            work_scale: stats.work_scale(),
            max_active_volume: stats.max_active_volume,
            result: stats.result_kind,
        }
    }
}

fn run(
    kind: GraphKind,
    demand: Option<&DemandSpec>,
    eps: f64,
    seed: u64,
) -> Result<SweepRow, BenchError> {
    let g = generate_graph(kind, seed)?;
    let b = match demand {
        Some(spec) => generate_demand(&g, spec, seed)?,
        None => KSource::single(SourceFunction::new()),
    };
    let (_, stats) = solve_single_with(&g, b.commodity(0), &SolveConfig::new(eps))?;
    Ok(SweepRow::from_stats(&stats))
}

fn sweep_demand() -> DemandSpec {
    DemandSpec::RandomBalanced {
        l0: SWEEP_L0,
        l1: SWEEP_L1,
        k: 1,
    }
}

/// Fixed demand on random 4-regular graphs with `m` edges each (`n = m/2`).
pub fn size_sweep(edge_counts: &[usize], eps: f64, seed: u64) -> Result<Vec<SweepRow>, BenchError> {
    let spec = sweep_demand();
    edge_counts
        .iter()
        .map(|&m| {
            run(
                GraphKind::RandomRegular { n: m / 2, d: 4 },
                Some(&spec),
                eps,
                seed,
            )
        })
        .collect()
}

/// Fixed graph and demand, varying `eps`.
pub fn accuracy_sweep(n: usize, epsilons: &[f64], seed: u64) -> Result<Vec<SweepRow>, BenchError> {
    let spec = sweep_demand();
    epsilons
        .iter()
        .map(|&eps| run(GraphKind::RandomRegular { n, d: 4 }, Some(&spec), eps, seed))
        .collect()
}

/// `b = 0`: one unit of work per round, whatever the graph.
pub fn empty_demand_sweep(
    sizes: &[usize],
    eps: f64,
    seed: u64,
) -> Result<Vec<SweepRow>, BenchError> {
    sizes
        .iter()
        .map(|&n| run(GraphKind::RandomRegular { n, d: 4 }, None, eps, seed))
        .collect()
}

/// Least-squares slope of `ln(work)` against `ln(1/eps)`.
pub fn accuracy_slope(rows: &[SweepRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.total_work > 0)
        .map(|r| ((1.0 / r.eps).ln(), (r.total_work as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn format_table(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>9} {:>9} {:>6} {:>7} {:>12} {:>14} {:>8} {:>8}",
        "n", "m", "eps", "T", "work", "work/scale", "max_vol", "result"
    );
    for r in rows {
        let ratio = if r.work_scale > 0.0 {
            format!("{:.4}", r.total_work as f64 / r.work_scale)
        } else {
            "-".into()
        };
        let result = match r.result {
            Some(ResultKind::Flow) => "flow",
            Some(ResultKind::CutCertificate) => "cut",
            Some(ResultKind::PotentialCertificate) => "phi",
            None => "-",
        };
        let _ = writeln!(
            out,
            "{:>9} {:>9} {:>6} {:>7} {:>12} {:>14} {:>8} {:>8}",
            r.n, r.m, r.eps, r.iterations, r.total_work, ratio, r.max_active_volume, result
        );
    }
    out
}
