//! Work accounting and runtime audits of the locality invariants.
//!
//! A work unit is one adjacency-entry scan or one weight update, plus one unit
//! of loop overhead per round. In audit mode each round is also checked
//! against three inequalities:
//!
//! * active entries carry cumulative residual of magnitude at least `ln(n)/α`
//!   on the side of their potential;
//! * `Σ_v |r^{≤i}_{v,j}|·deg(v) ≤ i·‖b_j‖₁` for every commodity;
//! * `vol(A_j) ≤ T·‖b_j‖₁·α / ln n` for every commodity.

use serde::Serialize;

use crate::graph::Vertex;

/// Relative slack for the floating-point audit comparisons.
const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    PhiHelper,
    RHelper,
    ActiveVolume,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub iteration: usize,
    pub vertex: Option<Vertex>,
    pub commodity: usize,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResultKind {
    Flow,
    CutCertificate,
    PotentialCertificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `Σ_j vol(A_j)` at the start of the round.
    pub active_volume: usize,
    /// Vertex/commodity pairs whose weights were updated.
    pub touched: usize,
    /// Adjacency entries scanned.
    pub scanned: usize,
    pub work: u64,
}

/// Read access a solver state grants the auditor.
pub trait Auditable {
    fn vertex_count(&self) -> usize;
    fn alpha(&self) -> f64;
    fn planned_iterations(&self) -> usize;
    /// Rounds whose weight update has been applied.
    fn completed_iterations(&self) -> usize;
    fn commodity_count(&self) -> usize;
    fn commodity_l1(&self, j: usize) -> f64;
    fn degree(&self, v: Vertex) -> usize;
    /// Calls `visit(v, j, φ̃_{v,j})` for every nonzero rounded potential.
    fn for_each_potential(&self, visit: &mut dyn FnMut(Vertex, usize, f64));
    fn cumulative_residual(&self, v: Vertex, j: usize) -> f64;
    /// `(v, j, r^{≤i}_{v,j})` for every materialized cumulative residual.
    fn cumulative_residuals(&self) -> Vec<(Vertex, usize, f64)>;
    /// `Σ_v |r^{≤i}_{v,j}|·deg(v)`, maintained as the residuals change.
    fn residual_mass(&self, j: usize) -> f64;
    fn active_volume(&self, j: usize) -> usize;
}

#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub eps: f64,
    pub alpha: f64,
    pub planned_iterations: usize,
    pub iterations_run: usize,
    pub b_l0: usize,
    pub b_l1: f64,
    pub total_work: u64,
    pub max_active_volume: usize,
    pub result_kind: Option<ResultKind>,
    pub certificate_volume: Option<usize>,
    pub violations: Vec<Violation>,
    pub series: Vec<IterationRecord>,
    #[serde(skip)]
    audit: bool,
    #[serde(skip)]
    keep_series: bool,
}

/// Machine-readable totals of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub eps: f64,
    pub alpha: f64,
    pub iterations: usize,
    pub iterations_run: usize,
    pub b_l0: usize,
    pub b_l1: f64,
    pub total_work: u64,
    pub work_scale: f64,
    pub fitted_constant: Option<f64>,
    pub max_active_volume: usize,
    pub active_volume_bound: f64,
    pub result_kind: Option<ResultKind>,
    pub certificate_volume: Option<usize>,
    pub violations: usize,
    pub audit: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<IterationRecord>,
}

impl RunStats {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        m: usize,
        k: usize,
        eps: f64,
        alpha: f64,
        iterations: usize,
        b_l0: usize,
        b_l1: f64,
    ) -> Self {
        Self {
            n,
            m,
            k,
            eps,
            alpha,
            planned_iterations: iterations,
            iterations_run: 0,
            b_l0,
            b_l1,
            total_work: 0,
            max_active_volume: 0,
            result_kind: None,
            certificate_volume: None,
            violations: Vec::new(),
            series: Vec::new(),
            audit: false,
            keep_series: false,
        }
    }

    pub fn with_audit(mut self, audit: bool) -> Self {
        self.audit = audit;
        self
    }

    pub fn with_series(mut self, keep: bool) -> Self {
        self.keep_series = keep;
        self
    }

    pub fn audit_enabled(&self) -> bool {
        self.audit
    }

    fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// `T·l1·α / ln n`; infinite when `n < 2`.
    pub fn volume_bound_for(&self, l1: f64) -> f64 {
        let ln_n = self.ln_n();
        if ln_n <= 0.0 {
            return f64::INFINITY;
        }
        self.planned_iterations as f64 * l1 * self.alpha / ln_n
    }

    /// `T·‖b‖₁·α / ln n`.
    pub fn volume_bound(&self) -> f64 {
        self.volume_bound_for(self.b_l1)
    }

    /// `T·‖b‖₀ + T²·‖b‖₁·α / ln n`.
    pub fn work_scale(&self) -> f64 {
        let t = self.planned_iterations as f64;
        let bound = self.volume_bound();
        let quadratic = if bound.is_finite() { t * bound } else { 0.0 };
        t * self.b_l0 as f64 + quadratic
    }

    /// Smallest `C` with `total_work ≤ C · work_scale`.
    pub fn fitted_constant(&self) -> Option<f64> {
        let scale = self.work_scale();
        (scale > 0.0).then(|| self.total_work as f64 / scale)
    }

    pub fn record_certificate(&mut self, kind: ResultKind, volume: Option<usize>) {
        self.result_kind = Some(kind);
        self.certificate_volume = volume;
    }

    pub fn report(&self) -> Summary {
        Summary {
            n: self.n,
            m: self.m,
            k: self.k,
            eps: self.eps,
            alpha: self.alpha,
            iterations: self.planned_iterations,
            iterations_run: self.iterations_run,
            b_l0: self.b_l0,
            b_l1: self.b_l1,
            total_work: self.total_work,
            work_scale: self.work_scale(),
            fitted_constant: self.fitted_constant(),
            max_active_volume: self.max_active_volume,
            active_volume_bound: self.volume_bound(),
            result_kind: self.result_kind,
            certificate_volume: self.certificate_volume,
            violations: self.violations.len(),
            audit: self.audit,
            series: self.series.clone(),
        }
    }
}

/// Records one round and, in audit mode, checks the state after its weight update.
///
/// The state is inspected after round `i` has been applied, so its active
/// entries are those of round `i + 1` and its cumulative residuals are
/// `r^{≤i}`. The first violation found is stored and returned.
pub fn audit_iteration<S: Auditable>(
    state: &S,
    stats: &mut RunStats,
    record: IterationRecord,
) -> Option<Violation> {
    stats.iterations_run = stats.iterations_run.max(record.iteration);
    stats.total_work += record.work;
    stats.max_active_volume = stats.max_active_volume.max(record.active_volume);
    if stats.keep_series {
        stats.series.push(record);
    }
    if !stats.audit {
        return None;
    }
    let violation = check_invariants(state, stats);
    if let Some(v) = &violation {
        stats.violations.push(v.clone());
    }
    violation
}

fn check_invariants<S: Auditable>(state: &S, stats: &RunStats) -> Option<Violation> {
    let iteration = state.completed_iterations();
    let n = state.vertex_count();
    let ln_n = (n as f64).ln();
    let alpha = state.alpha();

    if n >= 2 {
        let floor = ln_n / alpha;
        let mut found = None;
        state.for_each_potential(&mut |v, j, phi| {
            let signed = phi.signum() * state.cumulative_residual(v, j);
            if found.is_none() && signed < floor * (1.0 - AUDIT_TOL) - AUDIT_TOL {
                found = Some(Violation {
                    kind: ViolationKind::PhiHelper,
                    iteration,
                    vertex: Some(v),
                    commodity: j,
                    measured: signed,
                    bound: floor,
                });
            }
        });
        if found.is_some() {
            return found;
        }
    }

    let k = state.commodity_count();
    for j in 0..k {
        let measured = state.residual_mass(j);
        let bound = iteration as f64 * state.commodity_l1(j);
        if measured > bound * (1.0 + AUDIT_TOL) + AUDIT_TOL {
            return Some(Violation {
                kind: ViolationKind::RHelper,
                iteration,
                vertex: None,
                commodity: j,
                measured,
                bound,
            });
        }
    }

    for j in 0..k {
        let bound = stats.volume_bound_for(state.commodity_l1(j));
        let measured = state.active_volume(j) as f64;
        if measured > bound * (1.0 + AUDIT_TOL) {
            return Some(Violation {
                kind: ViolationKind::ActiveVolume,
                iteration,
                vertex: None,
                commodity: j,
                measured,
                bound,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_reports_zero_totals() {
        let stats = RunStats::new(4, 3, 1, 0.2, 0.04, 100, 0, 0.0);
        let s = stats.report();
        assert_eq!(s.total_work, 0);
        assert_eq!(s.iterations_run, 0);
        assert_eq!(s.max_active_volume, 0);
        assert_eq!(s.fitted_constant, None);
        assert_eq!(s.violations, 0);
    }

    #[test]
    fn bounds_follow_the_closed_forms() {
        let stats = RunStats::new(100, 200, 1, 0.2, 0.04, 1000, 4, 2.0);
        let ln = 100f64.ln();
        assert!((stats.volume_bound() - 1000.0 * 2.0 * 0.04 / ln).abs() < 1e-12);
        assert!((stats.work_scale() - (4000.0 + 1000.0 * 1000.0 * 2.0 * 0.04 / ln)).abs() < 1e-6);
        let single = RunStats::new(1, 0, 1, 0.2, 0.04, 10, 1, 1.0);
        assert!(single.volume_bound().is_infinite());
    }
}
