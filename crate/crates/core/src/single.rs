//! Local single-commodity solver.
//!
//! Each vertex carries two MWU weights `w_{v,+}`, `w_{v,−}`. A round rounds
//! weights below `n` to zero, forms potentials
//! `φ̃_v = (w̃_{v,+} − w̃_{v,−}) / deg(v)`, saturates every edge from the higher
//! to the lower potential, and either stops with a sweep cut proving
//! infeasibility or feeds the normalized excess `±r_v` back as gains.
//! Untouched vertices keep weight 1 and potential 0, so a round only visits
//! `supp(b)` and the edges around vertices with nonzero potential.

use std::collections::BTreeSet;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::error::SolveError;
use crate::flow::{residual, Flow, SourceFunction};
use crate::graph::{EdgeId, Graph, Vertex};
use crate::mwu::{round_weight, Index, Mwu, MwuParams};
use crate::stats::{audit_iteration, Auditable, IterationRecord, ResultKind, RunStats};
use crate::table::Table;
use crate::verify::verify_cut_certificate;

/// Relative slack on the termination test `⟨φ̃, b⟩ > ⟨φ̃, Bf⟩`.
///
/// Half of the MWU correlation slack: `|lhs| + |rhs| ≤ 2‖w̃‖₁`, so a round
/// that does not terminate always passes the engine's `⟨g, w̃⟩` check.
pub const TERMINATION_TOL: f64 = 5e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub eps: f64,
    /// Check the locality invariants after every round.
    pub audit: bool,
    /// Keep the per-round work series in the stats.
    pub series: bool,
}

impl SolveConfig {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            audit: false,
            series: false,
        }
    }

    pub fn audited(mut self) -> Self {
        self.audit = true;
        self
    }

    pub fn with_series(mut self) -> Self {
        self.series = true;
        self
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<(), SolveError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(SolveError::EpsOutOfRange(eps))
    }
}

/// A vertex set `S` with `|b(S)| > δS`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutCertificate {
    pub set: Vec<Vertex>,
    pub b_of_s: f64,
    pub boundary: usize,
    pub volume: usize,
}

/// The averaged flow `f̄ = (f¹ + ⋯ + f^T) / T` and what it leaves unrouted.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome {
    pub flow: Flow,
    /// `b − Bf̄`.
    pub residual: SourceFunction,
    /// `Σ_i f^i(e)` for every edge that ever carried flow, by ascending edge id.
    pub accumulated: Vec<(EdgeId, i64)>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SingleResult {
    Certificate(CutCertificate),
    Flow(FlowOutcome),
}

impl SingleResult {
    pub fn certificate(&self) -> Option<&CutCertificate> {
        match self {
            SingleResult::Certificate(c) => Some(c),
            SingleResult::Flow(_) => None,
        }
    }

    pub fn flow(&self) -> Option<&FlowOutcome> {
        match self {
            SingleResult::Flow(f) => Some(f),
            SingleResult::Certificate(_) => None,
        }
    }
}

/// One round's integral flow.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundFlow {
    /// `(edge, ±1, |φ̃_u − φ̃_v|)` in visiting order.
    entries: Vec<(EdgeId, i8, f64)>,
    scanned: usize,
}

impl RoundFlow {
    pub fn entries(&self) -> impl Iterator<Item = (EdgeId, i8)> + '_ {
        self.entries.iter().map(|&(e, s, _)| (e, s))
    }

    pub fn get(&self, e: EdgeId) -> i8 {
        self.entries.iter().find(|x| x.0 == e).map_or(0, |x| x.1)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Adjacency entries examined to build this flow.
    pub fn scanned(&self) -> usize {
        self.scanned
    }

    pub fn to_flow(&self) -> Flow {
        Flow::from_entries(self.entries.iter().map(|&(e, s, _)| (e, s as f64)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    /// `⟨φ̃, b⟩`.
    pub lhs: f64,
    /// `⟨φ̃, Bf⟩ = Σ_e |φ̃_u − φ̃_v|`.
    pub rhs: f64,
    pub fires: bool,
}

pub(crate) fn fires(lhs: f64, rhs: f64) -> bool {
    lhs > rhs + TERMINATION_TOL * (1.0 + lhs.abs() + rhs.abs())
}

/// Returns `S = {v}` for the first vertex (ascending) with `|b(v)| > deg(v)`.
pub fn precheck(g: &Graph, b: &SourceFunction) -> Option<CutCertificate> {
    b.sorted_entries().into_iter().find_map(|(v, x)| {
        let d = g.degree(v);
        (x.abs() > d as f64).then(|| CutCertificate {
            set: vec![v],
            b_of_s: x,
            boundary: d,
            volume: d,
        })
    })
}

#[inline]
fn weight_index(v: Vertex, positive: bool) -> Index {
    2 * v as Index + if positive { 0 } else { 1 }
}

/// `(v, j)` as a sort key ordering by vertex, then commodity. The low bit is
/// left free for [`endpoint_key`].
#[inline]
pub(crate) fn pair_key(v: Vertex, j: usize) -> u64 {
    (v as u64) << 32 | (j as u64) << 1
}

#[inline]
pub(crate) fn key_pair(key: u64) -> (Vertex, usize) {
    ((key >> 32) as Vertex, ((key & 0xffff_ffff) >> 1) as usize)
}

/// Key for a `±1` contribution to `(Bf_j)_v`.
#[inline]
pub(crate) fn endpoint_key(v: Vertex, j: usize, sign: i64) -> u64 {
    pair_key(v, j) | (sign < 0) as u64
}

/// Merges the sorted demand support with endpoint contributions into
/// `(key, b_j(v), (Bf_j)_v)` rows, one per touched pair, ascending by key.
pub(crate) fn coalesce(support: &[(u64, f64)], ends: &mut [u64], out: &mut Vec<(u64, f64, i64)>) {
    ends.sort_unstable();
    out.clear();
    let mut rest = support.iter().peekable();
    let mut e = 0;
    while e < ends.len() {
        let key = ends[e] & !1;
        while let Some(&&(k, x)) = rest.peek() {
            if k >= key {
                break;
            }
            out.push((k, x, 0));
            rest.next();
        }
        let mut bf = 0;
        while e < ends.len() && ends[e] & !1 == key {
            bf += if ends[e] & 1 == 0 { 1 } else { -1 };
            e += 1;
        }
        let x = match rest.peek() {
            Some(&&(k, x)) if k == key => {
                rest.next();
                x
            }
            _ => 0.0,
        };
        out.push((key, x, bf));
    }
    out.extend(rest.map(|&(k, x)| (k, x, 0)));
}

#[derive(Debug, Clone)]
pub struct SingleState<'g> {
    graph: &'g Graph,
    b: SourceFunction,
    /// `supp(b)` as `(pair_key(v, 0), b(v))`, ascending.
    support: Vec<(u64, f64)>,
    b_l1: f64,
    alpha: f64,
    threshold: f64,
    mwu: Mwu,
    cum_flow: FxHashMap<EdgeId, i64>,
    cum_residual: Table<f64>,
    residual_mass: f64,
    /// Nonzero rounded potentials.
    potential: Table<f64>,
    /// Keys of `potential`, ascending.
    active: BTreeSet<Vertex>,
    active_volume: usize,
    sweep_scans: usize,
    ends_buf: Vec<u64>,
    touched_buf: Vec<(u64, f64, i64)>,
    gain_buf: Vec<(Index, f64)>,
    weight_buf: Vec<f64>,
}

impl<'g> SingleState<'g> {
    /// `α = eps/5`, rounding threshold `n`, `|J| = 2n`, `T` from the MWU bound with slack `n`.
    pub fn new(graph: &'g Graph, b: &SourceFunction, eps: f64) -> Result<Self, SolveError> {
        check_eps(eps)?;
        b.check_finite()?;
        b.check_in_graph(graph)?;
        let n = graph.vertex_count();
        let alpha = eps / 5.0;
        let threshold = n as f64;
        let params = MwuParams::new(alpha, 2 * n as u64, threshold, threshold)?;
        Ok(Self {
            graph,
            b: b.clone(),
            support: b
                .sorted_entries()
                .into_iter()
                .map(|(v, x)| (pair_key(v, 0), x))
                .collect(),
            b_l1: b.l1(),
            alpha,
            threshold,
            mwu: Mwu::new(params),
            cum_flow: FxHashMap::default(),
            cum_residual: Table::for_range(n as u64),
            residual_mass: 0.0,
            potential: Table::for_range(n as u64),
            active: BTreeSet::new(),
            active_volume: 0,
            sweep_scans: 0,
            ends_buf: Vec::new(),
            touched_buf: Vec::new(),
            gain_buf: Vec::new(),
            weight_buf: Vec::new(),
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Planned number of rounds `T`.
    pub fn iterations(&self) -> usize {
        self.mwu.params().iterations
    }

    /// Rounds completed so far.
    pub fn iteration(&self) -> usize {
        self.mwu.rounds()
    }

    pub fn mwu(&self) -> &Mwu {
        &self.mwu
    }

    pub fn weight(&self, v: Vertex, positive: bool) -> f64 {
        self.mwu.ledger().get(weight_index(v, positive))
    }

    /// `φ̃_v = (w̃_{v,+} − w̃_{v,−}) / deg(v)`, read straight from the ledger.
    pub fn rounded_potential(&self, v: Vertex) -> f64 {
        self.potential_from(v, self.weight(v, true), self.weight(v, false))
    }

    #[inline]
    fn potential_from(&self, v: Vertex, plus: f64, minus: f64) -> f64 {
        let d = self.graph.degree(v);
        if d == 0 {
            return 0.0;
        }
        (round_weight(plus, self.threshold) - round_weight(minus, self.threshold)) / d as f64
    }

    /// Vertices with nonzero rounded potential, ascending.
    pub fn active_set(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.active.iter().map(|&v| (v, self.phi(v)))
    }

    #[inline]
    fn phi(&self, v: Vertex) -> f64 {
        self.potential.get(v as u64).copied().unwrap_or(0.0)
    }

    pub fn active_volume(&self) -> usize {
        self.active_volume
    }

    pub fn cumulative_residual(&self, v: Vertex) -> f64 {
        self.cum_residual.get(v as u64).copied().unwrap_or(0.0)
    }

    pub fn cumulative_flow(&self, e: EdgeId) -> i64 {
        self.cum_flow.get(&e).copied().unwrap_or(0)
    }

    fn refresh(&mut self, v: Vertex) {
        self.set_potential(v, self.rounded_potential(v));
    }

    fn set_potential(&mut self, v: Vertex, phi: f64) {
        let d = self.graph.degree(v);
        if phi != 0.0 {
            let (slot, fresh) = self.potential.get_or_insert_with(v as u64, || phi);
            *slot = phi;
            if fresh {
                self.active.insert(v);
                self.active_volume += d;
            }
        } else if self.potential.remove(v as u64).is_some() {
            self.active.remove(&v);
            self.active_volume -= d;
        }
    }

    /// Saturates every edge around the active set from higher to lower potential.
    ///
    /// Edges are visited once, from their smaller active endpoint, in
    /// ascending edge id within each adjacency list.
    pub fn flow_step(&self) -> RoundFlow {
        let mut out = RoundFlow::default();
        for (u, phi_u) in self.active_set() {
            for inc in self.graph.incident(u) {
                out.scanned += 1;
                let w = self.graph.opposite(inc.edge, u);
                let phi_w = self.phi(w);
                if phi_w != 0.0 && w < u {
                    continue;
                }
                if phi_u == phi_w {
                    continue;
                }
                let (tail, head) = if inc.sign > 0 {
                    (phi_u, phi_w)
                } else {
                    (phi_w, phi_u)
                };
                let sign = if tail > head { 1 } else { -1 };
                out.entries.push((inc.edge, sign, (phi_u - phi_w).abs()));
            }
        }
        out
    }

    /// Compares `⟨φ̃, b⟩` with `⟨φ̃, Bf⟩`.
    pub fn termination_check(&self, f: &RoundFlow) -> Termination {
        // Only the support of b contributes.
        let mut lhs = 0.0;
        for &(key, x) in &self.support {
            lhs += self.phi(key_pair(key).0) * x;
        }
        let mut rhs = 0.0;
        for &(_, _, gap) in &f.entries {
            rhs += gap;
        }
        Termination {
            lhs,
            rhs,
            fires: fires(lhs, rhs),
        }
    }

    fn sweep(&mut self, positive: bool) -> Option<CutCertificate> {
        let mut order: Vec<(Vertex, f64)> = self
            .active_set()
            .filter(|&(_, p)| if positive { p > 0.0 } else { p < 0.0 })
            .collect();
        if positive {
            order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        } else {
            order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        }
        let sign = if positive { 1.0 } else { -1.0 };
        let mut members: FxHashSet<Vertex> = FxHashSet::default();
        let mut b_of_s = 0.0;
        let mut boundary: i64 = 0;
        let mut volume = 0usize;
        for (idx, &(v, _)) in order.iter().enumerate() {
            let d = self.graph.degree(v);
            let mut inner = 0i64;
            for inc in self.graph.incident(v) {
                if members.contains(&self.graph.opposite(inc.edge, v)) {
                    inner += 1;
                }
            }
            self.sweep_scans += d;
            boundary += d as i64 - 2 * inner;
            b_of_s += self.b.get(v);
            volume += d;
            members.insert(v);
            if sign * b_of_s > boundary as f64 {
                let mut set: Vec<Vertex> = order[..=idx].iter().map(|x| x.0).collect();
                set.sort_unstable();
                if verify_cut_certificate(self.graph, &self.b, &set).ok {
                    return Some(CutCertificate {
                        set,
                        b_of_s,
                        boundary: boundary as usize,
                        volume,
                    });
                }
            }
        }
        None
    }

    /// Sweeps `V_{>x}` prefixes (decreasing φ̃), then `V_{<x}` prefixes (increasing φ̃).
    ///
    /// Returns the first prefix whose cut inequality survives independent
    /// recomputation.
    pub fn extract_certificate(&mut self) -> Result<CutCertificate, SolveError> {
        if let Some(c) = self.sweep(true) {
            return Ok(c);
        }
        self.sweep(false)
            .ok_or(SolveError::SweepFailed(self.iteration() + 1))
    }

    /// Applies steps 5–6 for this round: residual gains, weight update,
    /// cumulative bookkeeping, and active-set refresh. Returns the number of
    /// vertices touched.
    pub fn update_weights(&mut self, f: &RoundFlow) -> Result<usize, SolveError> {
        let mut ends = std::mem::take(&mut self.ends_buf);
        ends.clear();
        for &(e, s, _) in &f.entries {
            let (u, v) = self.graph.endpoints(e);
            ends.push(endpoint_key(u, 0, s as i64));
            ends.push(endpoint_key(v, 0, -(s as i64)));
        }
        let mut touched = std::mem::take(&mut self.touched_buf);
        coalesce(&self.support, &mut ends, &mut touched);

        let mut gains = std::mem::take(&mut self.gain_buf);
        gains.clear();
        for &(key, x, bf) in &touched {
            let v = key_pair(key).0;
            let r = (x - bf as f64) / self.graph.degree(v) as f64;
            gains.push((weight_index(v, true), r));
            gains.push((weight_index(v, false), -r));
        }
        let mut weights = std::mem::take(&mut self.weight_buf);
        weights.clear();
        self.mwu.apply_with(&gains, |_, w| weights.push(w))?;

        for (i, &(key, _, _)) in touched.iter().enumerate() {
            let v = key_pair(key).0;
            let r = gains[2 * i].1;
            let d = self.graph.degree(v) as f64;
            let cum = self.cum_residual.get_or_insert_with(v as u64, || 0.0).0;
            let old = cum.abs();
            *cum += r;
            self.residual_mass += (cum.abs() - old) * d;
            let phi = self.potential_from(v, weights[2 * i], weights[2 * i + 1]);
            self.set_potential(v, phi);
        }
        for &(e, s, _) in &f.entries {
            *self.cum_flow.entry(e).or_insert(0) += s as i64;
        }
        let count = touched.len();
        self.ends_buf = ends;
        self.touched_buf = touched;
        self.gain_buf = gains;
        self.weight_buf = weights;
        Ok(count)
    }

    /// Overwrites one MWU weight and refreshes `v`. Test-only fault injection.
    #[doc(hidden)]
    pub fn force_weight(&mut self, v: Vertex, positive: bool, w: f64) {
        self.mwu.force_weight(weight_index(v, positive), w);
        self.refresh(v);
    }

    /// `f̄ = cum_flow / T` and its residual `b − Bf̄`.
    pub fn finish(&self) -> FlowOutcome {
        let t = self.iterations();
        let mut accumulated: Vec<(EdgeId, i64)> = self
            .cum_flow
            .iter()
            .filter(|(_, &c)| c != 0)
            .map(|(&e, &c)| (e, c))
            .collect();
        accumulated.sort_unstable_by_key(|&(e, _)| e);
        let flow = Flow::from_entries(accumulated.iter().map(|&(e, c)| (e, c as f64 / t as f64)));
        let residual = residual(self.graph, &self.b, &flow);
        FlowOutcome {
            flow,
            residual,
            accumulated,
            iterations: t,
        }
    }
}

impl Auditable for SingleState<'_> {
    fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn planned_iterations(&self) -> usize {
        self.iterations()
    }

    fn completed_iterations(&self) -> usize {
        self.iteration()
    }

    fn commodity_count(&self) -> usize {
        1
    }

    fn commodity_l1(&self, _j: usize) -> f64 {
        self.b_l1
    }

    fn degree(&self, v: Vertex) -> usize {
        self.graph.degree(v)
    }

    fn for_each_potential(&self, visit: &mut dyn FnMut(Vertex, usize, f64)) {
        for (v, p) in self.active_set() {
            visit(v, 0, p);
        }
    }

    fn cumulative_residual(&self, v: Vertex, _j: usize) -> f64 {
        SingleState::cumulative_residual(self, v)
    }

    fn cumulative_residuals(&self) -> Vec<(Vertex, usize, f64)> {
        self.cum_residual
            .iter()
            .map(|(v, &r)| (v as Vertex, 0, r))
            .collect()
    }

    fn residual_mass(&self, _j: usize) -> f64 {
        self.residual_mass
    }

    fn active_volume(&self, _j: usize) -> usize {
        self.active_volume
    }
}

pub fn solve_single(g: &Graph, b: &SourceFunction, eps: f64) -> Result<SingleResult, SolveError> {
    solve_single_with(g, b, &SolveConfig::new(eps)).map(|(r, _)| r)
}

/// Full run with instrumentation.
pub fn solve_single_with(
    g: &Graph,
    b: &SourceFunction,
    config: &SolveConfig,
) -> Result<(SingleResult, RunStats), SolveError> {
    let mut state = SingleState::new(g, b, config.eps)?;
    let (l0, l1) = b.norms();
    let mut stats = RunStats::new(
        g.vertex_count(),
        g.edge_count(),
        1,
        config.eps,
        state.alpha(),
        state.iterations(),
        l0,
        l1,
    )
    .with_audit(config.audit)
    .with_series(config.series);

    if let Some(cert) = precheck(g, b) {
        stats.total_work += l0 as u64;
        stats.record_certificate(ResultKind::CutCertificate, Some(cert.volume));
        return Ok((SingleResult::Certificate(cert), stats));
    }

    for i in 1..=state.iterations() {
        let active_volume = state.active_volume();
        let f = state.flow_step();
        let term = state.termination_check(&f);
        if term.fires {
            let before = state.sweep_scans;
            let outcome = state.extract_certificate();
            stats.total_work += (state.sweep_scans - before) as u64;
            match outcome {
                Ok(cert) => {
                    stats.total_work += f.scanned as u64 + 1;
                    stats.iterations_run = i;
                    stats.max_active_volume = stats.max_active_volume.max(active_volume);
                    stats.record_certificate(ResultKind::CutCertificate, Some(cert.volume));
                    return Ok((SingleResult::Certificate(cert), stats));
                }
                Err(e) => log::warn!("{e}; lhs = {}, rhs = {}; continuing", term.lhs, term.rhs),
            }
        }
        let touched = state.update_weights(&f)?;
        let record = IterationRecord {
            iteration: i,
            active_volume,
            touched,
            scanned: f.scanned,
            work: (f.scanned + 2 * touched + 1) as u64,
        };
        audit_iteration(&state, &mut stats, record);
    }
    stats.record_certificate(ResultKind::Flow, None);
    Ok((SingleResult::Flow(state.finish()), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::KFlow;
    use crate::flow::KSource;
    use crate::verify::verify_flow_output;

    fn src(entries: &[(Vertex, f64)]) -> SourceFunction {
        SourceFunction::from_entries(entries.iter().copied())
    }

    #[test]
    fn precheck_examples() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let cert = precheck(&g, &src(&[(0, 2.0), (1, -2.0)])).unwrap();
        assert_eq!(cert.set, vec![0]);
        assert_eq!((cert.b_of_s, cert.boundary), (2.0, 1));
        assert!(precheck(&g, &src(&[(0, 1.0), (1, -1.0)])).is_none());
        assert!(precheck(&g, &SourceFunction::new()).is_none());
    }

    #[test]
    fn rounded_potential_examples() {
        let g = Graph::new(8, &[(0, 1), (0, 2), (0, 3), (0, 4), (5, 6), (6, 7)]).unwrap();
        let mut state = SingleState::new(&g, &SourceFunction::new(), 0.2).unwrap();
        assert_eq!(state.rounded_potential(0), 0.0);
        state.force_weight(0, true, 8.0);
        assert_eq!(state.rounded_potential(0), 2.0);
        state.force_weight(0, false, 8.0);
        assert_eq!(state.rounded_potential(0), 0.0);
        assert_eq!(state.active_set().count(), 0);
    }

    #[test]
    fn first_round_flow_is_empty() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let state = SingleState::new(&g, &src(&[(0, 1.0), (2, -1.0)]), 0.2).unwrap();
        assert!(state.flow_step().is_empty());
    }

    #[test]
    fn flow_goes_downhill() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let mut state = SingleState::new(&g, &SourceFunction::new(), 0.2).unwrap();
        state.force_weight(0, true, 2.0);
        assert_eq!(state.rounded_potential(0), 2.0);
        assert_eq!(state.flow_step().get(0), 1);

        let g = Graph::new(2, &[(0, 1), (0, 1)]).unwrap();
        let mut state = SingleState::new(&g, &SourceFunction::new(), 0.2).unwrap();
        state.force_weight(0, false, 2.0);
        assert_eq!(state.rounded_potential(0), -1.0);
        let f = state.flow_step();
        assert_eq!((f.get(0), f.get(1)), (-1, -1));
        assert_eq!(f.scanned(), 2);
    }

    #[test]
    fn edges_between_active_vertices_are_visited_once() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let mut state = SingleState::new(&g, &SourceFunction::new(), 0.2).unwrap();
        state.force_weight(0, true, 6.0);
        state.force_weight(1, true, 3.0);
        let f = state.flow_step();
        assert_eq!(f.len(), 2);
        assert_eq!((f.get(0), f.get(1)), (1, 1));
    }

    #[test]
    fn termination_examples() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let b = src(&[(0, 1.0)]);
        let mut state = SingleState::new(&g, &b, 0.2).unwrap();
        let t = state.termination_check(&state.flow_step());
        assert_eq!((t.lhs, t.rhs, t.fires), (0.0, 0.0, false));

        state.force_weight(0, true, 2.0);
        state.force_weight(1, true, 2.0);
        let t = state.termination_check(&state.flow_step());
        assert_eq!((t.lhs, t.rhs, t.fires), (2.0, 0.0, true));
        let cert = state.extract_certificate().unwrap();
        assert_eq!(cert.set, vec![0, 1]);
        assert_eq!((cert.b_of_s, cert.boundary, cert.volume), (1.0, 0, 2));

        let mut state = SingleState::new(&g, &SourceFunction::new(), 0.2).unwrap();
        state.force_weight(0, true, 2.0);
        let t = state.termination_check(&state.flow_step());
        assert_eq!((t.lhs, t.rhs, t.fires), (0.0, 2.0, false));
    }

    #[test]
    fn sweep_falls_back_to_negative_side() {
        let g = Graph::new(4, &[(0, 1), (2, 3)]).unwrap();
        let positive = src(&[(0, 1.0)]);
        let mut state = SingleState::new(&g, &positive, 0.2).unwrap();
        state.force_weight(0, true, 5.0);
        state.force_weight(1, true, 5.0);
        assert_eq!(state.extract_certificate().unwrap().set, vec![0, 1]);

        let negative = src(&[(0, -1.0)]);
        let mut state = SingleState::new(&g, &negative, 0.2).unwrap();
        state.force_weight(0, false, 5.0);
        state.force_weight(1, false, 5.0);
        state.force_weight(2, true, 5.0);
        let cert = state.extract_certificate().unwrap();
        assert_eq!(cert.set, vec![0, 1]);
        assert_eq!((cert.b_of_s, cert.boundary), (-1.0, 0));

        let mut state = SingleState::new(&g, &negative, 0.2).unwrap();
        state.force_weight(2, true, 5.0);
        assert!(matches!(
            state.extract_certificate(),
            Err(SolveError::SweepFailed(1))
        ));
    }

    #[test]
    fn update_weights_examples() {
        let g = Graph::new(3, &[(0, 1)]).unwrap();
        let b = src(&[(0, 1.0), (1, -1.0)]);
        let mut state = SingleState::new(&g, &b, 0.2).unwrap();
        let alpha = state.alpha();
        let touched = state.update_weights(&RoundFlow::default()).unwrap();
        assert_eq!(touched, 2);
        assert_eq!(state.weight(0, true), 1.0 + alpha);
        assert_eq!(state.weight(0, false), 1.0 - alpha);
        assert_eq!(state.cumulative_residual(0), 1.0);
        assert!(!state.mwu().ledger().is_materialized(4));
        assert!(!state.mwu().ledger().is_materialized(5));

        let mut state = SingleState::new(&g, &b, 0.2).unwrap();
        let f = RoundFlow {
            entries: vec![(0, 1, 0.0)],
            scanned: 1,
        };
        assert_eq!(state.update_weights(&f).unwrap(), 2);
        assert_eq!(state.weight(0, true), 1.0);
        assert_eq!(state.weight(1, false), 1.0);
        assert_eq!(state.cumulative_flow(0), 1);
    }

    #[test]
    fn solve_examples() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let out = solve_single(&g, &SourceFunction::new(), 0.2).unwrap();
        let flow = out.flow().unwrap();
        assert!(flow.flow.is_empty());
        assert_eq!(flow.residual.l1(), 0.0);

        let b = src(&[(0, 1.0), (1, -1.0)]);
        let out = solve_single(&g, &b, 0.2).unwrap();
        let flow = out.flow().unwrap();
        let f0 = flow.flow.get(0);
        assert!((0.8..=1.0).contains(&f0), "f(e0) = {f0}");
        let report = verify_flow_output(
            &g,
            &KSource::single(b.clone()),
            &KFlow::from_commodities(vec![flow.flow.clone()]),
            0.2,
        );
        assert!(report.ok, "{report:?}");

        let g = Graph::new(2, &[]).unwrap();
        let cert = solve_single(&g, &b, 0.2)
            .unwrap()
            .certificate()
            .cloned()
            .unwrap();
        assert_eq!((cert.b_of_s.abs(), cert.boundary), (1.0, 0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        assert!(matches!(
            solve_single(&g, &SourceFunction::new(), 1.0),
            Err(SolveError::EpsOutOfRange(_))
        ));
        assert!(solve_single(&g, &src(&[(0, f64::NAN)]), 0.2).is_err());
        assert!(solve_single(&g, &src(&[(5, 1.0)]), 0.2).is_err());
    }

    #[test]
    fn audited_run_is_clean_and_counts_work() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let b = src(&[(0, 0.5), (3, -0.5)]);
        let (out, stats) =
            solve_single_with(&g, &b, &SolveConfig::new(0.3).audited().with_series()).unwrap();
        assert!(out.flow().is_some());
        assert!(stats.violations.is_empty(), "{:?}", stats.violations);
        assert_eq!(stats.series.len(), stats.planned_iterations);
        assert_eq!(
            stats.total_work,
            stats.series.iter().map(|r| r.work).sum::<u64>()
        );
    }
}
