//! Local k-commodity solver.
//!
//! Weights live on `V × [k] × {+,−}`. Per round every edge around the active
//! entries carries one unit in the single commodity with the largest potential
//! gap across it (ties to the smallest commodity). Termination compares
//! `⟨φ̃, ⊕b_j⟩` with `Σ_e max_j |Δ_j(e)|`, and the potential matrix itself is
//! the infeasibility certificate. With `k = 1` every arithmetic step matches
//! the single-commodity solver in value and order.

use std::collections::BTreeSet;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::error::SolveError;
use crate::flow::{residual, Flow, KFlow, KSource, SourceFunction};
use crate::graph::{EdgeId, Graph, Vertex};
use crate::mwu::{round_weight, Index, Mwu, MwuParams};
use crate::single::{check_eps, coalesce, endpoint_key, fires, key_pair, pair_key, SolveConfig};
use crate::stats::{audit_iteration, Auditable, IterationRecord, ResultKind, RunStats};
use crate::table::Table;

/// A potential matrix with `Σ φ̃_{v,j} b_j(v) > Σ_e max_j |φ̃_{u,j} − φ̃_{v,j}|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialCertificate {
    /// Nonzero entries `(v, j, φ̃_{v,j})`, sorted by `(v, j)`.
    pub phi: Vec<(Vertex, usize, f64)>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiFlowOutcome {
    pub flow: KFlow,
    /// `b_j − Bf̄_j` per commodity.
    pub residuals: Vec<SourceFunction>,
    /// Per commodity, `Σ_i f^i_j(e)` by ascending edge id.
    pub accumulated: Vec<Vec<(EdgeId, i64)>>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MultiResult {
    Certificate(PotentialCertificate),
    Flow(MultiFlowOutcome),
}

impl MultiResult {
    pub fn certificate(&self) -> Option<&PotentialCertificate> {
        match self {
            MultiResult::Certificate(c) => Some(c),
            MultiResult::Flow(_) => None,
        }
    }

    pub fn flow(&self) -> Option<&MultiFlowOutcome> {
        match self {
            MultiResult::Flow(f) => Some(f),
            MultiResult::Certificate(_) => None,
        }
    }
}

/// One round's k-commodity flow: at most one commodity per edge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiRoundFlow {
    /// `(edge, commodity, ±1, max_j |Δ_j|)` in visiting order.
    entries: Vec<(EdgeId, usize, i8, f64)>,
    scanned: usize,
}

impl MultiRoundFlow {
    pub fn entries(&self) -> impl Iterator<Item = (EdgeId, usize, i8)> + '_ {
        self.entries.iter().map(|&(e, j, s, _)| (e, j, s))
    }

    /// `f_j(e)`.
    pub fn get(&self, e: EdgeId, j: usize) -> i8 {
        self.entries
            .iter()
            .find(|x| x.0 == e && x.1 == j)
            .map_or(0, |x| x.2)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn scanned(&self) -> usize {
        self.scanned
    }

    pub fn to_kflow(&self, k: usize) -> KFlow {
        let mut out = KFlow::new(k);
        for &(e, j, s, _) in &self.entries {
            out.commodity_mut(j).set(e, s as f64);
        }
        out
    }
}

pub use crate::single::Termination;

/// First `(v, j)` with `|b_j(v)| > deg(v)`, commodities ascending, then vertices ascending.
pub fn precheck_multi(g: &Graph, b: &KSource) -> Option<PotentialCertificate> {
    for (j, bj) in b.commodities().iter().enumerate() {
        for (v, x) in bj.sorted_entries() {
            let d = g.degree(v);
            if x.abs() > d as f64 {
                return Some(PotentialCertificate {
                    phi: vec![(v, j, x.signum())],
                    lhs: x.abs(),
                    rhs: d as f64,
                });
            }
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct MultiState<'g> {
    graph: &'g Graph,
    b: KSource,
    k: usize,
    /// `(pair_key(v, j), b_j(v))` for `b_j(v) ≠ 0`, ascending.
    support: Vec<(u64, f64)>,
    l1: Vec<f64>,
    alpha: f64,
    threshold: f64,
    mwu: Mwu,
    cum_flow: Vec<FxHashMap<EdgeId, i64>>,
    /// Keyed by `v·k + j`.
    cum_residual: Table<f64>,
    residual_mass: Vec<f64>,
    /// Nonzero potentials per vertex, commodities ascending. An emptied list
    /// is kept for reuse.
    lists: Table<Vec<(usize, f64)>>,
    /// Vertices with a nonempty list.
    active: BTreeSet<Vertex>,
    active_volume: Vec<usize>,
    check_scans: usize,
    ends_buf: Vec<u64>,
    touched_buf: Vec<(u64, f64, i64)>,
    gain_buf: Vec<(Index, f64)>,
    weight_buf: Vec<f64>,
    phi_buf: Vec<(usize, f64)>,
}

impl<'g> MultiState<'g> {
    /// `α = eps/5`, threshold `n`, `|J| = 2nk`.
    pub fn new(graph: &'g Graph, b: &KSource, eps: f64) -> Result<Self, SolveError> {
        check_eps(eps)?;
        let k = b.k();
        if k == 0 {
            return Err(SolveError::NoCommodities);
        }
        for bj in b.commodities() {
            bj.check_finite()?;
            bj.check_in_graph(graph)?;
        }
        let n = graph.vertex_count();
        let alpha = eps / 5.0;
        let threshold = n as f64;
        let params = MwuParams::new(alpha, 2 * n as u64 * k as u64, threshold, threshold)?;
        let mut support: Vec<(u64, f64)> = b
            .commodities()
            .iter()
            .enumerate()
            .flat_map(|(j, bj)| bj.iter().map(move |(v, x)| (pair_key(v, j), x)))
            .collect();
        support.sort_unstable_by_key(|t| t.0);
        Ok(Self {
            graph,
            b: b.clone(),
            k,
            support,
            l1: b.commodities().iter().map(SourceFunction::l1).collect(),
            alpha,
            threshold,
            mwu: Mwu::new(params),
            cum_flow: vec![FxHashMap::default(); k],
            cum_residual: Table::for_range(n as u64 * k as u64),
            residual_mass: vec![0.0; k],
            lists: Table::for_range(n as u64),
            active: BTreeSet::new(),
            active_volume: vec![0; k],
            check_scans: 0,
            ends_buf: Vec::new(),
            touched_buf: Vec::new(),
            gain_buf: Vec::new(),
            weight_buf: Vec::new(),
            phi_buf: Vec::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn iterations(&self) -> usize {
        self.mwu.params().iterations
    }

    pub fn iteration(&self) -> usize {
        self.mwu.rounds()
    }

    pub fn mwu(&self) -> &Mwu {
        &self.mwu
    }

    #[inline]
    fn weight_index(&self, v: Vertex, j: usize, positive: bool) -> Index {
        ((v as Index * self.k as Index + j as Index) * 2) + if positive { 0 } else { 1 }
    }

    pub fn weight(&self, v: Vertex, j: usize, positive: bool) -> f64 {
        self.mwu.ledger().get(self.weight_index(v, j, positive))
    }

    /// `φ̃_{v,j} = (w̃_{v,j,+} − w̃_{v,j,−}) / deg(v)`.
    pub fn rounded_potential(&self, v: Vertex, j: usize) -> f64 {
        self.potential_from(v, self.weight(v, j, true), self.weight(v, j, false))
    }

    #[inline]
    fn potential_from(&self, v: Vertex, plus: f64, minus: f64) -> f64 {
        let d = self.graph.degree(v);
        if d == 0 {
            return 0.0;
        }
        (round_weight(plus, self.threshold) - round_weight(minus, self.threshold)) / d as f64
    }

    /// Nonzero potentials `(v, j, φ̃)` sorted by `(v, j)`.
    pub fn potentials(&self) -> Vec<(Vertex, usize, f64)> {
        self.active
            .iter()
            .flat_map(|&v| self.list(v).iter().map(move |&(j, p)| (v, j, p)))
            .collect()
    }

    /// `vol(A_j)`.
    pub fn active_volume(&self, j: usize) -> usize {
        self.active_volume[j]
    }

    pub fn total_active_volume(&self) -> usize {
        self.active_volume.iter().sum()
    }

    pub fn cumulative_residual(&self, v: Vertex, j: usize) -> f64 {
        self.cum_residual
            .get(self.pair_slot(v, j))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn cumulative_flow(&self, e: EdgeId, j: usize) -> i64 {
        self.cum_flow[j].get(&e).copied().unwrap_or(0)
    }

    #[inline]
    fn list(&self, v: Vertex) -> &[(usize, f64)] {
        self.lists.get(v as u64).map_or(&[], Vec::as_slice)
    }

    #[inline]
    fn pair_slot(&self, v: Vertex, j: usize) -> u64 {
        v as u64 * self.k as u64 + j as u64
    }

    fn refresh(&mut self, v: Vertex, j: usize) {
        self.set_potentials(v, &[(j, self.rounded_potential(v, j))]);
    }

    /// Writes new potentials `(j, φ̃_{v,j})` of one vertex, commodities
    /// ascending, keeping the active set and volumes in step.
    fn set_potentials(&mut self, v: Vertex, updates: &[(usize, f64)]) {
        let d = self.graph.degree(v);
        let (list, _) = self.lists.get_or_insert_with(v as u64, Vec::new);
        let was_active = !list.is_empty();
        for &(j, phi) in updates {
            match list.binary_search_by_key(&j, |x| x.0) {
                Ok(pos) if phi != 0.0 => list[pos].1 = phi,
                Ok(pos) => {
                    list.remove(pos);
                    self.active_volume[j] -= d;
                }
                Err(pos) if phi != 0.0 => {
                    list.insert(pos, (j, phi));
                    self.active_volume[j] += d;
                }
                Err(_) => {}
            }
        }
        match (was_active, list.is_empty()) {
            (false, false) => {
                self.active.insert(v);
            }
            (true, true) => {
                self.active.remove(&v);
            }
            _ => {}
        }
    }

    /// Routes one unit on each edge around the active entries in its winning commodity.
    pub fn flow_step(&self) -> MultiRoundFlow {
        let mut out = MultiRoundFlow::default();
        for &u in &self.active {
            let list_u = self.list(u);
            for inc in self.graph.incident(u) {
                out.scanned += 1;
                let w = self.graph.opposite(inc.edge, u);
                let list_w = self.list(w);
                if !list_w.is_empty() && w < u {
                    continue;
                }
                let Some((j, diff)) = winner(list_u, list_w) else {
                    continue;
                };
                let oriented = if inc.sign > 0 { diff } else { -diff };
                let sign = if oriented > 0.0 { 1 } else { -1 };
                out.entries.push((inc.edge, j, sign, diff.abs()));
            }
        }
        out
    }

    pub fn termination_check(&self, f: &MultiRoundFlow) -> Termination {
        // Only the support of b contributes.
        let mut lhs = 0.0;
        for &(key, x) in &self.support {
            let (v, j) = key_pair(key);
            let list = self.list(v);
            if let Ok(pos) = list.binary_search_by_key(&j, |e| e.0) {
                lhs += list[pos].1 * x;
            }
        }
        let mut rhs = 0.0;
        for &(_, _, _, gap) in &f.entries {
            rhs += gap;
        }
        Termination {
            lhs,
            rhs,
            fires: fires(lhs, rhs),
        }
    }

    /// Recomputes both sides of the certificate inequality for the current
    /// potentials from scratch and accepts only a strict inequality.
    ///
    /// Only edges touching an active vertex can have a nonzero gap, so the
    /// check costs `O(Σ_j vol(A_j))` rather than `O(m)`.
    pub fn extract_certificate(&mut self) -> Result<PotentialCertificate, SolveError> {
        let phi = self.potentials();
        let lookup: FxHashMap<(Vertex, usize), f64> =
            phi.iter().map(|&(v, j, p)| ((v, j), p)).collect();
        let mut lhs = 0.0;
        for &(v, j, p) in &phi {
            lhs += p * self.b.commodity(j).get(v);
        }
        let mut seen: FxHashSet<EdgeId> = FxHashSet::default();
        let mut rhs = 0.0;
        let mut scans = 0;
        for &u in &self.active {
            let list = self.list(u);
            for inc in self.graph.incident(u) {
                scans += 1;
                if !seen.insert(inc.edge) {
                    continue;
                }
                let w = self.graph.opposite(inc.edge, u);
                let mut best: f64 = 0.0;
                let mut commodities: Vec<usize> = list.iter().map(|x| x.0).collect();
                commodities.extend(self.list(w).iter().map(|x| x.0));
                for j in commodities {
                    let pu = lookup.get(&(u, j)).copied().unwrap_or(0.0);
                    let pw = lookup.get(&(w, j)).copied().unwrap_or(0.0);
                    best = best.max((pu - pw).abs());
                }
                rhs += best;
            }
        }
        self.check_scans += scans;
        if lhs > rhs {
            Ok(PotentialCertificate { phi, lhs, rhs })
        } else {
            Err(SolveError::CertificateRejected(self.iteration() + 1))
        }
    }

    pub fn update_weights(&mut self, f: &MultiRoundFlow) -> Result<usize, SolveError> {
        let mut ends = std::mem::take(&mut self.ends_buf);
        ends.clear();
        for &(e, j, s, _) in &f.entries {
            let (u, v) = self.graph.endpoints(e);
            ends.push(endpoint_key(u, j, s as i64));
            ends.push(endpoint_key(v, j, -(s as i64)));
        }
        let mut touched = std::mem::take(&mut self.touched_buf);
        coalesce(&self.support, &mut ends, &mut touched);

        let mut gains = std::mem::take(&mut self.gain_buf);
        gains.clear();
        for &(key, x, bf) in &touched {
            let (v, j) = key_pair(key);
            let r = (x - bf as f64) / self.graph.degree(v) as f64;
            gains.push((self.weight_index(v, j, true), r));
            gains.push((self.weight_index(v, j, false), -r));
        }
        let mut weights = std::mem::take(&mut self.weight_buf);
        weights.clear();
        self.mwu.apply_with(&gains, |_, w| weights.push(w))?;

        let mut phis = std::mem::take(&mut self.phi_buf);
        let mut i = 0;
        while i < touched.len() {
            let v = key_pair(touched[i].0).0;
            let d = self.graph.degree(v) as f64;
            phis.clear();
            while i < touched.len() && key_pair(touched[i].0).0 == v {
                let j = key_pair(touched[i].0).1;
                let r = gains[2 * i].1;
                let slot = self.pair_slot(v, j);
                let cum = self.cum_residual.get_or_insert_with(slot, || 0.0).0;
                let old = cum.abs();
                *cum += r;
                self.residual_mass[j] += (cum.abs() - old) * d;
                phis.push((
                    j,
                    self.potential_from(v, weights[2 * i], weights[2 * i + 1]),
                ));
                i += 1;
            }
            self.set_potentials(v, &phis);
        }
        for &(e, j, s, _) in &f.entries {
            *self.cum_flow[j].entry(e).or_insert(0) += s as i64;
        }
        let count = touched.len();
        self.ends_buf = ends;
        self.touched_buf = touched;
        self.gain_buf = gains;
        self.weight_buf = weights;
        self.phi_buf = phis;
        Ok(count)
    }

    #[doc(hidden)]
    pub fn force_weight(&mut self, v: Vertex, j: usize, positive: bool, w: f64) {
        let idx = self.weight_index(v, j, positive);
        self.mwu.force_weight(idx, w);
        self.refresh(v, j);
    }

    pub fn finish(&self) -> MultiFlowOutcome {
        let t = self.iterations();
        let mut flows = Vec::with_capacity(self.k);
        let mut residuals = Vec::with_capacity(self.k);
        let mut accumulated = Vec::with_capacity(self.k);
        for j in 0..self.k {
            let mut acc: Vec<(EdgeId, i64)> = self.cum_flow[j]
                .iter()
                .filter(|(_, &c)| c != 0)
                .map(|(&e, &c)| (e, c))
                .collect();
            acc.sort_unstable_by_key(|&(e, _)| e);
            let flow = Flow::from_entries(acc.iter().map(|&(e, c)| (e, c as f64 / t as f64)));
            residuals.push(residual(self.graph, self.b.commodity(j), &flow));
            flows.push(flow);
            accumulated.push(acc);
        }
        MultiFlowOutcome {
            flow: KFlow::from_commodities(flows),
            residuals,
            accumulated,
            iterations: t,
        }
    }
}

/// Commodity with the largest `|φ̃_{u,j} − φ̃_{w,j}|` over the union of both
/// sorted lists, smallest `j` on ties; `None` when every gap is zero.
fn winner(a: &[(usize, f64)], b: &[(usize, f64)]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let (mut i, mut k) = (0, 0);
    while i < a.len() || k < b.len() {
        let (j, diff) = match (a.get(i), b.get(k)) {
            (Some(&(ja, pa)), Some(&(jb, pb))) if ja == jb => {
                i += 1;
                k += 1;
                (ja, pa - pb)
            }
            (Some(&(ja, pa)), Some(&(jb, _))) if ja < jb => {
                i += 1;
                (ja, pa - 0.0)
            }
            (Some(&(ja, pa)), None) => {
                i += 1;
                (ja, pa - 0.0)
            }
            (_, Some(&(jb, pb))) => {
                k += 1;
                (jb, 0.0 - pb)
            }
            (None, None) => unreachable!(),
        };
        if diff != 0.0 && best.is_none_or(|(_, d)| diff.abs() > d.abs()) {
            best = Some((j, diff));
        }
    }
    best
}

impl Auditable for MultiState<'_> {
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
        self.k
    }

    fn commodity_l1(&self, j: usize) -> f64 {
        self.l1[j]
    }

    fn degree(&self, v: Vertex) -> usize {
        self.graph.degree(v)
    }

    fn for_each_potential(&self, visit: &mut dyn FnMut(Vertex, usize, f64)) {
        for &v in &self.active {
            for &(j, p) in self.list(v) {
                visit(v, j, p);
            }
        }
    }

    fn cumulative_residual(&self, v: Vertex, j: usize) -> f64 {
        MultiState::cumulative_residual(self, v, j)
    }

    fn cumulative_residuals(&self) -> Vec<(Vertex, usize, f64)> {
        self.cum_residual
            .iter()
            .map(|(key, &r)| {
                (
                    (key / self.k as u64) as Vertex,
                    (key % self.k as u64) as usize,
                    r,
                )
            })
            .collect()
    }

    fn residual_mass(&self, j: usize) -> f64 {
        self.residual_mass[j]
    }

    fn active_volume(&self, j: usize) -> usize {
        self.active_volume[j]
    }
}

pub fn solve_multi(g: &Graph, b: &KSource, eps: f64) -> Result<MultiResult, SolveError> {
    solve_multi_with(g, b, &SolveConfig::new(eps)).map(|(r, _)| r)
}

pub fn solve_multi_with(
    g: &Graph,
    b: &KSource,
    config: &SolveConfig,
) -> Result<(MultiResult, RunStats), SolveError> {
    let mut state = MultiState::new(g, b, config.eps)?;
    let (l0, l1) = b.norms();
    let mut stats = RunStats::new(
        g.vertex_count(),
        g.edge_count(),
        b.k(),
        config.eps,
        state.alpha(),
        state.iterations(),
        l0,
        l1,
    )
    .with_audit(config.audit)
    .with_series(config.series);

    if let Some(cert) = precheck_multi(g, b) {
        stats.total_work += l0 as u64;
        let volume = g.degree(cert.phi[0].0);
        stats.record_certificate(ResultKind::PotentialCertificate, Some(volume));
        return Ok((MultiResult::Certificate(cert), stats));
    }

    for i in 1..=state.iterations() {
        let active_volume = state.total_active_volume();
        let f = state.flow_step();
        let term = state.termination_check(&f);
        if term.fires {
            let before = state.check_scans;
            let outcome = state.extract_certificate();
            stats.total_work += (state.check_scans - before) as u64;
            match outcome {
                Ok(cert) => {
                    stats.total_work += f.scanned as u64 + 1;
                    stats.iterations_run = i;
                    stats.max_active_volume = stats.max_active_volume.max(active_volume);
                    let volume = g.volume(state.active.iter());
                    stats.record_certificate(ResultKind::PotentialCertificate, Some(volume));
                    return Ok((MultiResult::Certificate(cert), stats));
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
    Ok((MultiResult::Flow(state.finish()), stats))
}
