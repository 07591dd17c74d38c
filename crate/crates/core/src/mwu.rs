//! Multiplicative weights with additively approximate weights.
//!
//! Every index starts at weight 1 and is only materialized once it receives a
//! gain, so a run that touches few indices costs time proportional to the
//! touched set rather than to `|J|`. Each round the caller supplies a gain
//! vector `g` that must satisfy `‖g‖∞ ≤ 2` and `⟨g, w̃⟩ ≤ 0`, where `w̃` is the
//! ledger with every weight below the rounding threshold replaced by zero.
//! Under those conditions, and with `T` from [`compute_iterations`], every
//! index ends with average gain at most `5α`.

use crate::error::MwuError;
use crate::table::Table;

pub type Index = u64;

/// Relative slack on the `⟨g, w̃⟩ ≤ 0` check.
pub const CORRELATION_TOL: f64 = 1e-9;

/// Largest admissible `|g_j|`.
pub const GAIN_BOUND: f64 = 2.0;

/// Smallest `T ≥ 1` with `α²T ≥ ln(|J| · (1 + 1.5 · T · max(bound, 1)))`.
///
/// This is the closing inequality `ln(|J| + 1.5T·bound·|J|) + 4α²T ≤ 5α²T` of the
/// approximate-weights analysis solved for `T`.
pub fn compute_iterations(
    alpha: f64,
    index_count: u64,
    approx_bound: f64,
) -> Result<usize, MwuError> {
    if !(alpha > 0.0 && alpha <= 0.25) {
        return Err(MwuError::AlphaOutOfRange(alpha));
    }
    if index_count == 0 {
        return Err(MwuError::NoIndices);
    }
    if !(approx_bound >= 0.0) || !approx_bound.is_finite() {
        return Err(MwuError::InvalidParameter(format!(
            "approx_bound = {approx_bound} must be finite and non-negative"
        )));
    }
    let slack = 1.5 * approx_bound.max(1.0);
    let ln_j = (index_count as f64).ln();
    let alpha2 = alpha * alpha;
    let enough = |t: usize| alpha2 * t as f64 >= ln_j + (slack * t as f64).ln_1p();

    // The gap α²T − ln(...) is convex in T and non-positive at T = 0, so once
    // it turns non-negative it stays so; doubling then bisection is exact.
    let mut hi = 1usize;
    while !enough(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(1);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if enough(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuParams {
    pub alpha: f64,
    pub index_count: u64,
    /// Weights strictly below this value are rounded to zero.
    pub round_threshold: f64,
    /// Upper bound on `‖w − w̃‖∞`.
    pub approx_bound: f64,
    pub iterations: usize,
}

impl MwuParams {
    /// Parameters with `T` chosen by [`compute_iterations`].
    pub fn new(
        alpha: f64,
        index_count: u64,
        round_threshold: f64,
        approx_bound: f64,
    ) -> Result<Self, MwuError> {
        let iterations = compute_iterations(alpha, index_count, approx_bound)?;
        Self::with_iterations(
            alpha,
            index_count,
            round_threshold,
            approx_bound,
            iterations,
        )
    }

    pub fn with_iterations(
        alpha: f64,
        index_count: u64,
        round_threshold: f64,
        approx_bound: f64,
        iterations: usize,
    ) -> Result<Self, MwuError> {
        if !(alpha > 0.0 && alpha <= 0.25) {
            return Err(MwuError::AlphaOutOfRange(alpha));
        }
        if index_count == 0 {
            return Err(MwuError::NoIndices);
        }
        if !(round_threshold >= 0.0) || !round_threshold.is_finite() {
            return Err(MwuError::InvalidParameter(format!(
                "round_threshold = {round_threshold} must be finite and non-negative"
            )));
        }
        // Rounding below the threshold moves a weight by less than the threshold.
        if !(round_threshold <= approx_bound) {
            return Err(MwuError::InvalidParameter(format!(
                "approx_bound = {approx_bound} does not dominate round_threshold = {round_threshold}"
            )));
        }
        if iterations == 0 {
            return Err(MwuError::InvalidParameter(
                "iterations must be at least 1".into(),
            ));
        }
        Ok(Self {
            alpha,
            index_count,
            round_threshold,
            approx_bound,
            iterations,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    weight: f64,
    gain_sum: f64,
}

impl Default for Slot {
    fn default() -> Self {
        Self {
            weight: 1.0,
            gain_sum: 0.0,
        }
    }
}

/// Sparse weights; absent indices have weight exactly 1.
#[derive(Debug, Clone, Default)]
pub struct WeightLedger {
    weights: Table<Slot>,
}

impl WeightLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// A ledger sized for indices `0..index_count`.
    pub fn for_indices(index_count: u64) -> Self {
        Self {
            weights: Table::for_range(index_count),
        }
    }

    #[inline]
    pub fn get(&self, j: Index) -> f64 {
        self.weights.get(j).map_or(1.0, |s| s.weight)
    }

    pub fn is_materialized(&self, j: Index) -> bool {
        self.weights.contains(j)
    }

    pub fn materialized(&self) -> usize {
        self.weights.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Index, f64)> + '_ {
        self.weights.iter().map(|(j, s)| (j, s.weight))
    }

    /// Overwrites a weight. Meant for tests and fault injection.
    pub fn set(&mut self, j: Index, w: f64) {
        self.weights.get_or_insert_with(j, Slot::default).0.weight = w;
    }

    /// `w_j ← w_j · (1 + α g)` and records the gain; returns the previous
    /// slot, if any, and the new weight.
    #[inline]
    fn update(&mut self, j: Index, alpha: f64, gain: f64) -> (Option<Slot>, f64) {
        let (slot, fresh) = self.weights.get_or_insert_with(j, Slot::default);
        let before = if fresh { None } else { Some(*slot) };
        slot.weight *= 1.0 + alpha * gain;
        slot.gain_sum += gain;
        (before, slot.weight)
    }

    fn restore(&mut self, j: Index, before: Option<Slot>) {
        match before {
            Some(slot) => {
                self.weights.insert(j, slot);
            }
            None => {
                self.weights.remove(j);
            }
        }
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.weights.iter().map(|(_, s)| s.weight).reduce(f64::min)
    }
}

#[inline]
pub fn round_weight(w: f64, threshold: f64) -> f64 {
    if w >= threshold {
        w
    } else {
        0.0
    }
}

/// Read-only view `w̃` of a ledger.
#[derive(Debug, Clone, Copy)]
pub struct RoundedWeights<'a> {
    ledger: &'a WeightLedger,
    threshold: f64,
}

impl<'a> RoundedWeights<'a> {
    #[inline]
    pub fn get(&self, j: Index) -> f64 {
        round_weight(self.ledger.get(j), self.threshold)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

pub fn round_weights(w: &WeightLedger, threshold: f64) -> RoundedWeights<'_> {
    RoundedWeights {
        ledger: w,
        threshold,
    }
}

/// Per-index average gains after a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MwuReport {
    pub iterations: usize,
    /// `(j, (1/T) Σ_i g_j^i)` for every materialized index, by ascending index.
    pub averages: Vec<(Index, f64)>,
}

impl MwuReport {
    pub fn max_average(&self) -> f64 {
        self.averages.iter().map(|&(_, a)| a).fold(0.0, f64::max)
    }
}

/// Incremental MWU state, advanced one round at a time by [`Mwu::apply`].
#[derive(Debug, Clone)]
pub struct Mwu {
    params: MwuParams,
    ledger: WeightLedger,
    rounds: usize,
    // Σ of materialized weights that survive rounding.
    stored_rounded_mass: f64,
    // Per-round undo log: index, slot before the round (None if fresh), new weight.
    undo: Vec<(Index, Option<Slot>, f64)>,
}

impl Mwu {
    pub fn new(params: MwuParams) -> Self {
        Self {
            params,
            ledger: WeightLedger::for_indices(params.index_count),
            rounds: 0,
            stored_rounded_mass: 0.0,
            undo: Vec::new(),
        }
    }

    pub fn params(&self) -> &MwuParams {
        &self.params
    }

    pub fn ledger(&self) -> &WeightLedger {
        &self.ledger
    }

    pub fn rounded(&self) -> RoundedWeights<'_> {
        round_weights(&self.ledger, self.params.round_threshold)
    }

    /// Rounds applied so far.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// `‖w̃‖₁` over all of `J`, including untouched indices.
    pub fn rounded_mass(&self) -> f64 {
        let untouched = self
            .params
            .index_count
            .saturating_sub(self.ledger.materialized() as u64);
        let implicit = if 1.0 >= self.params.round_threshold {
            untouched as f64
        } else {
            0.0
        };
        self.stored_rounded_mass.max(0.0) + implicit
    }

    /// `Σ_j w_j` over all of `J`.
    pub fn total_weight(&self) -> f64 {
        let untouched = self
            .params
            .index_count
            .saturating_sub(self.ledger.materialized() as u64);
        self.ledger.iter().map(|(_, w)| w).sum::<f64>() + untouched as f64
    }

    /// Validates a gain vector against the round's preconditions without applying it.
    pub fn check(&self, gains: &[(Index, f64)]) -> Result<(), MwuError> {
        let iteration = self.rounds + 1;
        let rounded = self.rounded();
        let mut dot = 0.0;
        for &(index, gain) in gains {
            if index >= self.params.index_count {
                return Err(MwuError::IndexOutOfRange {
                    iteration,
                    index,
                    count: self.params.index_count,
                });
            }
            if !(gain.abs() <= GAIN_BOUND) {
                return Err(MwuError::GainTooLarge {
                    iteration,
                    index,
                    gain,
                });
            }
            dot += gain * rounded.get(index);
        }
        let tolerance = CORRELATION_TOL * (1.0 + self.rounded_mass());
        if dot > tolerance {
            return Err(MwuError::PositiveCorrelation {
                iteration,
                dot,
                tolerance,
            });
        }
        Ok(())
    }

    /// Checks `gains` and performs `w_j ← w_j (1 + α g_j)`. Each index may appear at most once.
    pub fn apply(&mut self, gains: &[(Index, f64)]) -> Result<(), MwuError> {
        self.apply_with(gains, |_, _| ())
    }

    /// As [`Mwu::apply`], reporting each updated weight to `updated` in gain order.
    ///
    /// Validation and update share one pass over the ledger; a rejected round
    /// is rolled back, leaving the state as it was.
    pub fn apply_with(
        &mut self,
        gains: &[(Index, f64)],
        mut updated: impl FnMut(Index, f64),
    ) -> Result<(), MwuError> {
        let iteration = self.rounds + 1;
        let tolerance = CORRELATION_TOL * (1.0 + self.rounded_mass());
        let alpha = self.params.alpha;
        let threshold = self.params.round_threshold;
        let mass_before = self.stored_rounded_mass;
        let mut undo = std::mem::take(&mut self.undo);
        undo.clear();
        let mut dot = 0.0;
        let mut failure = None;
        for &(index, gain) in gains {
            if index >= self.params.index_count {
                failure = Some(MwuError::IndexOutOfRange {
                    iteration,
                    index,
                    count: self.params.index_count,
                });
                break;
            }
            if !(gain.abs() <= GAIN_BOUND) {
                failure = Some(MwuError::GainTooLarge {
                    iteration,
                    index,
                    gain,
                });
                break;
            }
            let (before, new) = self.ledger.update(index, alpha, gain);
            let old = before.map_or(1.0, |s| s.weight);
            dot += gain * round_weight(old, threshold);
            if old >= threshold {
                self.stored_rounded_mass -= old;
            }
            if new >= threshold {
                self.stored_rounded_mass += new;
            }
            undo.push((index, before, new));
        }
        if failure.is_none() && dot > tolerance {
            failure = Some(MwuError::PositiveCorrelation {
                iteration,
                dot,
                tolerance,
            });
        }
        if let Some(e) = failure {
            for &(index, before, _) in undo.iter().rev() {
                self.ledger.restore(index, before);
            }
            self.stored_rounded_mass = mass_before;
            self.undo = undo;
            return Err(e);
        }
        for &(index, _, new) in &undo {
            updated(index, new);
        }
        self.undo = undo;
        self.rounds += 1;
        Ok(())
    }

    /// Injects a weight directly, bypassing the update rule.
    #[doc(hidden)]
    pub fn force_weight(&mut self, j: Index, w: f64) {
        let old = self.ledger.get(j);
        let threshold = self.params.round_threshold;
        if self.ledger.is_materialized(j) && old >= threshold {
            self.stored_rounded_mass -= old;
        }
        if w >= threshold {
            self.stored_rounded_mass += w;
        }
        self.ledger.set(j, w);
    }

    pub fn report(&self) -> MwuReport {
        let t = self.rounds.max(1) as f64;
        let mut averages: Vec<(Index, f64)> = self
            .ledger
            .weights
            .iter()
            .map(|(j, s)| (j, s.gain_sum / t))
            .collect();
        averages.sort_unstable_by_key(|&(j, _)| j);
        MwuReport {
            iterations: self.rounds,
            averages,
        }
    }
}

/// Source of per-round gains for [`run_mwu`].
pub trait GainProvider {
    /// Gains for round `iteration` (1-based), as sparse `(index, gain)` pairs.
    fn gains(
        &mut self,
        iteration: usize,
        ledger: &WeightLedger,
        rounded: RoundedWeights<'_>,
    ) -> Vec<(Index, f64)>;
}

impl<F> GainProvider for F
where
    F: FnMut(usize, &WeightLedger, RoundedWeights<'_>) -> Vec<(Index, f64)>,
{
    fn gains(
        &mut self,
        iteration: usize,
        ledger: &WeightLedger,
        rounded: RoundedWeights<'_>,
    ) -> Vec<(Index, f64)> {
        self(iteration, ledger, rounded)
    }
}

/// Runs `params.iterations` rounds against `provider`.
pub fn run_mwu<P: GainProvider>(
    params: MwuParams,
    provider: &mut P,
) -> Result<MwuReport, MwuError> {
    let mut mwu = Mwu::new(params);
    for iteration in 1..=params.iterations {
        let gains = provider.gains(iteration, mwu.ledger(), mwu.rounded());
        mwu.apply(&gains)?;
    }
    Ok(mwu.report())
}
