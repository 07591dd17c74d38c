//! Sparse source functions, flows, and their multi-commodity counterparts.
//!
//! All containers are sparse maps keyed by vertex or edge id. Entries whose
//! magnitude drops below [`PURGE_EPS`] after arithmetic are removed so that
//! `‖·‖₀` counts genuine nonzeros.

use rustc_hash::FxHashMap;

use crate::error::DemandError;
use crate::graph::{EdgeId, Graph, Vertex};

pub const PURGE_EPS: f64 = 1e-15;

/// Relative tolerance used to decide whether a source function is a demand.
pub const BALANCE_TOL: f64 = 1e-9;

fn sorted<K: Copy + Ord>(map: &FxHashMap<K, f64>) -> Vec<(K, f64)> {
    let mut out: Vec<(K, f64)> = map.iter().map(|(&k, &v)| (k, v)).collect();
    out.sort_unstable_by_key(|&(k, _)| k);
    out
}

/// `b: V -> R`, stored sparsely.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceFunction {
    entries: FxHashMap<Vertex, f64>,
}

impl SourceFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Vertex, f64)>) -> Self {
        let mut b = Self::new();
        for (v, x) in entries {
            b.add(v, x);
        }
        b
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> f64 {
        self.entries.get(&v).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, v: Vertex, value: f64) {
        if value.abs() < PURGE_EPS {
            self.entries.remove(&v);
        } else {
            self.entries.insert(v, value);
        }
    }

    pub fn add(&mut self, v: Vertex, delta: f64) {
        let value = self.get(v) + delta;
        self.set(v, value);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nonzero entries in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.entries.iter().map(|(&v, &x)| (v, x))
    }

    /// Nonzero entries by ascending vertex.
    pub fn sorted_entries(&self) -> Vec<(Vertex, f64)> {
        sorted(&self.entries)
    }

    pub fn l0(&self) -> usize {
        self.entries.len()
    }

    pub fn l1(&self) -> f64 {
        self.sorted_entries().iter().map(|(_, x)| x.abs()).sum()
    }

    pub fn norms(&self) -> (usize, f64) {
        (self.l0(), self.l1())
    }

    pub fn sum(&self) -> f64 {
        self.sorted_entries().iter().map(|(_, x)| x).sum()
    }

    /// `b(S)`.
    pub fn sum_over<'a>(&self, s: impl IntoIterator<Item = &'a Vertex>) -> f64 {
        s.into_iter().map(|&v| self.get(v)).sum()
    }

    /// `|Σ b(v)| ≤ 1e-9 · max(1, ‖b‖₁)`.
    pub fn is_balanced(&self) -> bool {
        self.sum().abs() <= balance_tolerance(self.l1())
    }

    pub fn check_finite(&self) -> Result<(), DemandError> {
        for (vertex, value) in self.sorted_entries() {
            if !value.is_finite() {
                return Err(DemandError::NonFinite { vertex, value });
            }
        }
        Ok(())
    }

    pub fn check_in_graph(&self, g: &Graph) -> Result<(), DemandError> {
        for (vertex, _) in self.sorted_entries() {
            if !g.contains(vertex) {
                return Err(DemandError::VertexOutOfRange {
                    vertex,
                    n: g.vertex_count(),
                });
            }
        }
        Ok(())
    }
}

pub fn balance_tolerance(l1: f64) -> f64 {
    BALANCE_TOL * l1.max(1.0)
}

/// `b − Bf`, unnormalized.
pub fn residual(g: &Graph, b: &SourceFunction, f: &Flow) -> SourceFunction {
    let mut r = b.clone();
    for (e, value) in f.iter() {
        let (u, v) = g.endpoints(e);
        r.add(u, -value);
        r.add(v, value);
    }
    r
}

/// `f ∈ R^E`, stored sparsely.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flow {
    entries: FxHashMap<EdgeId, f64>,
}

impl Flow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (EdgeId, f64)>) -> Self {
        let mut f = Self::new();
        for (e, x) in entries {
            f.add(e, x);
        }
        f
    }

    #[inline]
    pub fn get(&self, e: EdgeId) -> f64 {
        self.entries.get(&e).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, e: EdgeId, value: f64) {
        if value.abs() < PURGE_EPS {
            self.entries.remove(&e);
        } else {
            self.entries.insert(e, value);
        }
    }

    pub fn add(&mut self, e: EdgeId, delta: f64) {
        let value = self.get(e) + delta;
        self.set(e, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, f64)> + '_ {
        self.entries.iter().map(|(&e, &x)| (e, x))
    }

    pub fn sorted_entries(&self) -> Vec<(EdgeId, f64)> {
        sorted(&self.entries)
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `max_e |f(e)|`.
    pub fn congestion(&self) -> f64 {
        self.entries.values().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Flow {
        Flow::from_entries(self.iter().map(|(e, x)| (e, x * factor)))
    }
}

/// `b ∈ R^{V×[k]}`: one source function per commodity.
#[derive(Debug, Clone, PartialEq)]
pub struct KSource {
    commodities: Vec<SourceFunction>,
}

impl KSource {
    pub fn new(k: usize) -> Self {
        Self {
            commodities: vec![SourceFunction::new(); k],
        }
    }

    pub fn from_commodities(commodities: Vec<SourceFunction>) -> Self {
        Self { commodities }
    }

    pub fn single(b: SourceFunction) -> Self {
        Self {
            commodities: vec![b],
        }
    }

    pub fn k(&self) -> usize {
        self.commodities.len()
    }

    pub fn commodity(&self, j: usize) -> &SourceFunction {
        &self.commodities[j]
    }

    pub fn commodity_mut(&mut self, j: usize) -> &mut SourceFunction {
        &mut self.commodities[j]
    }

    pub fn commodities(&self) -> &[SourceFunction] {
        &self.commodities
    }

    /// `(Σ_j ‖b_j‖₀, Σ_j ‖b_j‖₁)`.
    pub fn norms(&self) -> (usize, f64) {
        self.commodities.iter().fold((0, 0.0), |(l0, l1), b| {
            let (a, c) = b.norms();
            (l0 + a, l1 + c)
        })
    }
}

/// `f ∈ R^{E×[k]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct KFlow {
    commodities: Vec<Flow>,
}

impl KFlow {
    pub fn new(k: usize) -> Self {
        Self {
            commodities: vec![Flow::new(); k],
        }
    }

    pub fn from_commodities(commodities: Vec<Flow>) -> Self {
        Self { commodities }
    }

    pub fn k(&self) -> usize {
        self.commodities.len()
    }

    pub fn commodity(&self, j: usize) -> &Flow {
        &self.commodities[j]
    }

    pub fn commodity_mut(&mut self, j: usize) -> &mut Flow {
        &mut self.commodities[j]
    }

    pub fn commodities(&self) -> &[Flow] {
        &self.commodities
    }

    /// Per-edge `Σ_j |f_j(e)|` over the union of supports.
    pub fn edge_loads(&self) -> FxHashMap<EdgeId, f64> {
        let mut loads: FxHashMap<EdgeId, f64> = FxHashMap::default();
        for f in &self.commodities {
            for (e, x) in f.iter() {
                *loads.entry(e).or_insert(0.0) += x.abs();
            }
        }
        loads
    }

    /// `max_e Σ_j |f_j(e)|`.
    pub fn congestion(&self) -> f64 {
        self.edge_loads().values().fold(0.0, |acc, &x| acc.max(x))
    }
}

/// `d` units from `source` to `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPair {
    pub source: Vertex,
    pub target: Vertex,
    pub amount: f64,
}

/// Splits a demand into weighted pairs with `Σ d_i (1_{s_i} − 1_{t_i}) = r`.
///
/// Surpluses and deficits are matched greedily in ascending vertex order; each
/// emitted pair exhausts at least one of the two entries, so at most `‖r‖₀`
/// pairs come out.
pub fn decompose_to_pairs(r: &SourceFunction) -> Result<Vec<WeightedPair>, DemandError> {
    r.check_finite()?;
    let l1 = r.l1();
    let sum = r.sum();
    let tolerance = balance_tolerance(l1);
    if sum.abs() > tolerance {
        return Err(DemandError::Unbalanced { sum, tolerance });
    }

    let entries = r.sorted_entries();
    let mut surplus: Vec<(Vertex, f64)> = entries.iter().copied().filter(|e| e.1 > 0.0).collect();
    let mut deficit: Vec<(Vertex, f64)> = entries
        .iter()
        .filter(|e| e.1 < 0.0)
        .map(|&(v, x)| (v, -x))
        .collect();
    // Remainders below this are rounding leftovers of the balance tolerance.
    let dust = tolerance.max(PURGE_EPS);

    let mut pairs = Vec::new();
    let (mut si, mut di) = (0, 0);
    while si < surplus.len() && di < deficit.len() {
        let amount = surplus[si].1.min(deficit[di].1);
        pairs.push(WeightedPair {
            source: surplus[si].0,
            target: deficit[di].0,
            amount,
        });
        surplus[si].1 -= amount;
        deficit[di].1 -= amount;
        if surplus[si].1 <= dust {
            si += 1;
        }
        if deficit[di].1 <= dust {
            di += 1;
        }
    }
    Ok(pairs)
}

/// Rebuilds `Σ d_i (1_{s_i} − 1_{t_i})`.
pub fn pairs_to_source(pairs: &[WeightedPair]) -> SourceFunction {
    let mut b = SourceFunction::new();
    for p in pairs {
        b.add(p.source, p.amount);
        b.add(p.target, -p.amount);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> Graph {
        Graph::new(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn residual_examples() {
        let g = single_edge();
        let b = SourceFunction::from_entries([(0, 1.0), (1, -1.0)]);
        assert!(residual(&g, &b, &Flow::from_entries([(0, 1.0)])).is_empty());
        assert_eq!(residual(&g, &b, &Flow::new()), b);
        let half = residual(&g, &b, &Flow::from_entries([(0, 0.5)]));
        assert_eq!(half.sorted_entries(), vec![(0, 0.5), (1, -0.5)]);
    }

    #[test]
    fn norms_examples() {
        let b = SourceFunction::from_entries([(0, 2.5), (3, -2.5)]);
        assert_eq!(b.norms(), (2, 5.0));
        assert_eq!(SourceFunction::new().norms(), (0, 0.0));
        let kb = KSource::from_commodities(vec![
            SourceFunction::from_entries([(0, 1.0), (1, -1.0)]),
            SourceFunction::from_entries([(2, 3.0), (4, -3.0)]),
        ]);
        assert_eq!(kb.norms(), (4, 8.0));
    }

    #[test]
    fn purges_float_noise() {
        let mut b = SourceFunction::from_entries([(0, 0.1)]);
        b.add(0, -0.1);
        assert_eq!(b.l0(), 0);
        let mut f = Flow::from_entries([(3, 1e-16)]);
        assert!(f.is_empty());
        f.add(3, 0.25);
        assert_eq!(f.support_size(), 1);
    }

    #[test]
    fn decompose_examples() {
        let one = decompose_to_pairs(&SourceFunction::from_entries([(0, 2.0), (1, -2.0)])).unwrap();
        assert_eq!(
            one,
            vec![WeightedPair {
                source: 0,
                target: 1,
                amount: 2.0
            }]
        );

        let r = SourceFunction::from_entries([(0, 3.0), (1, -1.0), (2, -2.0)]);
        let pairs = decompose_to_pairs(&r).unwrap();
        assert_eq!(
            pairs,
            vec![
                WeightedPair {
                    source: 0,
                    target: 1,
                    amount: 1.0
                },
                WeightedPair {
                    source: 0,
                    target: 2,
                    amount: 2.0
                },
            ]
        );
        assert_eq!(pairs_to_source(&pairs), r);

        assert!(decompose_to_pairs(&SourceFunction::new())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn decompose_rejects_unbalanced() {
        let r = SourceFunction::from_entries([(0, 1.0), (1, -0.5)]);
        assert!(matches!(
            decompose_to_pairs(&r),
            Err(DemandError::Unbalanced { .. })
        ));
    }

    #[test]
    fn kflow_congestion_sums_commodities() {
        let f = KFlow::from_commodities(vec![
            Flow::from_entries([(0, 0.5), (1, -0.25)]),
            Flow::from_entries([(0, -0.5)]),
        ]);
        assert_eq!(f.congestion(), 1.0);
        assert_eq!(f.commodity(0).congestion(), 0.5);
    }
}
