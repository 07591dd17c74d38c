//! Independent checkers for solver outputs.
//!
//! Everything here recomputes its quantities from the graph and the inputs
//! and shares no code path with the solvers beyond the graph accessors.

use std::collections::VecDeque;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::error::DemandError;
use crate::flow::{KFlow, KSource, SourceFunction};
use crate::graph::{Graph, Vertex};

/// Absolute slack on flow-output checks.
pub const FLOW_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Congestion,
    Residual,
    CutInequality,
    PotentialInequality,
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyViolation {
    pub kind: ViolationKind,
    pub location: String,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub violations: Vec<VerifyViolation>,
}

impl VerifyReport {
    fn from_violations(violations: Vec<VerifyViolation>) -> Self {
        Self {
            ok: violations.is_empty(),
            violations,
        }
    }
}

/// Checks `|b(S)| > δS`.
pub fn verify_cut_certificate(g: &Graph, b: &SourceFunction, s: &[Vertex]) -> VerifyReport {
    let mut members: Vec<Vertex> = s.to_vec();
    members.sort_unstable();
    members.dedup();
    if let Some(&bad) = members.iter().find(|&&v| !g.contains(v)) {
        return VerifyReport::from_violations(vec![VerifyViolation {
            kind: ViolationKind::Malformed,
            location: format!("vertex {bad}"),
            measured: bad as f64,
            bound: g.vertex_count() as f64,
        }]);
    }
    let b_of_s: f64 = members.iter().map(|&v| b.get(v)).sum();
    let boundary = g.boundary_size(&members) as f64;
    let mut violations = Vec::new();
    if !(b_of_s.abs() > boundary) {
        violations.push(VerifyViolation {
            kind: ViolationKind::CutInequality,
            location: format!("set of {} vertices", members.len()),
            measured: b_of_s.abs(),
            bound: boundary,
        });
    }
    VerifyReport::from_violations(violations)
}

/// `(⟨φ, ⊕b_j⟩, Σ_e max_j |φ_{u,j} − φ_{v,j}|)`, scanning every edge.
pub fn potential_certificate_sides(
    g: &Graph,
    b: &KSource,
    phi: &[(Vertex, usize, f64)],
) -> (f64, f64) {
    let mut by_vertex: FxHashMap<Vertex, FxHashMap<usize, f64>> = FxHashMap::default();
    for &(v, j, x) in phi {
        *by_vertex.entry(v).or_default().entry(j).or_insert(0.0) += x;
    }
    let mut lhs = 0.0;
    let mut sorted_phi: Vec<(Vertex, usize, f64)> = by_vertex
        .iter()
        .flat_map(|(&v, row)| row.iter().map(move |(&j, &x)| (v, j, x)))
        .collect();
    sorted_phi.sort_unstable_by_key(|a| (a.0, a.1));
    for (v, j, x) in sorted_phi {
        if j < b.k() {
            lhs += x * b.commodity(j).get(v);
        }
    }

    let empty = FxHashMap::default();
    let mut rhs = 0.0;
    for &(u, v) in g.edges() {
        let pu = by_vertex.get(&u).unwrap_or(&empty);
        let pv = by_vertex.get(&v).unwrap_or(&empty);
        if pu.is_empty() && pv.is_empty() {
            continue;
        }
        let commodities: FxHashSet<usize> = pu.keys().chain(pv.keys()).copied().collect();
        let gap = commodities
            .into_iter()
            .map(|j| (pu.get(&j).unwrap_or(&0.0) - pv.get(&j).unwrap_or(&0.0)).abs())
            .fold(0.0, f64::max);
        rhs += gap;
    }
    (lhs, rhs)
}

/// Checks `⟨φ, ⊕b_j⟩ > Σ_e max_j |φ_{u,j} − φ_{v,j}|`.
///
/// The right side is the largest value `Σ_e Σ_j f_j(e)(φ_{u,j} − φ_{v,j})` can
/// take over feasible k-commodity flows, so a strict excess rules out every
/// feasible routing.
pub fn verify_potential_certificate(
    g: &Graph,
    b: &KSource,
    phi: &[(Vertex, usize, f64)],
) -> VerifyReport {
    let mut violations = Vec::new();
    for &(v, j, x) in phi {
        if !g.contains(v) || j >= b.k() || !x.is_finite() {
            violations.push(VerifyViolation {
                kind: ViolationKind::Malformed,
                location: format!("vertex {v}, commodity {}", j + 1),
                measured: x,
                bound: 0.0,
            });
        }
    }
    if !violations.is_empty() {
        return VerifyReport::from_violations(violations);
    }
    let (lhs, rhs) = potential_certificate_sides(g, b, phi);
    if !(lhs > rhs) {
        violations.push(VerifyViolation {
            kind: ViolationKind::PotentialInequality,
            location: "certificate".into(),
            measured: lhs,
            bound: rhs,
        });
    }
    VerifyReport::from_violations(violations)
}

/// Checks congestion `Σ_j |f_j(e)| ≤ 1` and residuals `|b_j(v) − (Bf_j)_v| ≤ eps·deg(v)`.
pub fn verify_flow_output(g: &Graph, b: &KSource, f: &KFlow, eps: f64) -> VerifyReport {
    let mut violations = Vec::new();
    if f.k() != b.k() {
        violations.push(VerifyViolation {
            kind: ViolationKind::Malformed,
            location: "commodity count".into(),
            measured: f.k() as f64,
            bound: b.k() as f64,
        });
        return VerifyReport::from_violations(violations);
    }

    let mut load: FxHashMap<u32, f64> = FxHashMap::default();
    for (j, fj) in f.commodities().iter().enumerate() {
        for (e, x) in fj.sorted_entries() {
            if e as usize >= g.edge_count() || !x.is_finite() {
                violations.push(VerifyViolation {
                    kind: ViolationKind::Malformed,
                    location: format!("edge {e}, commodity {}", j + 1),
                    measured: x,
                    bound: g.edge_count() as f64,
                });
                continue;
            }
            *load.entry(e).or_insert(0.0) += x.abs();
        }
    }
    if !violations.is_empty() {
        return VerifyReport::from_violations(violations);
    }
    let mut loads: Vec<(u32, f64)> = load.into_iter().collect();
    loads.sort_unstable_by_key(|&(e, _)| e);
    for (e, x) in loads {
        if x > 1.0 + FLOW_TOL {
            violations.push(VerifyViolation {
                kind: ViolationKind::Congestion,
                location: format!("edge {e}"),
                measured: x,
                bound: 1.0,
            });
        }
    }

    for (j, (bj, fj)) in b.commodities().iter().zip(f.commodities()).enumerate() {
        let mut divergence: FxHashMap<Vertex, f64> = FxHashMap::default();
        for (e, x) in fj.iter() {
            let (u, v) = g.endpoints(e);
            *divergence.entry(u).or_insert(0.0) += x;
            *divergence.entry(v).or_insert(0.0) -= x;
        }
        let mut vertices: Vec<Vertex> = divergence
            .keys()
            .copied()
            .chain(bj.iter().map(|(v, _)| v))
            .collect();
        vertices.sort_unstable();
        vertices.dedup();
        for v in vertices {
            if !g.contains(v) {
                violations.push(VerifyViolation {
                    kind: ViolationKind::Malformed,
                    location: format!("vertex {v}, commodity {}", j + 1),
                    measured: v as f64,
                    bound: g.vertex_count() as f64,
                });
                continue;
            }
            let r = (bj.get(v) - divergence.get(&v).copied().unwrap_or(0.0)).abs();
            let bound = eps * g.degree(v) as f64;
            if r > bound + FLOW_TOL {
                violations.push(VerifyViolation {
                    kind: ViolationKind::Residual,
                    location: format!("vertex {v}, commodity {}", j + 1),
                    measured: r,
                    bound,
                });
            }
        }
    }
    VerifyReport::from_violations(violations)
}

struct Arc {
    to: usize,
    cap: i64,
}

struct MaxFlow {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl MaxFlow {
    fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, forward: i64, backward: i64) {
        self.out[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap: forward });
        self.out[to].push(self.arcs.len());
        self.arcs.push(Arc {
            to: from,
            cap: backward,
        });
    }

    // Shortest augmenting paths by BFS.
    fn run(&mut self, source: usize, sink: usize) -> i64 {
        let nodes = self.out.len();
        let mut total = 0;
        loop {
            let mut parent_arc = vec![usize::MAX; nodes];
            let mut seen = vec![false; nodes];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(x) = queue.pop_front() {
                if x == sink {
                    break;
                }
                for &a in &self.out[x] {
                    let arc = &self.arcs[a];
                    if arc.cap > 0 && !seen[arc.to] {
                        seen[arc.to] = true;
                        parent_arc[arc.to] = a;
                        queue.push_back(arc.to);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let mut bottleneck = i64::MAX;
            let mut x = sink;
            while x != source {
                let a = parent_arc[x];
                bottleneck = bottleneck.min(self.arcs[a].cap);
                x = self.arcs[a ^ 1].to;
            }
            let mut x = sink;
            while x != source {
                let a = parent_arc[x];
                self.arcs[a].cap -= bottleneck;
                self.arcs[a ^ 1].cap += bottleneck;
                x = self.arcs[a ^ 1].to;
            }
            total += bottleneck;
        }
    }
}

/// Exact single-commodity feasibility by max-flow on the standard reduction.
///
/// Every `scale · b(v)` must be integral; each graph edge gets capacity
/// `scale` in both directions. Unbalanced source functions are infeasible.
pub fn oracle_feasible_single(
    g: &Graph,
    b: &SourceFunction,
    scale: i64,
) -> Result<bool, DemandError> {
    b.check_finite()?;
    b.check_in_graph(g)?;
    let mut scaled = Vec::new();
    for (v, x) in b.sorted_entries() {
        let y = x * scale as f64;
        let rounded = y.round();
        if (y - rounded).abs() > 1e-9 * y.abs().max(1.0) {
            return Err(DemandError::NotIntegral {
                vertex: v,
                value: y,
            });
        }
        scaled.push((v as usize, rounded as i64));
    }
    let supply: i64 = scaled.iter().filter(|e| e.1 > 0).map(|e| e.1).sum();
    let demand: i64 = scaled.iter().filter(|e| e.1 < 0).map(|e| -e.1).sum();
    if supply != demand {
        return Ok(false);
    }
    let n = g.vertex_count();
    let (source, sink) = (n, n + 1);
    let mut net = MaxFlow::new(n + 2);
    for &(u, v) in g.edges() {
        net.add_edge(u as usize, v as usize, scale, scale);
    }
    for &(v, x) in &scaled {
        if x > 0 {
            net.add_edge(source, v, x, 0);
        } else {
            net.add_edge(v, sink, -x, 0);
        }
    }
    Ok(net.run(source, sink) == supply)
}
