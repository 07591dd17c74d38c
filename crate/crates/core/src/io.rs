//! Text formats for graphs and demands, and JSON artifacts for solver output.
//!
//! Graph files hold an `n m` header followed by `m` lines `u v`. Demand files
//! hold a `k` header followed by lines `j v value` with `j` in `1..=k`. Blank
//! lines and `#` comments are ignored in both.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::FormatError;
use crate::flow::{Flow, KFlow, KSource, SourceFunction};
use crate::graph::{EdgeId, Graph, Vertex};
use crate::multi::{MultiResult, PotentialCertificate};
use crate::single::{CutCertificate, SingleResult};
use crate::verify::{
    verify_cut_certificate, verify_flow_output, verify_potential_certificate, VerifyReport,
    VerifyViolation, ViolationKind,
};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn parse_field<T: std::str::FromStr>(
    path: &str,
    line: usize,
    field: &str,
    what: &str,
) -> Result<T, FormatError> {
    field.parse().map_err(|_| FormatError::Parse {
        path: path.to_string(),
        line,
        message: format!("invalid {what} `{field}`"),
    })
}

fn parse_error(path: &str, line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses a graph file; `path` only labels diagnostics.
pub fn parse_graph(text: &str, path: &str) -> Result<Graph, FormatError> {
    let mut lines = content_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "missing `n m` header"))?;
    if header.len() != 2 {
        return Err(parse_error(path, line, "header must be `n m`"));
    }
    let n: usize = parse_field(path, line, header[0], "vertex count")?;
    let m: usize = parse_field(path, line, header[1], "edge count")?;
    let mut edges = Vec::with_capacity(m);
    let mut last = line;
    for (line, fields) in lines {
        if fields.len() != 2 {
            return Err(parse_error(path, line, "edge line must be `u v`"));
        }
        let u: Vertex = parse_field(path, line, fields[0], "vertex")?;
        let v: Vertex = parse_field(path, line, fields[1], "vertex")?;
        if u as usize >= n || v as usize >= n {
            return Err(parse_error(
                path,
                line,
                format!("edge ({u}, {v}) leaves 0..{n}"),
            ));
        }
        if u == v {
            return Err(parse_error(path, line, format!("self-loop at {u}")));
        }
        edges.push((u, v));
        last = line;
    }
    if edges.len() != m {
        return Err(parse_error(
            path,
            last,
            format!("header promises {m} edges, found {}", edges.len()),
        ));
    }
    Ok(Graph::new(n, &edges)?)
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.vertex_count(), g.edge_count());
    for &(u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Parses a demand file against a graph with `n` vertices.
pub fn parse_demand(text: &str, path: &str, n: usize) -> Result<KSource, FormatError> {
    let mut lines = content_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "missing `k` header"))?;
    if header.len() != 1 {
        return Err(parse_error(path, line, "header must be `k`"));
    }
    let k: usize = parse_field(path, line, header[0], "commodity count")?;
    if k == 0 {
        return Err(parse_error(path, line, "k must be at least 1"));
    }
    let mut b = KSource::new(k);
    for (line, fields) in lines {
        if fields.len() != 3 {
            return Err(parse_error(path, line, "demand line must be `j v value`"));
        }
        let j: usize = parse_field(path, line, fields[0], "commodity")?;
        let v: Vertex = parse_field(path, line, fields[1], "vertex")?;
        let x: f64 = parse_field(path, line, fields[2], "value")?;
        if j == 0 || j > k {
            return Err(parse_error(
                path,
                line,
                format!("commodity {j} outside 1..={k}"),
            ));
        }
        if v as usize >= n {
            return Err(parse_error(
                path,
                line,
                format!("vertex {v} outside 0..{n}"),
            ));
        }
        if !x.is_finite() {
            return Err(parse_error(path, line, format!("value {x} is not finite")));
        }
        let bj = b.commodity_mut(j - 1);
        if bj.get(v) != 0.0 {
            return Err(parse_error(
                path,
                line,
                format!("duplicate entry for commodity {j}, vertex {v}"),
            ));
        }
        bj.set(v, x);
    }
    Ok(b)
}

pub fn format_demand(b: &KSource) -> String {
    let mut out = format!("{}\n", b.k());
    for (j, bj) in b.commodities().iter().enumerate() {
        for (v, x) in bj.sorted_entries() {
            out.push_str(&format!("{} {v} {x:?}\n", j + 1));
        }
    }
    out
}

fn read(path: &Path) -> Result<String, FormatError> {
    Ok(fs::read_to_string(path)?)
}

pub fn read_graph(path: &Path) -> Result<Graph, FormatError> {
    parse_graph(&read(path)?, &path.display().to_string())
}

pub fn read_demand(path: &Path, n: usize) -> Result<KSource, FormatError> {
    parse_demand(&read(path)?, &path.display().to_string(), n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    /// `‖b_j − Bf̄_j‖₁` per commodity.
    pub l1: Vec<f64>,
    /// `max_{v,j} |b_j(v) − (Bf̄_j)_v| / deg(v)`.
    pub max_relative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEntry {
    pub edge: EdgeId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialEntry {
    pub vertex: Vertex,
    /// 1-based, as in demand files.
    pub commodity: usize,
    pub value: f64,
}

/// Solver output as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Artifact {
    Flow {
        eps: f64,
        k: usize,
        iterations: usize,
        /// Per commodity, nonzero `f̄_j(e)` by ascending edge id.
        flows: Vec<Vec<FlowEntry>>,
        residual: ResidualSummary,
    },
    CutCertificate {
        set: Vec<Vertex>,
        b_of_s: f64,
        boundary: usize,
        volume: usize,
    },
    PotentialCertificate {
        phi: Vec<PotentialEntry>,
        lhs: f64,
        rhs: f64,
    },
}

fn summarize(g: &Graph, residuals: &[SourceFunction]) -> ResidualSummary {
    let mut max_relative: f64 = 0.0;
    for r in residuals {
        for (v, x) in r.iter() {
            let d = g.degree(v).max(1) as f64;
            max_relative = max_relative.max(x.abs() / d);
        }
    }
    ResidualSummary {
        l1: residuals.iter().map(SourceFunction::l1).collect(),
        max_relative,
    }
}

fn flow_entries(f: &Flow) -> Vec<FlowEntry> {
    f.sorted_entries()
        .into_iter()
        .map(|(edge, value)| FlowEntry { edge, value })
        .collect()
}

impl Artifact {
    pub fn from_cut(c: &CutCertificate) -> Self {
        Artifact::CutCertificate {
            set: c.set.clone(),
            b_of_s: c.b_of_s,
            boundary: c.boundary,
            volume: c.volume,
        }
    }

    pub fn from_potentials(c: &PotentialCertificate) -> Self {
        Artifact::PotentialCertificate {
            phi: c
                .phi
                .iter()
                .map(|&(vertex, j, value)| PotentialEntry {
                    vertex,
                    commodity: j + 1,
                    value,
                })
                .collect(),
            lhs: c.lhs,
            rhs: c.rhs,
        }
    }

    pub fn from_single(g: &Graph, result: &SingleResult, eps: f64) -> Self {
        match result {
            SingleResult::Certificate(c) => Self::from_cut(c),
            SingleResult::Flow(out) => Artifact::Flow {
                eps,
                k: 1,
                iterations: out.iterations,
                flows: vec![flow_entries(&out.flow)],
                residual: summarize(g, std::slice::from_ref(&out.residual)),
            },
        }
    }

    pub fn from_multi(g: &Graph, result: &MultiResult, eps: f64) -> Self {
        match result {
            MultiResult::Certificate(c) => Self::from_potentials(c),
            MultiResult::Flow(out) => Artifact::Flow {
                eps,
                k: out.flow.k(),
                iterations: out.iterations,
                flows: out.flow.commodities().iter().map(flow_entries).collect(),
                residual: summarize(g, &out.residuals),
            },
        }
    }

    pub fn is_certificate(&self) -> bool {
        !matches!(self, Artifact::Flow { .. })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        Self::from_json(&read(path)?)
    }
}

fn malformed(location: String, measured: f64, bound: f64) -> VerifyReport {
    VerifyReport {
        ok: false,
        violations: vec![VerifyViolation {
            kind: ViolationKind::Malformed,
            location,
            measured,
            bound,
        }],
    }
}

/// Checks an artifact against the instance it claims to solve.
///
/// Flows are checked for congestion and residual at `eps` (the artifact's own
/// `eps` when `None`); certificates are re-evaluated from scratch.
pub fn verify_artifact(
    g: &Graph,
    b: &KSource,
    artifact: &Artifact,
    eps: Option<f64>,
) -> VerifyReport {
    match artifact {
        Artifact::Flow {
            eps: own, k, flows, ..
        } => {
            if *k != b.k() || flows.len() != b.k() {
                return malformed("commodity count".into(), flows.len() as f64, b.k() as f64);
            }
            let mut commodities = Vec::with_capacity(flows.len());
            for (j, entries) in flows.iter().enumerate() {
                let mut flow = Flow::new();
                for x in entries {
                    let location = format!("edge {}, commodity {}", x.edge, j + 1);
                    if x.edge as usize >= g.edge_count() {
                        return malformed(location, x.edge as f64, g.edge_count() as f64);
                    }
                    if !x.value.is_finite() || flow.get(x.edge) != 0.0 {
                        return malformed(location, x.value, 1.0);
                    }
                    flow.set(x.edge, x.value);
                }
                commodities.push(flow);
            }
            verify_flow_output(
                g,
                b,
                &KFlow::from_commodities(commodities),
                eps.unwrap_or(*own),
            )
        }
        Artifact::CutCertificate { set, .. } => {
            if b.k() != 1 {
                return malformed("cut certificate for k > 1".into(), b.k() as f64, 1.0);
            }
            verify_cut_certificate(g, b.commodity(0), set)
        }
        Artifact::PotentialCertificate { phi, .. } => {
            let mut entries = Vec::with_capacity(phi.len());
            for p in phi {
                if p.commodity == 0 || p.commodity > b.k() {
                    return malformed(
                        format!("vertex {}", p.vertex),
                        p.commodity as f64,
                        b.k() as f64,
                    );
                }
                entries.push((p.vertex, p.commodity - 1, p.value));
            }
            verify_potential_certificate(g, b, &entries)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = Graph::new(3, &[(0, 1), (2, 1)]).unwrap();
        let text = format_graph(&g);
        assert_eq!(text, "3 2\n0 1\n2 1\n");
        assert_eq!(parse_graph(&text, "g").unwrap(), g);
    }

    #[test]
    fn graph_diagnostics_carry_line_numbers() {
        let err = parse_graph("# comment\n3 2\n0 1\n\n1 x\n", "g.txt").unwrap_err();
        assert_eq!(err.to_string(), "g.txt:5: invalid vertex `x`");
        let err = parse_graph("3 2\n0 1\n", "g.txt").unwrap_err();
        assert!(err.to_string().contains("promises 2 edges"));
        assert!(parse_graph("2 1\n0 5\n", "g").is_err());
        assert!(parse_graph("2 1\n1 1\n", "g").is_err());
        assert!(parse_graph("", "g").is_err());
    }

    #[test]
    fn demand_round_trip() {
        let text = "2\n1 0 0.5\n1 1 -0.5\n2 2 0.1\n2 0 -0.1\n";
        let b = parse_demand(text, "d", 3).unwrap();
        assert_eq!(b.k(), 2);
        assert_eq!(b.commodity(1).get(2), 0.1);
        assert_eq!(parse_demand(&format_demand(&b), "d", 3).unwrap(), b);
    }

    #[test]
    fn demand_diagnostics() {
        assert!(parse_demand("1\n2 0 1.0\n", "d", 3)
            .unwrap_err()
            .to_string()
            .contains("commodity 2"));
        assert!(parse_demand("1\n1 7 1.0\n", "d", 3).is_err());
        assert!(parse_demand("1\n1 0 1.0\n1 0 2.0\n", "d", 3).is_err());
        assert!(parse_demand("1\n1 0 nan\n", "d", 3).is_err());
        assert!(parse_demand("0\n", "d", 3).is_err());
    }

    #[test]
    fn artifact_json_round_trip() {
        let a = Artifact::Flow {
            eps: 0.1,
            k: 1,
            iterations: 10,
            flows: vec![vec![FlowEntry {
                edge: 0,
                value: 0.1 + 0.2,
            }]],
            residual: ResidualSummary {
                l1: vec![1.0 / 3.0],
                max_relative: 0.05,
            },
        };
        let text = a.to_json();
        assert!(text.contains("\"kind\": \"flow\""));
        assert_eq!(Artifact::from_json(&text).unwrap(), a);

        let c = Artifact::CutCertificate {
            set: vec![0],
            b_of_s: 2.0,
            boundary: 1,
            volume: 1,
        };
        assert!(c.to_json().contains("cut-certificate"));
        assert_eq!(Artifact::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn verify_artifact_checks_strictness_and_shape() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let b = KSource::single(SourceFunction::from_entries([(0, 1.0), (1, -1.0)]));
        let tight = Artifact::CutCertificate {
            set: vec![0],
            b_of_s: 1.0,
            boundary: 1,
            volume: 1,
        };
        assert!(!verify_artifact(&g, &b, &tight, None).ok);
        let bad_edge = Artifact::Flow {
            eps: 0.1,
            k: 1,
            iterations: 1,
            flows: vec![vec![FlowEntry {
                edge: 9,
                value: 1.0,
            }]],
            residual: ResidualSummary {
                l1: vec![0.0],
                max_relative: 0.0,
            },
        };
        let report = verify_artifact(&g, &b, &bad_edge, None);
        assert_eq!(report.violations[0].kind, ViolationKind::Malformed);
    }
}
