//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::error::FormatError;
use crate::flow::{KSource, SourceFunction};
use crate::graph::{Graph, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Path {
        n: usize,
    },
    Grid {
        rows: usize,
        cols: usize,
    },
    /// Union of `d/2` uniformly random Hamiltonian cycles: `d`-regular, may
    /// contain parallel edges, never self-loops.
    RandomRegular {
        n: usize,
        d: usize,
    },
    /// `m` distinct edges chosen uniformly.
    RandomGnm {
        n: usize,
        m: usize,
    },
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn invalid(msg: impl Into<String>) -> FormatError {
    FormatError::Invalid(msg.into())
}

pub fn generate_graph(kind: GraphKind, seed: u64) -> Result<Graph, FormatError> {
    let mut rng = rng(seed);
    let (n, edges) = match kind {
        GraphKind::Path { n } => {
            let edges = (1..n as Vertex).map(|v| (v - 1, v)).collect();
            (n, edges)
        }
        GraphKind::Grid { rows, cols } => {
            let id = |r: usize, c: usize| (r * cols + c) as Vertex;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            (rows * cols, edges)
        }
        GraphKind::RandomRegular { n, d } => {
            if d % 2 != 0 || n < 3 {
                return Err(invalid(format!(
                    "random-regular needs even d and n >= 3, got n = {n}, d = {d}"
                )));
            }
            let mut order: Vec<Vertex> = (0..n as Vertex).collect();
            let mut edges = Vec::with_capacity(n * d / 2);
            for _ in 0..d / 2 {
                order.shuffle(&mut rng);
                for i in 0..n {
                    edges.push((order[i], order[(i + 1) % n]));
                }
            }
            (n, edges)
        }
        GraphKind::RandomGnm { n, m } => {
            let max = n.saturating_mul(n.saturating_sub(1)) / 2;
            if m > max {
                return Err(invalid(format!(
                    "random-gnm: {m} edges do not fit on {n} vertices"
                )));
            }
            let mut seen: FxHashSet<(Vertex, Vertex)> = FxHashSet::default();
            let mut edges = Vec::with_capacity(m);
            while edges.len() < m {
                let u = rng.random_range(0..n as Vertex);
                let v = rng.random_range(0..n as Vertex);
                if u != v && seen.insert((u.min(v), u.max(v))) {
                    edges.push((u, v));
                }
            }
            (n, edges)
        }
    };
    Ok(Graph::new(n, &edges)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DemandSpec {
    /// One commodity per `(s, t, d)`: `+d` at `s`, `−d` at `t`.
    Pairs(Vec<(Vertex, Vertex, f64)>),
    /// Per commodity, `l0` vertices carrying total mass `l1`, half of it
    /// positive, each entry bounded by its degree.
    RandomBalanced { l0: usize, l1: f64, k: usize },
}

impl DemandSpec {
    /// Parses `pairs s t d [s t d ...]` or `random-balanced l0 l1`.
    pub fn parse(spec: &str, k: usize) -> Result<Self, FormatError> {
        let words: Vec<&str> = spec.split_whitespace().collect();
        let num = |w: &str| -> Result<f64, FormatError> {
            w.parse()
                .map_err(|_| invalid(format!("bad number `{w}` in demand spec")))
        };
        match words.split_first() {
            Some((&"pairs", rest)) if !rest.is_empty() && rest.len() % 3 == 0 => {
                let mut triples = Vec::new();
                for t in rest.chunks(3) {
                    let s = num(t[0])? as Vertex;
                    let u = num(t[1])? as Vertex;
                    triples.push((s, u, num(t[2])?));
                }
                Ok(DemandSpec::Pairs(triples))
            }
            Some((&"random-balanced", [l0, l1])) => Ok(DemandSpec::RandomBalanced {
                l0: num(l0)? as usize,
                l1: num(l1)?,
                k,
            }),
            _ => Err(invalid(format!("unrecognized demand spec `{spec}`"))),
        }
    }
}

/// Splits `total` over `caps` proportionally to `shares`, never exceeding a cap.
fn water_fill(shares: &[f64], caps: &[f64], total: f64) -> Option<Vec<f64>> {
    if caps.iter().sum::<f64>() < total {
        return None;
    }
    let mut out = vec![0.0; shares.len()];
    let mut open: Vec<usize> = (0..shares.len()).collect();
    let mut left = total;
    while left > 0.0 && !open.is_empty() {
        let weight: f64 = open.iter().map(|&i| shares[i]).sum();
        let mut next = Vec::with_capacity(open.len());
        let mut spent = 0.0;
        for &i in &open {
            let want = left * shares[i] / weight;
            let room = caps[i] - out[i];
            if want >= room {
                out[i] = caps[i];
                spent += room;
            } else {
                out[i] += want;
                spent += want;
                next.push(i);
            }
        }
        left -= spent;
        if next.len() == open.len() {
            break;
        }
        open = next;
    }
    Some(out)
}

fn random_balanced(
    g: &Graph,
    l0: usize,
    l1: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SourceFunction, FormatError> {
    let mut candidates: Vec<Vertex> = (0..g.vertex_count() as Vertex)
        .filter(|&v| g.degree(v) > 0)
        .collect();
    if l0 < 2 || l0 > candidates.len() || !(l1 > 0.0) {
        return Err(invalid(format!(
            "random-balanced needs 2 <= l0 <= {} and l1 > 0",
            candidates.len()
        )));
    }
    let (chosen, _) = candidates.partial_shuffle(rng, l0);
    let chosen = chosen.to_vec();
    let half = l0 / 2;
    let mut b = SourceFunction::new();
    for (side, sign) in [(&chosen[..half], 1.0), (&chosen[half..], -1.0)] {
        let shares: Vec<f64> = side.iter().map(|_| rng.random_range(0.5..1.5)).collect();
        let caps: Vec<f64> = side.iter().map(|&v| g.degree(v) as f64).collect();
        let amounts = water_fill(&shares, &caps, l1 / 2.0).ok_or_else(|| {
            invalid(format!(
                "random-balanced: mass {} exceeds the chosen degrees",
                l1 / 2.0
            ))
        })?;
        for (&v, &x) in side.iter().zip(&amounts) {
            b.set(v, sign * x);
        }
    }
    Ok(b)
}

pub fn generate_demand(g: &Graph, spec: &DemandSpec, seed: u64) -> Result<KSource, FormatError> {
    match spec {
        DemandSpec::Pairs(triples) => {
            let mut out = Vec::with_capacity(triples.len());
            for &(s, t, d) in triples {
                if !g.contains(s) || !g.contains(t) || s == t {
                    return Err(invalid(format!(
                        "pair ({s}, {t}) is not two distinct vertices of the graph"
                    )));
                }
                out.push(SourceFunction::from_entries([(s, d), (t, -d)]));
            }
            Ok(KSource::from_commodities(out))
        }
        DemandSpec::RandomBalanced { l0, l1, k } => {
            let mut rng = rng(seed ^ 0x5eed_d3a4_d000_0001);
            let commodities = (0..*k)
                .map(|_| random_balanced(g, *l0, *l1, &mut rng))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(KSource::from_commodities(commodities))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::format_graph;

    #[test]
    fn path_of_three_has_two_edges() {
        let g = generate_graph(GraphKind::Path { n: 3 }, 0).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn grid_shape() {
        let g = generate_graph(GraphKind::Grid { rows: 3, cols: 4 }, 0).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (12, 17));
    }

    #[test]
    fn random_regular_is_regular_and_deterministic() {
        let kind = GraphKind::RandomRegular { n: 100, d: 4 };
        let a = generate_graph(kind, 7).unwrap();
        let b = generate_graph(kind, 7).unwrap();
        assert_eq!(format_graph(&a), format_graph(&b));
        assert!((0..100).all(|v| a.degree(v) == 4));
        assert_ne!(
            format_graph(&a),
            format_graph(&generate_graph(kind, 8).unwrap())
        );
        assert!(generate_graph(GraphKind::RandomRegular { n: 10, d: 3 }, 0).is_err());
    }

    #[test]
    fn gnm_edges_are_distinct() {
        let g = generate_graph(GraphKind::RandomGnm { n: 10, m: 45 }, 1).unwrap();
        let set: FxHashSet<_> = g
            .edges()
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        assert_eq!(set.len(), 45);
        assert!(generate_graph(GraphKind::RandomGnm { n: 10, m: 46 }, 1).is_err());
    }

    #[test]
    fn random_balanced_hits_its_norms() {
        let g = generate_graph(GraphKind::RandomRegular { n: 200, d: 4 }, 3).unwrap();
        let b = generate_demand(
            &g,
            &DemandSpec::RandomBalanced {
                l0: 10,
                l1: 5.0,
                k: 2,
            },
            3,
        )
        .unwrap();
        for bj in b.commodities() {
            assert_eq!(bj.l0(), 10);
            assert!((bj.l1() - 5.0).abs() <= 1e-9);
            assert!(bj.sum().abs() <= 1e-9);
            assert!(bj.iter().all(|(v, x)| x.abs() <= g.degree(v) as f64));
        }
    }

    #[test]
    fn water_fill_respects_caps() {
        let out = water_fill(&[1.0, 1.0, 1.0], &[0.5, 5.0, 5.0], 3.0).unwrap();
        assert_eq!(out[0], 0.5);
        assert!((out.iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!(water_fill(&[1.0], &[1.0], 2.0).is_none());
    }

    #[test]
    fn demand_spec_parsing() {
        assert_eq!(
            DemandSpec::parse("pairs 0 2 1.5", 1).unwrap(),
            DemandSpec::Pairs(vec![(0, 2, 1.5)])
        );
        assert_eq!(
            DemandSpec::parse("random-balanced 10 5", 3).unwrap(),
            DemandSpec::RandomBalanced {
                l0: 10,
                l1: 5.0,
                k: 3
            }
        );
        assert!(DemandSpec::parse("pairs 0 2", 1).is_err());
        assert!(DemandSpec::parse("bogus", 1).is_err());
    }
}
