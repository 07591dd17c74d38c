#![allow(dead_code)]

use localflow::generate::{generate_demand, generate_graph, DemandSpec, GraphKind};
use localflow::mwu::{Index, RoundedWeights, WeightLedger};
use localflow::{Graph, KSource, SourceFunction, Vertex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub label: String,
    pub graph: Graph,
    pub demand: KSource,
    pub eps: f64,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A connected-ish random graph on `2..=max_n` vertices, at least one edge.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let seed = rng.random();
    let kind = match rng.random_range(0..4) {
        0 => GraphKind::Path {
            n: rng.random_range(2..=max_n),
        },
        1 => {
            let rows = rng.random_range(1..=(max_n as f64).sqrt() as usize);
            let cols = rng.random_range(2..=(max_n / rows).max(2));
            GraphKind::Grid { rows, cols }
        }
        2 => GraphKind::RandomRegular {
            n: rng.random_range(3..=max_n.max(3)),
            d: 2 * rng.random_range(1..=3),
        },
        _ => {
            let n = rng.random_range(3..=max_n.max(3));
            let m = rng.random_range(n..=(2 * n).min(n * (n - 1) / 2));
            GraphKind::RandomGnm { n, m }
        }
    };
    generate_graph(kind, seed).unwrap()
}

fn non_isolated(g: &Graph) -> usize {
    (0..g.vertex_count() as Vertex)
        .filter(|&v| g.degree(v) > 0)
        .count()
}

/// `k` balanced commodities with entries bounded by degree; `load` scales `‖b_j‖₁`
/// relative to the support size.
pub fn random_demand(rng: &mut ChaCha8Rng, g: &Graph, k: usize, load: f64) -> KSource {
    let cap = non_isolated(g).min(10);
    let l0 = rng.random_range(2..=cap.max(2));
    let l1 = (load * l0 as f64 * rng.random_range(0.2..1.0)).max(0.1);
    let spec = DemandSpec::RandomBalanced { l0, l1, k };
    match generate_demand(g, &spec, rng.random()) {
        Ok(b) => b,
        Err(_) => {
            let spec = DemandSpec::RandomBalanced { l0: 2, l1: 0.5, k };
            generate_demand(g, &spec, rng.random()).unwrap()
        }
    }
}

/// Integral single-commodity demand: a few `±d` pairs, sometimes overloaded.
pub fn integral_demand(rng: &mut ChaCha8Rng, g: &Graph) -> SourceFunction {
    let n = g.vertex_count() as Vertex;
    let mut b = SourceFunction::new();
    for _ in 0..rng.random_range(1..=3) {
        let s = rng.random_range(0..n);
        let t = rng.random_range(0..n);
        if s == t {
            continue;
        }
        let d = rng.random_range(1..=3) as f64;
        b.add(s, d);
        b.add(t, -d);
    }
    if b.is_empty() {
        b.set(0, 1.0);
        b.set(n - 1, -1.0);
    }
    b
}

/// Pair demand per commodity with the given amount.
pub fn pair_demand(rng: &mut ChaCha8Rng, g: &Graph, k: usize, amount: f64) -> KSource {
    let n = g.vertex_count() as Vertex;
    let commodities = (0..k)
        .map(|_| {
            let s = rng.random_range(0..n);
            let mut t = rng.random_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            SourceFunction::from_entries([(s, amount), (t, -amount)])
        })
        .collect();
    KSource::from_commodities(commodities)
}

/// Instances for the residual, congestion, and audit checks.
pub fn flow_corpus(count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let (eps, max_n) = match i % 3 {
                0 => (0.3, 200),
                1 => (0.1, 100),
                _ => (0.05, 40),
            };
            let graph = random_graph(&mut rng, max_n);
            let k = rng.random_range(1..=4);
            let load = rng.random_range(0.1..1.0);
            let demand = random_demand(&mut rng, &graph, k, load);
            Instance {
                label: format!("flow#{i}"),
                graph,
                demand,
                eps,
            }
        })
        .collect()
}

/// Small instances that are often infeasible. Even indices are integral
/// single-commodity demands on at most 30 vertices.
pub fn certificate_corpus(count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let eps = if rng.random_bool(0.5) { 0.3 } else { 0.2 };
            let (graph, demand) = if i % 2 == 0 {
                let g = random_graph(&mut rng, 30);
                let b = integral_demand(&mut rng, &g);
                (g, KSource::single(b))
            } else if i % 4 == 1 {
                let g = random_graph(&mut rng, 40);
                let k = rng.random_range(2..=4);
                let amount = rng.random_range(0.5..2.0);
                let b = pair_demand(&mut rng, &g, k, amount);
                (g, b)
            } else {
                let g = random_graph(&mut rng, 60);
                let load = rng.random_range(1.0..4.0);
                let b = random_demand(&mut rng, &g, 1, load);
                (g, b)
            };
            Instance {
                label: format!("cert#{i}"),
                graph,
                demand,
                eps,
            }
        })
        .collect()
}

/// A random MWU adversary that trims its gains until `⟨g, w̃⟩ ≤ 0`. Half the
/// seeds also push every rounded-away index up as hard as allowed.
pub fn adversary(
    seed: u64,
    count: u64,
) -> impl FnMut(usize, &WeightLedger, RoundedWeights<'_>) -> Vec<(Index, f64)> {
    let mut rng = rng(seed);
    let greedy = rng.random_bool(0.5);
    move |_, _, rounded| {
        let mut gains: Vec<(Index, f64)> = (0..count)
            .map(|j| {
                let g = if greedy && rounded.get(j) == 0.0 {
                    2.0
                } else {
                    rng.random_range(-2.0..=2.0)
                };
                (j, g)
            })
            .collect();
        let mut dot: f64 = gains.iter().map(|&(j, g)| g * rounded.get(j)).sum();
        if dot > 0.0 {
            let mut order: Vec<usize> = (0..gains.len())
                .filter(|&i| rounded.get(gains[i].0) > 0.0)
                .collect();
            order.sort_by(|&a, &b| rounded.get(gains[b].0).total_cmp(&rounded.get(gains[a].0)));
            for i in order {
                let w = rounded.get(gains[i].0);
                let room = (gains[i].1 + 2.0) * w;
                let cut = room.min(dot);
                gains[i].1 = (gains[i].1 - cut / w).max(-2.0);
                dot -= cut;
                if dot <= 0.0 {
                    break;
                }
            }
        }
        gains
    }
}
