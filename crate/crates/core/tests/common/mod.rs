//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use rand::Rng;
use udop::harness::GeneratorSpec;
use udop::seed::rng_from_seed;
use udop::solver::{exact_solve, CostGraph};

/// Random Euclidean orienteering graph with `k` interior nodes whose budget
/// cannot cover all of them.
///
/// The budget is drawn between 35% and 65% of the cheapest path through
/// every interior node (the exact optimum at unlimited budget).
pub fn binding_graph(k: usize, seed: u64) -> CostGraph {
    let mut rng = rng_from_seed(seed);
    let n = k + 2;
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                (50.0, 50.0)
            } else {
                (rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0)
            }
        })
        .collect();
    let mut edge = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            edge[i * n + j] = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
        }
    }
    let mut prize = vec![0.0; n];
    let mut service = vec![0.0; n];
    for v in 1..n - 1 {
        prize[v] = 1.0 + rng.random::<f64>() * 4.0;
        service[v] = rng.random::<f64>() * 5.0;
    }
    let open = CostGraph::new(prize.clone(), service.clone(), edge.clone(), f64::INFINITY).unwrap();
    let full = exact_solve(&open).unwrap().total_cost;
    let budget = full * rng.random_range(0.35..0.65);
    CostGraph::new(prize, service, edge, budget).unwrap()
}

/// The generated stand-ins for the 20-, 30- and 40-node field instances.
/// The generator seed is the node count; depots sit at the origin.
pub fn analog(n_nodes: usize) -> GeneratorSpec {
    GeneratorSpec::new(n_nodes, n_nodes as u64)
}
