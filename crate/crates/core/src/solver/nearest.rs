use super::graph::{CostGraph, PathSolution};
use crate::{Error, Result};

/// Greedy construction: repeatedly fly to the cheapest-to-reach unvisited
/// vertex that can still be serviced with enough budget left to return.
/// Zero-prize vertices are skipped; ties go to the lowest index.
pub fn nearest_neighbor_path(graph: &CostGraph) -> Result<PathSolution> {
    let (start, end) = (graph.start(), graph.end());
    if graph.cost(start, end) > graph.budget() {
        return Err(Error::Infeasible(format!(
            "direct depot-to-depot cost {} exceeds budget {}",
            graph.cost(start, end),
            graph.budget()
        )));
    }
    let mut visited = vec![false; graph.len()];
    let mut seq = vec![start];
    let mut spent = 0.0;
    let mut current = start;
    loop {
        let mut best: Option<(f64, usize)> = None;
        for v in graph.interior() {
            if visited[v] || graph.prize(v) == 0.0 {
                continue;
            }
            let reach = graph.cost(current, v);
            if spent + reach + graph.service(v) + graph.cost(v, end) > graph.budget() {
                continue;
            }
            if best.is_none_or(|(c, _)| reach < c) {
                best = Some((reach, v));
            }
        }
        let Some((reach, v)) = best else { break };
        visited[v] = true;
        spent += reach + graph.service(v);
        seq.push(v);
        current = v;
    }
    seq.push(end);
    let mut sol = PathSolution::evaluate(graph, seq);
    if !sol.feasible {
        // incremental sum rounded past the budget; trim the tail
        while !sol.feasible && sol.sequence.len() > 2 {
            let last = sol.sequence.len() - 2;
            sol.sequence.remove(last);
            sol.refresh(graph);
        }
    }
    Ok(sol)
}

/// Initial pheromone level implied by a seed path: prize per unit cost per
/// edge. Falls back to `1.0` when the path carries no prize.
pub(crate) fn pheromone_seed(sol: &PathSolution) -> f64 {
    let edges = (sol.sequence.len() - 1) as f64;
    let tau0 = sol.total_prize / (sol.total_cost * edges);
    if tau0.is_finite() && tau0 > 0.0 {
        tau0
    } else {
        1.0
    }
}
