use super::graph::{CostGraph, PathSolution};
use crate::{Error, Result};

/// Largest interior vertex count [`exact_solve`] accepts.
pub const EXACT_LIMIT: usize = 12;

/// Maximum-prize feasible path by dynamic programming over vertex subsets
/// (cheapest way to cover each subset ending at each vertex). Ties on prize
/// go to the cheaper path. Partial paths over budget are pruned.
pub fn exact_solve(graph: &CostGraph) -> Result<PathSolution> {
    let k = graph.len() - 2;
    if k > EXACT_LIMIT {
        return Err(Error::TooLarge {
            interior: k,
            limit: EXACT_LIMIT,
        });
    }
    let (start, end) = (graph.start(), graph.end());
    if graph.cost(start, end) > graph.budget() {
        return Err(Error::Infeasible(format!(
            "direct depot-to-depot cost {} exceeds budget {}",
            graph.cost(start, end),
            graph.budget()
        )));
    }
    let states = 1usize << k;
    let mut dp = vec![f64::INFINITY; states * k.max(1)];
    let mut parent = vec![usize::MAX; states * k.max(1)];
    for i in 0..k {
        dp[(1 << i) * k + i] = graph.cost(start, i + 1) + graph.service(i + 1);
    }
    for mask in 1..states {
        for last in 0..k {
            let d = dp[mask * k + last];
            if mask & (1 << last) == 0 || d > graph.budget() {
                continue;
            }
            for next in 0..k {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nd = d + graph.cost(last + 1, next + 1) + graph.service(next + 1);
                let slot = (mask | (1 << next)) * k + next;
                if nd < dp[slot] {
                    dp[slot] = nd;
                    parent[slot] = last;
                }
            }
        }
    }

    let mut best = (0.0, graph.cost(start, end), 0usize, usize::MAX);
    for mask in 1..states {
        let prize: f64 = (0..k)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| graph.prize(i + 1))
            .sum();
        for last in 0..k {
            if mask & (1 << last) == 0 {
                continue;
            }
            let total = dp[mask * k + last] + graph.cost(last + 1, end);
            if total <= graph.budget() && (prize > best.0 || (prize == best.0 && total < best.1)) {
                best = (prize, total, mask, last);
            }
        }
    }

    let (_, _, mut mask, mut last) = best;
    let mut rev = Vec::new();
    while last != usize::MAX {
        rev.push(last + 1);
        let p = parent[mask * k + last];
        mask &= !(1 << last);
        last = p;
    }
    let mut seq = vec![start];
    seq.extend(rev.into_iter().rev());
    seq.push(end);
    Ok(PathSolution::evaluate(graph, seq))
}
