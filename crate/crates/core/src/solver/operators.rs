//! Drop and add repair operators.

use super::graph::{CostGraph, PathSolution};
use crate::{Error, Result};

/// Value of removing the interior vertex at `index`: its prize over the cost
/// saved by removing it. Returns `(value, drop_cost)`.
pub fn drop_value(graph: &CostGraph, sequence: &[usize], index: usize) -> Result<(f64, f64)> {
    if index == 0 || index + 1 >= sequence.len() {
        return Err(Error::InvalidArgument(format!(
            "index {index} is not an interior position of a path of length {}",
            sequence.len()
        )));
    }
    let (prev, v, next) = (sequence[index - 1], sequence[index], sequence[index + 1]);
    let drop_cost = graph.cost(prev, v) + graph.cost(v, next) - graph.cost(prev, next) + graph.service(v);
    Ok((ratio(graph.prize(v), drop_cost), drop_cost))
}

fn ratio(prize: f64, cost: f64) -> f64 {
    if prize == 0.0 {
        0.0
    } else if cost <= 0.0 {
        f64::INFINITY
    } else {
        prize / cost
    }
}

/// Removes minimum-value vertices until the path fits the budget. Ties go to
/// the lowest vertex index.
pub fn drop_operator(graph: &CostGraph, mut path: PathSolution) -> Result<PathSolution> {
    while !path.feasible {
        let len = path.sequence.len();
        if len <= 2 {
            return Err(Error::Infeasible(format!(
                "direct depot-to-depot cost {} exceeds budget {}",
                path.total_cost,
                graph.budget()
            )));
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for j in 1..len - 1 {
            let (value, _) = drop_value(graph, &path.sequence, j)?;
            let v = path.sequence[j];
            let better = match best {
                None => true,
                Some((bv, _, bnode)) => value < bv || (value == bv && v < bnode),
            };
            if better {
                best = Some((value, j, v));
            }
        }
        let (_, j, _) = best.expect("path has interior vertices");
        path.sequence.remove(j);
        path.refresh(graph);
    }
    Ok(path)
}

/// Where inserting `node` into `sequence` costs least, following the
/// three-nearest-neighbour rule. Returns `(value, insert_index, add_cost)`;
/// the node would go between positions `insert_index - 1` and `insert_index`.
///
/// Paths with at most three interior vertices are scanned exhaustively.
pub fn add_value(graph: &CostGraph, sequence: &[usize], node: usize) -> (f64, usize, f64) {
    let len = sequence.len();
    let insertion = |j: usize| {
        let (a, b) = (sequence[j - 1], sequence[j]);
        graph.cost(a, node) + graph.cost(node, b) - graph.cost(a, b) + graph.service(node)
    };
    let mut best = (usize::MAX, f64::INFINITY);
    let mut consider = |j: usize| {
        let c = insertion(j);
        if c < best.1 || (c == best.1 && j < best.0) {
            best = (j, c);
        }
    };
    if len <= 5 {
        (1..len).for_each(&mut consider);
    } else {
        let nbrs = nearest_positions(graph, sequence, node);
        let mut adjacent = false;
        for &p in &nbrs {
            if p + 1 < len && nbrs.contains(&(p + 1)) {
                consider(p + 1);
                adjacent = true;
            }
        }
        if !adjacent {
            for &p in &nbrs {
                if p > 0 {
                    consider(p);
                }
                if p + 1 < len {
                    consider(p + 1);
                }
            }
        }
    }
    let (j, c) = best;
    (ratio(graph.prize(node), c), j, c)
}

/// Positions of the three path vertices cheapest to fly from to `node`.
fn nearest_positions(graph: &CostGraph, sequence: &[usize], node: usize) -> Vec<usize> {
    let mut top: [(f64, usize); 3] = [(f64::INFINITY, usize::MAX); 3];
    for (p, &u) in sequence.iter().enumerate() {
        let c = graph.cost(u, node);
        if c < top[2].0 {
            top[2] = (c, p);
            if top[2].0 < top[1].0 {
                top.swap(1, 2);
                if top[1].0 < top[0].0 {
                    top.swap(0, 1);
                }
            }
        }
    }
    top.iter().filter(|t| t.1 != usize::MAX).map(|t| t.1).collect()
}

fn cheapest_insertion(graph: &CostGraph, sequence: &[usize], node: usize) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for j in 1..sequence.len() {
        let (a, b) = (sequence[j - 1], sequence[j]);
        let c = graph.cost(a, node) + graph.cost(node, b) - graph.cost(a, b) + graph.service(node);
        if c < best.1 {
            best = (j, c);
        }
    }
    best
}

/// Inserts maximum-value vertices while any insertion fits the budget.
///
/// Vertices with zero prize are never inserted. When the neighbour rule picks
/// a position that breaks the budget but another position fits, the cheapest
/// fitting position is used instead, so the result is saturated.
pub fn add_operator(graph: &CostGraph, path: PathSolution) -> PathSolution {
    let mut allowed = vec![false; graph.len()];
    for v in graph.interior() {
        allowed[v] = graph.prize(v) > 0.0;
    }
    add_operator_masked(graph, path, &mut allowed)
}

/// `allowed` marks candidate vertices; it is updated as vertices enter the
/// path or turn out never to fit.
pub(crate) fn add_operator_masked(graph: &CostGraph, mut path: PathSolution, allowed: &mut [bool]) -> PathSolution {
    if !path.feasible {
        return path;
    }
    for &v in &path.sequence {
        allowed[v] = false;
    }
    loop {
        let slack = graph.budget() - path.total_cost;
        let mut best: Option<(f64, usize, usize)> = None;
        for v in graph.interior() {
            if !allowed[v] {
                continue;
            }
            let (mut value, mut j, cost) = add_value(graph, &path.sequence, v);
            if cost > slack {
                let (jj, cc) = cheapest_insertion(graph, &path.sequence, v);
                if cc > slack {
                    // slack only shrinks, so this vertex never fits again
                    allowed[v] = false;
                    continue;
                }
                j = jj;
                value = ratio(graph.prize(v), cc);
            }
            if best.is_none_or(|(bv, _, _)| value > bv) {
                best = Some((value, v, j));
            }
        }
        let Some((_, v, j)) = best else { break };
        allowed[v] = false;
        path.sequence.insert(j, v);
        path.refresh(graph);
        if !path.feasible {
            // rounding disagreed with the incremental check
            path.sequence.remove(j);
            path.refresh(graph);
        }
    }
    path
}
