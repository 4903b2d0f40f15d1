use super::graph::{CostGraph, PathSolution};

const IMPROVEMENT_TOLERANCE: f64 = 1e-10;

/// First-improvement 2-opt over edge costs. Handles asymmetric costs by
/// pricing reversed segments with prefix sums in both directions.
pub fn two_opt(graph: &CostGraph, mut path: PathSolution) -> PathSolution {
    let seq = &mut path.sequence;
    let len = seq.len();
    if len < 4 {
        return path;
    }
    let mut fwd = vec![0.0; len];
    let mut bwd = vec![0.0; len];
    'restart: loop {
        for k in 1..len {
            fwd[k] = fwd[k - 1] + graph.cost(seq[k - 1], seq[k]);
            bwd[k] = bwd[k - 1] + graph.cost(seq[k], seq[k - 1]);
        }
        for i in 1..len - 2 {
            let a = seq[i - 1];
            for j in i + 1..len - 1 {
                let b = seq[j + 1];
                let old = graph.cost(a, seq[i]) + (fwd[j] - fwd[i]) + graph.cost(seq[j], b);
                let new = graph.cost(a, seq[j]) + (bwd[j] - bwd[i]) + graph.cost(seq[i], b);
                if new < old - IMPROVEMENT_TOLERANCE {
                    seq[i..=j].reverse();
                    continue 'restart;
                }
            }
        }
        break;
    }
    path.refresh(graph);
    path
}
