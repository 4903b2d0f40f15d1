//! Inherited ant colony system.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::{CostGraph, PathSolution};
use super::nearest::{nearest_neighbor_path, pheromone_seed};
use super::operators::{add_operator, add_operator_masked, drop_operator};
use super::two_opt::two_opt;
use crate::seed::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcsParams {
    pub n_ants: usize,
    pub n_iterations: usize,
    /// Heuristic exponent.
    pub beta: f64,
    /// Local evaporation rate.
    pub rho: f64,
    /// Global decay rate.
    pub alpha: f64,
    /// Exploitation probability of the transition rule.
    pub q0: f64,
    /// Minimum improvement, kJ.
    pub epsilon: f64,
    /// Consecutive non-improving iterations before stopping.
    pub max_no_improve: usize,
    pub seed: u64,
}

impl Default for AcsParams {
    fn default() -> Self {
        AcsParams {
            n_ants: 40,
            n_iterations: 250,
            beta: 2.0,
            rho: 0.1,
            alpha: 0.1,
            q0: 0.9,
            epsilon: 1e-4,
            max_no_improve: 25,
            seed: 0,
        }
    }
}

impl AcsParams {
    pub fn with_seed(self, seed: u64) -> Self {
        AcsParams { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("acs.q0", self.q0), ("acs.rho", self.rho), ("acs.alpha", self.alpha)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::validation(field, format!("must lie in (0, 1), got {v}")));
            }
        }
        for (field, v) in [
            ("acs.n_ants", self.n_ants),
            ("acs.n_iterations", self.n_iterations),
            ("acs.max_no_improve", self.max_no_improve),
        ] {
            if v == 0 {
                return Err(Error::validation(field, "must be positive"));
            }
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::validation(
                "acs.beta",
                format!("must be nonnegative, got {}", self.beta),
            ));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::validation(
                "acs.epsilon",
                format!("must be nonnegative, got {}", self.epsilon),
            ));
        }
        Ok(())
    }
}

/// Directed pheromone levels, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneMatrix {
    n: usize,
    tau: Vec<f64>,
    tau0: f64,
}

impl PheromoneMatrix {
    pub fn new(n: usize, tau0: f64) -> Result<Self> {
        if !(tau0 > 0.0 && tau0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "initial pheromone must be positive, got {tau0}"
            )));
        }
        Ok(PheromoneMatrix {
            n,
            tau: vec![tau0; n * n],
            tau0,
        })
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    #[inline]
    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.tau[r * self.n + s]
    }

    pub fn set(&mut self, r: usize, s: usize, value: f64) {
        self.tau[r * self.n + s] = value.max(f64::MIN_POSITIVE);
    }

    /// Evaporates a traversed edge towards the initial level.
    pub fn local_update(&mut self, r: usize, s: usize, rho: f64) {
        let t = &mut self.tau[r * self.n + s];
        *t = ((1.0 - rho) * *t + rho * self.tau0).max(f64::MIN_POSITIVE);
    }

    /// Decays every edge and deposits prize per unit cost on the edges of the
    /// global-best path.
    pub fn global_update(&mut self, best: &[usize], prize: f64, cost: f64, alpha: f64) {
        let deposit = if cost > 0.0 { prize / cost } else { 0.0 };
        for t in &mut self.tau {
            *t = ((1.0 - alpha) * *t).max(f64::MIN_POSITIVE);
        }
        for w in best.windows(2) {
            let t = &mut self.tau[w[0] * self.n + w[1]];
            *t = (*t + alpha * deposit).max(f64::MIN_POSITIVE);
        }
    }
}

/// Heuristic desirability of moving from `r` to `s`: prize per unit of edge
/// plus service cost.
pub fn heuristic(graph: &CostGraph, r: usize, s: usize) -> f64 {
    let denom = graph.cost(r, s) + graph.service(s);
    if graph.prize(s) == 0.0 {
        0.0
    } else {
        graph.prize(s) / denom.max(1e-12)
    }
}

/// Transition rule: with probability `q0` the candidate maximising
/// pheromone times heuristic^beta (lowest index on ties), otherwise a draw
/// proportional to it. If every weight is zero the draw is uniform.
pub fn select_next_node(
    graph: &CostGraph,
    pheromone: &PheromoneMatrix,
    current: usize,
    feasible: &[usize],
    params: &AcsParams,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    if feasible.is_empty() {
        return Err(Error::InvalidArgument("no feasible candidate to select".into()));
    }
    let mut weights: Vec<f64> = feasible
        .iter()
        .map(|&s| pheromone.get(current, s) * heuristic(graph, current, s).powf(params.beta))
        .collect();
    let k = choose(&mut weights, params.q0, rng);
    Ok(feasible[k])
}

fn choose(weights: &mut [f64], q0: f64, rng: &mut ChaCha8Rng) -> usize {
    let q: f64 = rng.random();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return rng.random_range(0..weights.len());
    }
    if q <= q0 {
        let mut best = 0;
        for (k, &w) in weights.iter().enumerate() {
            if w > weights[best] {
                best = k;
            }
        }
        return best;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = k;
            acc += w;
            if acc > target {
                return k;
            }
        }
    }
    last_positive
}

/// Best-so-far after one colony iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub best_prize: f64,
    pub best_cost: f64,
    pub iteration_best_prize: f64,
    pub improved: bool,
}

/// Writes convergence statistics as CSV.
pub fn write_convergence_csv(path: &Path, stats: &[IterationStats]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    for s in stats {
        w.serialize(s).map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs the colony and returns the global-best feasible path.
///
/// `inherited` is a previous best sequence (graph indices). It is pruned of
/// invalid or repeated vertices, repaired by add then drop, and seeds both
/// the pheromone level and the global best. Without it the nearest-neighbour
/// path does.
pub fn solve_iacs(graph: &CostGraph, params: &AcsParams, inherited: Option<&[usize]>) -> Result<PathSolution> {
    solve(graph, params, inherited, None)
}

/// [`solve_iacs`] that also reports per-iteration statistics.
pub fn solve_iacs_traced(
    graph: &CostGraph,
    params: &AcsParams,
    inherited: Option<&[usize]>,
) -> Result<(PathSolution, Vec<IterationStats>)> {
    let mut stats = Vec::new();
    let sol = solve(graph, params, inherited, Some(&mut stats))?;
    Ok((sol, stats))
}

fn solve(
    graph: &CostGraph,
    params: &AcsParams,
    inherited: Option<&[usize]>,
    mut stats: Option<&mut Vec<IterationStats>>,
) -> Result<PathSolution> {
    params.validate()?;
    let n = graph.len();
    let nn = nearest_neighbor_path(graph)?;
    let nn_tau0 = pheromone_seed(&nn);
    let (mut best, tau0) = match inherited {
        Some(seq) => {
            let repaired = repair_inherited(graph, seq)?;
            let tau0 = if repaired.total_prize > 0.0 {
                pheromone_seed(&repaired)
            } else {
                nn_tau0
            };
            (repaired, tau0)
        }
        None => (nn, nn_tau0),
    };
    if graph.interior().is_empty() {
        return Ok(best);
    }

    let mut pheromone = PheromoneMatrix::new(n, tau0)?;
    let mut eta = vec![0.0; n * n];
    for r in 0..n {
        for s in graph.interior() {
            eta[r * n + s] = heuristic(graph, r, s).powf(params.beta);
        }
    }
    let eligible: Vec<bool> = (0..n)
        .map(|v| graph.interior().contains(&v) && graph.prize(v) > 0.0)
        .collect();

    let mut rng = rng_from_seed(params.seed);
    let mut scratch = Scratch::default();
    let mut no_improve = 0;
    for iteration in 0..params.n_iterations {
        if no_improve >= params.max_no_improve {
            break;
        }
        let mut local: Option<PathSolution> = None;
        for _ in 0..params.n_ants {
            let path = construct(graph, &pheromone, &eta, &eligible, params, &mut rng, &mut scratch);
            let mut path = two_opt(graph, path);
            if !path.feasible {
                path = drop_operator(graph, path)?;
            }
            scratch.allowed.clear();
            scratch.allowed.extend_from_slice(&eligible);
            let path = add_operator_masked(graph, path, &mut scratch.allowed);
            for w in path.sequence.windows(2) {
                pheromone.local_update(w[0], w[1], params.rho);
            }
            if local.as_ref().is_none_or(|b| path.better_than(b)) {
                local = Some(path);
            }
        }
        let local = local.expect("at least one ant");
        let improved = local.total_prize >= best.total_prize + params.epsilon
            || (local.total_prize == best.total_prize && local.total_cost <= best.total_cost - params.epsilon);
        let iteration_best_prize = local.total_prize;
        if improved {
            best = local;
            pheromone.global_update(&best.sequence, best.total_prize, best.total_cost, params.alpha);
            no_improve = 0;
        } else {
            no_improve += 1;
        }
        if let Some(stats) = stats.as_deref_mut() {
            stats.push(IterationStats {
                iteration,
                best_prize: best.total_prize,
                best_cost: best.total_cost,
                iteration_best_prize,
                improved,
            });
        }
    }
    Ok(best)
}

fn repair_inherited(graph: &CostGraph, seq: &[usize]) -> Result<PathSolution> {
    let mut seen = vec![false; graph.len()];
    let mut cleaned = vec![graph.start()];
    for &v in seq {
        if graph.interior().contains(&v) && !std::mem::replace(&mut seen[v], true) {
            cleaned.push(v);
        }
    }
    cleaned.push(graph.end());
    let path = add_operator(graph, PathSolution::evaluate(graph, cleaned));
    drop_operator(graph, path)
}

#[derive(Default)]
struct Scratch {
    visited: Vec<bool>,
    feasible: Vec<usize>,
    weights: Vec<f64>,
    allowed: Vec<bool>,
}

/// One ant's tour. A vertex is a candidate only if the ant can fly there,
/// service it and still fly straight to the end depot within budget.
fn construct(
    graph: &CostGraph,
    pheromone: &PheromoneMatrix,
    eta: &[f64],
    eligible: &[bool],
    params: &AcsParams,
    rng: &mut ChaCha8Rng,
    scratch: &mut Scratch,
) -> PathSolution {
    let n = graph.len();
    let end = graph.end();
    scratch.visited.clear();
    scratch.visited.resize(n, false);
    let mut seq = vec![graph.start()];
    let mut current = graph.start();
    let mut spent = 0.0;
    loop {
        scratch.feasible.clear();
        for v in graph.interior() {
            if eligible[v]
                && !scratch.visited[v]
                && spent + graph.cost(current, v) + graph.service(v) + graph.cost(v, end) <= graph.budget()
            {
                scratch.feasible.push(v);
            }
        }
        if scratch.feasible.is_empty() {
            break;
        }
        let next = if seq.len() == 1 {
            scratch.feasible[rng.random_range(0..scratch.feasible.len())]
        } else {
            scratch.weights.clear();
            scratch.weights.extend(
                scratch
                    .feasible
                    .iter()
                    .map(|&s| pheromone.get(current, s) * eta[current * n + s]),
            );
            scratch.feasible[choose(&mut scratch.weights, params.q0, rng)]
        };
        scratch.visited[next] = true;
        spent += graph.cost(current, next) + graph.service(next);
        seq.push(next);
        current = next;
    }
    seq.push(end);
    PathSolution::evaluate(graph, seq)
}
