//! Mission-level planning policies.
//!
//! Every policy reduces the current mission state to a deterministic
//! [`CostGraph`] at some per-regime power level and solves it with the ant
//! colony solver, optionally warm-started from the previous route. They
//! differ in how the power levels are chosen:
//!
//! * ADAPT sweeps safety beliefs over the posterior predictive and scores
//!   the candidates by belief and prize.
//! * ROMP always uses the prior means.
//! * WeightedErr rescales prior-mean edges by the error of the last leg.
//! * MCGreedy samples power levels between observed extremes and keeps the
//!   most frequent route.
//! * Offline plans once and never re-plans.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{NormalDist, NormalGamma, ObservationWindow, PerRegime};
use crate::instance::{charge_cost, node_prize, Instance, Point3};
use crate::seed::SeedTree;
use crate::solver::{solve_iacs, AcsParams, CostGraph, PathSolution};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    Offline,
    Romp,
    WeightedErr,
    #[serde(rename = "mcgreedy")]
    McGreedy,
    Adapt,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::Offline,
        PlannerKind::Romp,
        PlannerKind::WeightedErr,
        PlannerKind::McGreedy,
        PlannerKind::Adapt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Offline => "Offline",
            PlannerKind::Romp => "ROMP",
            PlannerKind::WeightedErr => "WeightedErr",
            PlannerKind::McGreedy => "MCGreedy",
            PlannerKind::Adapt => "ADAPT",
        }
    }

    pub fn replans(self) -> bool {
        self != PlannerKind::Offline
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s) || k.key() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown planner {s:?}")))
    }
}

impl PlannerKind {
    /// Identifier used in config files.
    pub fn key(self) -> &'static str {
        match self {
            PlannerKind::Offline => "offline",
            PlannerKind::Romp => "romp",
            PlannerKind::WeightedErr => "weighted_err",
            PlannerKind::McGreedy => "mcgreedy",
            PlannerKind::Adapt => "adapt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_theta_candidates: usize,
    pub w_theta: f64,
    pub w_prize: f64,
    pub acs: AcsParams,
    pub mc_samples: usize,
    /// Reuse one solver seed for every MCGreedy sample instead of deriving one
    /// per sample.
    pub mc_shared_solver_seed: bool,
    pub w_act: f64,
    pub w_est: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            theta_min: 0.75,
            theta_max: 0.999,
            n_theta_candidates: 5,
            w_theta: 0.5,
            w_prize: 0.5,
            acs: AcsParams::default(),
            mc_samples: 100,
            mc_shared_solver_seed: false,
            w_act: 0.5,
            w_est: 0.5,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_min > 0.0 && self.theta_min < self.theta_max && self.theta_max < 1.0) {
            return Err(Error::validation(
                "planner.theta_min",
                format!(
                    "need 0 < theta_min < theta_max < 1, got [{}, {}]",
                    self.theta_min, self.theta_max
                ),
            ));
        }
        if self.n_theta_candidates == 0 {
            return Err(Error::validation("planner.n_theta_candidates", "must be positive"));
        }
        if self.mc_samples == 0 {
            return Err(Error::validation("planner.mc_samples", "must be positive"));
        }
        for (field, a, b) in [
            ("planner.w_theta", self.w_theta, self.w_prize),
            ("planner.w_act", self.w_act, self.w_est),
        ] {
            if !(a >= 0.0 && b >= 0.0 && (a + b - 1.0).abs() < 1e-9) {
                return Err(Error::validation(
                    field,
                    format!("weight pair must sum to 1, got {a} + {b}"),
                ));
            }
        }
        self.acs.validate()
    }

    /// Safety beliefs evenly spaced over `[theta_min, theta_max]`.
    pub fn theta_levels(&self) -> Vec<f64> {
        let n = self.n_theta_candidates;
        if n == 1 {
            return vec![self.theta_max];
        }
        let step = (self.theta_max - self.theta_min) / (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.theta_max
                } else {
                    self.theta_min + step * k as f64
                }
            })
            .collect()
    }
}

/// What the planner knows when it is invoked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionState {
    pub position: Point3,
    /// kJ.
    pub residual_energy: f64,
    /// s.
    pub elapsed_time: f64,
    /// Ids of nodes not yet charged, ascending.
    pub unvisited: Vec<usize>,
    pub window: ObservationWindow,
}

impl MissionState {
    pub fn initial(instance: &Instance, window: ObservationWindow) -> Self {
        MissionState {
            position: instance.start_depot,
            residual_energy: instance.flight.battery_capacity,
            elapsed_time: 0.0,
            unvisited: instance.nodes.iter().map(|n| n.id).collect(),
            window,
        }
    }
}

/// Shared, read-only inputs of every planning call.
#[derive(Debug, Clone, Copy)]
pub struct PlanningContext<'a> {
    pub instance: &'a Instance,
    pub priors: &'a PerRegime<NormalDist>,
    pub ng_priors: &'a PerRegime<NormalGamma>,
    pub config: &'a PlannerConfig,
}

impl PlanningContext<'_> {
    pub fn prior_means(&self) -> PerRegime<f64> {
        self.priors.map(|d| d.mean)
    }
}

/// Vertex label of the end depot in graphs built from mission states.
pub const END_LABEL: usize = usize::MAX;

/// Cost graph for a mission state with edge costs left symbolic in the
/// per-regime powers, so several power levels can share the geometry.
#[derive(Debug, Clone)]
pub struct GraphTemplate {
    n: usize,
    durations: Vec<PerRegime<f64>>,
    prize: Vec<f64>,
    service: Vec<f64>,
    labels: Vec<usize>,
    budget: f64,
}

impl GraphTemplate {
    /// Index 0 is the current position, then unvisited nodes in id order,
    /// then the end depot. Budget is residual energy above the reserve.
    pub fn new(instance: &Instance, state: &MissionState) -> Result<Self> {
        let budget = state.residual_energy - instance.flight.energy_reserve;
        if !(budget > 0.0) {
            return Err(Error::MissionOver { budget });
        }
        let mut positions = vec![state.position];
        let mut prize = vec![0.0];
        let mut service = vec![0.0];
        let mut labels = vec![0];
        for &id in &state.unvisited {
            let node = instance
                .node(id)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown node id {id}")))?;
            positions.push(node.position);
            prize.push(node_prize(node, &instance.charger, state.elapsed_time)?);
            service.push(charge_cost(node, &instance.charger, state.elapsed_time)?);
            labels.push(id);
        }
        positions.push(instance.end_depot);
        prize.push(0.0);
        service.push(0.0);
        labels.push(END_LABEL);
        let n = positions.len();
        let mut durations = Vec::with_capacity(n * n);
        for from in &positions {
            for to in &positions {
                durations.push(instance.flight.regime_durations(from, to));
            }
        }
        Ok(GraphTemplate {
            n,
            durations,
            prize,
            service,
            labels,
            budget,
        })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn at_powers(&self, powers: &PerRegime<f64>) -> Result<CostGraph> {
        if powers.iter().any(|(_, &p)| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "regime powers must be positive and finite, got {powers:?}"
            )));
        }
        let edge = self
            .durations
            .iter()
            .map(|d| (powers.takeoff * d.takeoff + powers.cruise * d.cruise + powers.landing * d.landing) * 1e-3)
            .collect();
        debug_assert_eq!(self.durations.len(), self.n * self.n);
        CostGraph::with_labels(
            self.prize.clone(),
            self.service.clone(),
            edge,
            self.budget,
            self.labels.clone(),
        )
    }

    /// Maps a route of node ids onto graph indices, dropping ids that are no
    /// longer unvisited.
    pub fn indices_of(&self, route: &[usize]) -> Vec<usize> {
        route
            .iter()
            .filter_map(|id| self.labels[1..self.n - 1].binary_search(id).ok().map(|k| k + 1))
            .collect()
    }
}

pub fn build_cost_graph(instance: &Instance, state: &MissionState, powers: &PerRegime<f64>) -> Result<CostGraph> {
    GraphTemplate::new(instance, state)?.at_powers(powers)
}

/// A route chosen by a planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    /// Node ids to charge, in order; the end depot is implicit.
    pub route: Vec<usize>,
    pub planned_prize: f64,
    pub planned_cost: f64,
    pub theta: Option<f64>,
}

impl Plan {
    pub fn direct_return() -> Self {
        Plan {
            route: Vec::new(),
            planned_prize: 0.0,
            planned_cost: 0.0,
            theta: None,
        }
    }

    fn from_solution(graph: &CostGraph, sol: &PathSolution, theta: Option<f64>) -> Self {
        Plan {
            route: sol.interior().iter().map(|&v| graph.label(v)).collect(),
            planned_prize: sol.total_prize,
            planned_cost: sol.total_cost,
            theta,
        }
    }
}

/// Initial route at prior-mean powers from the start depot, seeded by the
/// nearest-neighbour heuristic.
pub fn plan_offline(instance: &Instance, priors: &PerRegime<NormalDist>, acs: &AcsParams) -> Result<Plan> {
    let state = MissionState::initial(instance, ObservationWindow::default());
    let graph = build_cost_graph(instance, &state, &priors.map(|d| d.mean))?;
    let sol = solve_iacs(&graph, acs, None)?;
    Ok(Plan::from_solution(&graph, &sol, None))
}

/// Re-plans at prior-mean powers.
pub fn plan_romp(ctx: &PlanningContext, state: &MissionState, inherited: &[usize], seed: u64) -> Result<Plan> {
    let template = GraphTemplate::new(ctx.instance, state)?;
    let graph = template.at_powers(&ctx.prior_means())?;
    solve_or_return(&template, &graph, inherited, &ctx.config.acs.with_seed(seed))
}

fn solve_or_return(template: &GraphTemplate, graph: &CostGraph, inherited: &[usize], acs: &AcsParams) -> Result<Plan> {
    let warm = template.indices_of(inherited);
    match solve_iacs(graph, acs, Some(&warm)) {
        Ok(sol) => Ok(Plan::from_solution(graph, &sol, None)),
        Err(Error::Infeasible(_)) => Ok(Plan::direct_return()),
        Err(e) => Err(e),
    }
}

/// Planned and realised energy of one flown leg, kJ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegEnergy {
    pub planned: f64,
    pub actual: f64,
}

/// `w_act ((actual - planned) / planned + 1) + w_est`; 1 when no leg has
/// been flown yet.
pub fn weighted_error_ratio(last_leg: Option<LegEnergy>, w_act: f64, w_est: f64) -> Result<f64> {
    match last_leg {
        None => Ok(1.0),
        Some(leg) if leg.planned > 0.0 => Ok(w_act * ((leg.actual - leg.planned) / leg.planned + 1.0) + w_est),
        Some(leg) => Err(Error::InvalidArgument(format!(
            "planned leg energy must be positive, got {}",
            leg.planned
        ))),
    }
}

/// Re-plans with prior-mean edges scaled by the last leg's error ratio.
pub fn plan_weighted_err(
    ctx: &PlanningContext,
    state: &MissionState,
    last_leg: Option<LegEnergy>,
    inherited: &[usize],
    seed: u64,
) -> Result<Plan> {
    let ratio = weighted_error_ratio(last_leg, ctx.config.w_act, ctx.config.w_est)?;
    let template = GraphTemplate::new(ctx.instance, state)?;
    let mut graph = template.at_powers(&ctx.prior_means())?;
    graph.scale_edges(ratio);
    solve_or_return(&template, &graph, inherited, &ctx.config.acs.with_seed(seed))
}

/// Occurrences of one route among Monte Carlo solves.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTally {
    pub route: Vec<usize>,
    pub count: usize,
    pub prize: f64,
    pub cost_sum: f64,
}

impl RouteTally {
    pub fn mean_cost(&self) -> f64 {
        self.cost_sum / self.count as f64
    }
}

/// Counts identical routes in first-seen order.
pub fn tally_routes(samples: impl IntoIterator<Item = (Vec<usize>, f64, f64)>) -> Vec<RouteTally> {
    let mut tallies: Vec<RouteTally> = Vec::new();
    for (route, prize, cost) in samples {
        match tallies.iter_mut().find(|t| t.route == route) {
            Some(t) => {
                t.count += 1;
                t.cost_sum += cost;
            }
            None => tallies.push(RouteTally {
                route,
                count: 1,
                prize,
                cost_sum: cost,
            }),
        }
    }
    tallies
}

/// Most frequent route; ties go to higher prize, then lower mean cost, then
/// the first seen.
pub fn most_frequent(tallies: &[RouteTally]) -> Option<&RouteTally> {
    let mut best: Option<&RouteTally> = None;
    for t in tallies {
        let better = match best {
            None => true,
            Some(b) => {
                t.count > b.count
                    || (t.count == b.count
                        && (t.prize > b.prize || (t.prize == b.prize && t.mean_cost() < b.mean_cost())))
            }
        };
        if better {
            best = Some(t);
        }
    }
    best
}

/// Solves at `mc_samples` power levels drawn uniformly per regime between
/// the smallest and largest reading in the window (prior mean if none) and
/// returns the most frequent route.
pub fn plan_mcgreedy(ctx: &PlanningContext, state: &MissionState, inherited: &[usize], seed: u64) -> Result<Plan> {
    let template = GraphTemplate::new(ctx.instance, state)?;
    let warm = template.indices_of(inherited);
    let tree = SeedTree::new(seed);
    let mut rng = tree.child("levels").rng();
    let ranges = PerRegime::from_fn(|r| {
        let mean = ctx.priors[r].mean;
        state.window.range(r).unwrap_or((mean, mean))
    });
    let mut samples = Vec::with_capacity(ctx.config.mc_samples);
    for k in 0..ctx.config.mc_samples {
        let powers = PerRegime::from_fn(|r| {
            let (lo, hi) = ranges[r];
            let u: f64 = rng.random();
            (lo + u * (hi - lo)).max(f64::MIN_POSITIVE)
        });
        let graph = template.at_powers(&powers)?;
        let solver_seed = if ctx.config.mc_shared_solver_seed {
            tree.child("solver").value()
        } else {
            tree.child("solver").child_u64(k as u64).value()
        };
        match solve_iacs(&graph, &ctx.config.acs.with_seed(solver_seed), Some(&warm)) {
            Ok(sol) => samples.push((sol.labelled(&graph), sol.total_prize, sol.total_cost)),
            Err(Error::Infeasible(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let tallies = tally_routes(samples);
    Ok(match most_frequent(&tallies) {
        Some(t) => Plan {
            route: t.route[1..t.route.len() - 1].to_vec(),
            planned_prize: t.prize,
            planned_cost: t.mean_cost(),
            theta: None,
        },
        None => Plan::direct_return(),
    })
}

/// One route found during the safety-belief sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePath {
    pub theta: f64,
    pub solution: PathSolution,
    pub score: f64,
}

/// Result of an ADAPT re-plan.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptOutcome {
    pub plan: Plan,
    /// Deduplicated candidates in ascending belief, scored.
    pub candidates: Vec<CandidatePath>,
    pub posteriors: PerRegime<NormalGamma>,
}

/// Collapses identical sequences onto the highest belief that produced them.
/// Input must be in ascending belief.
pub fn dedup_candidates(candidates: Vec<CandidatePath>) -> Vec<CandidatePath> {
    let mut out: Vec<CandidatePath> = Vec::with_capacity(candidates.len());
    for c in candidates {
        match out.iter().position(|o| o.solution.sequence == c.solution.sequence) {
            Some(k) => {
                out.remove(k);
                out.push(c);
            }
            None => out.push(c),
        }
    }
    out.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    out
}

/// Weighted score of belief and prize. Belief is normalised by the
/// configured range, prize by the candidate set; a degenerate prize range
/// contributes 0.
pub fn score_candidates(candidates: &mut [CandidatePath], config: &PlannerConfig) {
    let (p_min, p_max) = candidates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c.solution.total_prize), hi.max(c.solution.total_prize))
        });
    let theta_span = config.theta_max - config.theta_min;
    for c in candidates.iter_mut() {
        let belief = if theta_span > 0.0 {
            (c.theta - config.theta_min) / theta_span
        } else {
            0.0
        };
        let prize = if p_max > p_min {
            (c.solution.total_prize - p_min) / (p_max - p_min)
        } else {
            0.0
        };
        c.score = config.w_theta * belief + config.w_prize * prize;
    }
}

/// Index of the best-scoring candidate; ties go to the higher belief.
pub fn select_candidate(candidates: &[CandidatePath]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, c) in candidates.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => {
                let b = &candidates[b];
                c.score > b.score || (c.score == b.score && c.theta > b.theta)
            }
        };
        if better {
            best = Some(k);
        }
    }
    best
}

/// Sweeps safety beliefs: at each belief the per-regime power is the
/// posterior predictive quantile, the graph is solved warm-started from
/// `inherited`, and the candidates are scored.
pub fn plan_online_adapt(
    ctx: &PlanningContext,
    state: &MissionState,
    inherited: &[usize],
    seed: u64,
) -> Result<AdaptOutcome> {
    let posteriors = state.window.posteriors(ctx.ng_priors);
    let template = GraphTemplate::new(ctx.instance, state)?;
    let warm = template.indices_of(inherited);
    let tree = SeedTree::new(seed);
    let mut candidates = Vec::new();
    let mut graphs = Vec::new();
    for (k, theta) in ctx.config.theta_levels().into_iter().enumerate() {
        let powers = posteriors.try_map(|_, post| post.predictive_quantile(theta))?;
        let graph = template.at_powers(&powers)?;
        let acs = ctx.config.acs.with_seed(tree.child_u64(k as u64).value());
        match solve_iacs(&graph, &acs, Some(&warm)) {
            Ok(solution) => {
                candidates.push(CandidatePath {
                    theta,
                    solution,
                    score: 0.0,
                });
                graphs.push(graph);
            }
            Err(Error::Infeasible(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let mut candidates = dedup_candidates(candidates);
    score_candidates(&mut candidates, ctx.config);
    let plan = match select_candidate(&candidates) {
        Some(k) => {
            let c = &candidates[k];
            // labels are identical across beliefs, any graph maps them
            Plan::from_solution(&graphs[0], &c.solution, Some(c.theta))
        }
        None => Plan::direct_return(),
    };
    Ok(AdaptOutcome {
        plan,
        candidates,
        posteriors,
    })
}

/// Per-regime power levels ADAPT would use at `theta`.
pub fn belief_powers(posteriors: &PerRegime<NormalGamma>, theta: f64) -> Result<PerRegime<f64>> {
    posteriors.try_map(|_, p| p.predictive_quantile(theta))
}
