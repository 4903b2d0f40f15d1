//! Mission execution against a hidden ground-truth power model.
//!
//! Flight legs are split into reading periods; each reading draws its
//! average power from the truth distribution of its regime, is deducted from
//! the battery and is pushed into the observation window. Charging happens
//! in full or not at all. Replanning policies are invoked after every
//! charge.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::energy::{NormalDist, NormalGamma, ObservationWindow, PerRegime, Regime};
use crate::instance::{charge_time, node_prize, travel_cost_unchecked, FlightProfile, Instance, Point3};
use crate::planners::{
    plan_mcgreedy, plan_online_adapt, plan_romp, plan_weighted_err, LegEnergy, MissionState, Plan, PlannerConfig,
    PlannerKind, PlanningContext, END_LABEL,
};
use crate::seed::{rng_from_seed, SeedTree};
use crate::{Error, Result};

/// Actual per-regime power distributions: prior shifted by `delta_mu` and
/// scaled by `delta_sigma`, both fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthModel {
    pub dists: PerRegime<NormalDist>,
    pub delta_mu: f64,
    pub delta_sigma: f64,
}

pub fn make_truth(priors: &PerRegime<NormalDist>, delta_mu: f64, delta_sigma: f64) -> Result<TruthModel> {
    if !(1.0 + delta_sigma >= 0.0) || !delta_mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need 1 + delta_sigma >= 0 and finite delta_mu, got {delta_mu}, {delta_sigma}"
        )));
    }
    let scale = 1.0 + delta_sigma;
    let dists = priors.try_map(|_, p| NormalDist::new((1.0 + delta_mu) * p.mean, scale * scale * p.variance))?;
    Ok(TruthModel {
        dists,
        delta_mu,
        delta_sigma,
    })
}

impl TruthModel {
    pub fn means(&self) -> PerRegime<f64> {
        self.dists.map(|d| d.mean)
    }
}

/// One power reading taken in flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightReading {
    pub regime: Regime,
    /// Mission time at the end of the reading, s.
    pub timestamp: f64,
    /// s; the last reading of a regime may be shorter than the period.
    pub duration: f64,
    /// W.
    pub power: f64,
}

impl FlightReading {
    /// kJ.
    pub fn energy(&self) -> f64 {
        self.power * self.duration * 1e-3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegRecord {
    /// Node id, 0 for the start depot.
    pub from: usize,
    /// Node id, `END_LABEL` for the end depot.
    pub to: usize,
    /// Travel cost at prior-mean powers, kJ.
    pub planned_energy: f64,
    /// Sum of reading energies, kJ.
    pub actual_energy: f64,
    pub durations: PerRegime<f64>,
    pub observations: Vec<FlightReading>,
    /// The battery fell below the reserve during this leg.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeRecord {
    pub node: usize,
    pub started_at: f64,
    /// kJ delivered to the node.
    pub prize: f64,
    /// kJ drawn from the battery.
    pub cost: f64,
    pub duration: f64,
    /// Not enough energy for a full charge; nothing was delivered.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplanRecord {
    /// Node just charged.
    pub at_node: usize,
    pub elapsed_time: f64,
    pub residual_energy: f64,
    /// Flight readings taken so far, in mission order.
    pub observations_seen: usize,
    /// Posteriors the planner used (ADAPT only).
    pub posteriors: Option<PerRegime<NormalGamma>>,
    pub theta: Option<f64>,
    pub n_candidates: usize,
    pub route: Vec<usize>,
    pub planned_prize: f64,
    pub planned_cost: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissionStatus {
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionSeeds {
    /// Drives the truth power draws.
    pub truth: u64,
    /// Root of the planner's solver seeds.
    pub planner: u64,
}

/// Complete record of one execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionTrace {
    pub instance: String,
    pub planner: PlannerKind,
    pub execution: usize,
    pub theta_min: f64,
    pub delta_mu: f64,
    pub delta_sigma: f64,
    pub seeds: MissionSeeds,
    pub battery_capacity: f64,
    pub energy_reserve: f64,
    pub window_length: f64,
    pub reading_period: f64,
    pub ng_priors: PerRegime<NormalGamma>,
    pub offline_route: Vec<usize>,
    pub legs: Vec<LegRecord>,
    pub charges: Vec<ChargeRecord>,
    pub replans: Vec<ReplanRecord>,
    pub final_residual: f64,
    pub status: MissionStatus,
    /// Sum of delivered prizes, kJ.
    pub total_prize: f64,
    /// Battery capacity minus final residual, kJ.
    pub total_cost: f64,
}

impl MissionTrace {
    pub fn succeeded(&self) -> bool {
        self.status == MissionStatus::Success
    }

    pub fn replan_wall_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.replans.iter().map(|r| r.wall_time_s)
    }

    /// Copy with wall-clock measurements zeroed, for determinism checks.
    pub fn without_timing(&self) -> MissionTrace {
        let mut t = self.clone();
        for r in &mut t.replans {
            r.wall_time_s = 0.0;
        }
        t
    }

    /// All flight readings in mission order.
    pub fn observations(&self) -> impl Iterator<Item = &FlightReading> + '_ {
        self.legs.iter().flat_map(|l| l.observations.iter())
    }
}

/// Flies from the state's position to `to`, updating residual energy,
/// mission time, position and window. Stops at the first reading that
/// leaves the battery below `flight.energy_reserve`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_leg(
    state: &mut MissionState,
    from_label: usize,
    to_label: usize,
    to: &Point3,
    flight: &FlightProfile,
    truth: &TruthModel,
    planning_powers: &PerRegime<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<LegRecord> {
    let durations = flight.regime_durations(&state.position, to);
    let planned_energy = travel_cost_unchecked(&state.position, to, flight, planning_powers);
    let period = state.window.reading_period();
    let mut record = LegRecord {
        from: from_label,
        to: to_label,
        planned_energy,
        actual_energy: 0.0,
        durations,
        observations: Vec::new(),
        failed: false,
    };
    'regimes: for regime in Regime::ALL {
        let dist = truth.dists[regime];
        let sd = dist.sd();
        let mut remaining = durations[regime];
        while remaining > 1e-9 {
            let dt = remaining.min(period);
            remaining -= dt;
            let z: f64 = rng.sample(StandardNormal);
            let power = (dist.mean + sd * z).max(0.0);
            state.elapsed_time += dt;
            let reading = FlightReading {
                regime,
                timestamp: state.elapsed_time,
                duration: dt,
                power,
            };
            let energy = reading.energy();
            record.actual_energy += energy;
            state.residual_energy -= energy;
            state.window.push(regime, reading.timestamp, power)?;
            record.observations.push(reading);
            if state.residual_energy < flight.energy_reserve {
                record.failed = true;
                break 'regimes;
            }
        }
    }
    if !record.failed {
        state.position = *to;
    }
    Ok(record)
}

/// Charges node `id` fully, or fails without delivering anything when the
/// battery cannot cover the whole charge above the reserve.
pub fn simulate_charge(state: &mut MissionState, instance: &Instance, id: usize) -> Result<ChargeRecord> {
    let node = instance
        .node(id)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown node id {id}")))?;
    let slot = state
        .unvisited
        .binary_search(&id)
        .map_err(|_| Error::InvalidArgument(format!("node {id} was already charged")))?;
    let started_at = state.elapsed_time;
    let prize = node_prize(node, &instance.charger, started_at)?;
    let cost = prize / instance.charger.eta_ipt;
    let duration = charge_time(node, &instance.charger, started_at)?;
    if state.residual_energy - cost < instance.flight.energy_reserve {
        return Ok(ChargeRecord {
            node: id,
            started_at,
            prize: 0.0,
            cost: 0.0,
            duration: 0.0,
            failed: true,
        });
    }
    state.residual_energy -= cost;
    state.elapsed_time += duration;
    state.unvisited.remove(slot);
    Ok(ChargeRecord {
        node: id,
        started_at,
        prize,
        cost,
        duration,
        failed: false,
    })
}

/// Everything a mission needs besides the instance itself.
#[derive(Debug, Clone, Copy)]
pub struct MissionSetup<'a> {
    pub instance: &'a Instance,
    pub planner: PlannerKind,
    pub config: &'a PlannerConfig,
    pub priors: &'a PerRegime<NormalDist>,
    pub ng_priors: &'a PerRegime<NormalGamma>,
    pub truth: &'a TruthModel,
    /// Shared initial route.
    pub offline: &'a Plan,
    /// Empty window carrying the length and reading period to use.
    pub window: &'a ObservationWindow,
    pub seeds: MissionSeeds,
    pub execution: usize,
}

/// Executes the offline route, re-planning after each charge unless the
/// planner is Offline, and finishes with the leg to the end depot.
pub fn run_mission(setup: &MissionSetup) -> Result<MissionTrace> {
    let instance = setup.instance;
    let ctx = PlanningContext {
        instance,
        priors: setup.priors,
        ng_priors: setup.ng_priors,
        config: setup.config,
    };
    let prior_means = ctx.prior_means();
    let mut window = setup.window.clone();
    window.clear();
    let mut state = MissionState::initial(instance, window);
    let mut rng = rng_from_seed(setup.seeds.truth);
    let planner_seeds = SeedTree::new(setup.seeds.planner);

    let mut legs = Vec::new();
    let mut charges = Vec::new();
    let mut replans = Vec::new();
    let mut route = setup.offline.route.clone();
    let mut at_label = 0;
    let mut failed = false;
    let mut observations_seen = 0;

    while let Some(&next) = route.first() {
        let node = instance
            .node(next)
            .ok_or_else(|| Error::InvalidArgument(format!("route names unknown node {next}")))?;
        let leg = simulate_leg(
            &mut state,
            at_label,
            next,
            &node.position,
            &instance.flight,
            setup.truth,
            &prior_means,
            &mut rng,
        )?;
        observations_seen += leg.observations.len();
        let last_leg = LegEnergy {
            planned: leg.planned_energy,
            actual: leg.actual_energy,
        };
        failed = leg.failed;
        legs.push(leg);
        if failed {
            break;
        }
        let charge = simulate_charge(&mut state, instance, next)?;
        failed = charge.failed;
        charges.push(charge);
        if failed {
            break;
        }
        at_label = next;
        route.remove(0);
        if !setup.planner.replans() {
            continue;
        }
        if state.unvisited.is_empty() {
            route.clear();
            continue;
        }
        let seed = planner_seeds.child_u64(replans.len() as u64).value();
        let started = Instant::now();
        let outcome = match setup.planner {
            PlannerKind::Adapt => {
                plan_online_adapt(&ctx, &state, &route, seed).map(|o| (o.plan, Some(o.posteriors), o.candidates.len()))
            }
            PlannerKind::Romp => plan_romp(&ctx, &state, &route, seed).map(|p| (p, None, 1)),
            PlannerKind::WeightedErr => {
                plan_weighted_err(&ctx, &state, Some(last_leg), &route, seed).map(|p| (p, None, 1))
            }
            PlannerKind::McGreedy => plan_mcgreedy(&ctx, &state, &route, seed).map(|p| (p, None, 1)),
            PlannerKind::Offline => unreachable!("offline never re-plans"),
        };
        let (plan, posteriors, n_candidates) = match outcome {
            Ok(x) => x,
            Err(Error::MissionOver { .. }) => (Plan::direct_return(), None, 0),
            Err(e) => return Err(e),
        };
        let wall_time_s = started.elapsed().as_secs_f64();
        replans.push(ReplanRecord {
            at_node: next,
            elapsed_time: state.elapsed_time,
            residual_energy: state.residual_energy,
            observations_seen,
            posteriors,
            theta: plan.theta,
            n_candidates,
            route: plan.route.clone(),
            planned_prize: plan.planned_prize,
            planned_cost: plan.planned_cost,
            wall_time_s,
        });
        route = plan.route;
    }

    if !failed {
        let leg = simulate_leg(
            &mut state,
            at_label,
            END_LABEL,
            &instance.end_depot,
            &instance.flight,
            setup.truth,
            &prior_means,
            &mut rng,
        )?;
        failed = leg.failed;
        legs.push(leg);
    }

    let total_prize = charges.iter().map(|c| c.prize).sum();
    Ok(MissionTrace {
        instance: instance.name.clone(),
        planner: setup.planner,
        execution: setup.execution,
        theta_min: setup.config.theta_min,
        delta_mu: setup.truth.delta_mu,
        delta_sigma: setup.truth.delta_sigma,
        seeds: setup.seeds,
        battery_capacity: instance.flight.battery_capacity,
        energy_reserve: instance.flight.energy_reserve,
        window_length: state.window.window_length(),
        reading_period: state.window.reading_period(),
        ng_priors: *setup.ng_priors,
        offline_route: setup.offline.route.clone(),
        legs,
        charges,
        replans,
        final_residual: state.residual_energy,
        status: if failed {
            MissionStatus::Failure
        } else {
            MissionStatus::Success
        },
        total_prize,
        total_cost: instance.flight.battery_capacity - state.residual_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{ng_from_normal, regime_priors, NgPriorConfig, RegressionCoefficients};
    use crate::instance::{charge_cost, travel_cost, NodeSpec};

    fn priors() -> PerRegime<NormalDist> {
        regime_priors(&RegressionCoefficients::m100(), 3.93, 1.225).unwrap()
    }

    /// The rounded prior values, so the arithmetic examples come out exact.
    fn rounded_priors() -> PerRegime<NormalDist> {
        PerRegime::new(
            NormalDist::new(579.75, 692.16).unwrap(),
            NormalDist::new(501.80, 423.20).unwrap(),
            NormalDist::new(479.00, 299.45).unwrap(),
        )
    }

    fn point_mass(p: &PerRegime<NormalDist>) -> PerRegime<NormalDist> {
        p.map(|d| NormalDist::new(d.mean, 0.0).unwrap())
    }

    fn single_node_instance(x: f64, v0: f64) -> Instance {
        Instance {
            name: "one".into(),
            nodes: vec![NodeSpec {
                id: 1,
                position: Point3::new(x, 0.0, 0.0),
                initial_voltage: v0,
            }],
            start_depot: Point3::ORIGIN,
            end_depot: Point3::ORIGIN,
            charger: Default::default(),
            flight: Default::default(),
        }
    }

    #[test]
    fn truth_shift_and_scale() {
        let t = make_truth(&rounded_priors(), 0.1, 0.2).unwrap();
        assert!((t.dists.cruise.mean - 551.98).abs() < 1e-9);
        assert!((t.dists.cruise.sd() - 1.2 * 423.20f64.sqrt()).abs() < 1e-3);
        assert!((t.dists.cruise.sd() - 24.686).abs() < 1e-3);
        let t = make_truth(&rounded_priors(), -0.1, 0.0).unwrap();
        assert!((t.dists.cruise.mean - 451.62).abs() < 1e-9);
        let t = make_truth(&priors(), 0.0, 0.0).unwrap();
        assert_eq!(t.dists, priors());
        assert!(make_truth(&priors(), 0.0, -1.5).is_err());
    }

    #[test]
    fn deterministic_leg_matches_travel_cost() {
        let inst = single_node_instance(1000.0, 30.0);
        let truth = TruthModel {
            dists: point_mass(&rounded_priors()),
            delta_mu: 0.0,
            delta_sigma: 0.0,
        };
        let means = truth.means();
        let mut state = MissionState::initial(&inst, ObservationWindow::default());
        let mut rng = rng_from_seed(1);
        let leg = simulate_leg(
            &mut state,
            0,
            1,
            &inst.nodes[0].position,
            &inst.flight,
            &truth,
            &means,
            &mut rng,
        )
        .unwrap();
        assert!((leg.actual_energy - 63.1625).abs() < 1e-6);
        let expected = travel_cost(&Point3::ORIGIN, &inst.nodes[0].position, &inst.flight, &means).unwrap();
        assert!((leg.actual_energy - expected).abs() < 1e-6);
        // 10 s takeoff, 100 s cruise in 5 readings, 15 s landing
        assert_eq!(leg.observations.len(), 7);
        assert!((state.elapsed_time - 125.0).abs() < 1e-9);
        let sum: f64 = leg.observations.iter().map(|o| o.energy()).sum();
        assert_eq!(sum, leg.actual_energy);
    }

    #[test]
    fn charge_examples() {
        let inst = single_node_instance(10.0, 30.0);
        let mut state = MissionState::initial(&inst, ObservationWindow::default());
        let c = simulate_charge(&mut state, &inst, 1).unwrap();
        assert!((c.prize - 4.32).abs() < 1e-12);
        assert!((c.cost - 10.8).abs() < 1e-12);
        assert!((c.duration - 161.616).abs() < 1e-3);
        assert!(state.unvisited.is_empty());
        assert!(simulate_charge(&mut state, &inst, 1).is_err());

        let full = single_node_instance(10.0, 42.0);
        let mut state = MissionState::initial(&full, ObservationWindow::default());
        let c = simulate_charge(&mut state, &full, 1).unwrap();
        assert_eq!((c.prize, c.cost, c.duration), (0.0, 0.0, 0.0));
    }

    #[test]
    fn later_charge_collects_depletion() {
        let mut inst = single_node_instance(10.0, 30.0);
        inst.nodes.push(NodeSpec {
            id: 2,
            position: Point3::new(20.0, 0.0, 0.0),
            initial_voltage: 25.0,
        });
        let mut state = MissionState::initial(&inst, ObservationWindow::default());
        simulate_charge(&mut state, &inst, 1).unwrap();
        let t = state.elapsed_time;
        let c = simulate_charge(&mut state, &inst, 2).unwrap();
        let at_zero = node_prize(&inst.nodes[1], &inst.charger, 0.0).unwrap();
        assert!(c.prize > at_zero);
        assert!((c.prize - at_zero - inst.charger.depletion_rate * t).abs() < 1e-12);
    }

    #[test]
    fn insufficient_charge_fails_without_spending() {
        let inst = single_node_instance(10.0, 20.0);
        let mut state = MissionState::initial(&inst, ObservationWindow::default());
        state.residual_energy = 5.0;
        let c = simulate_charge(&mut state, &inst, 1).unwrap();
        assert!(c.failed);
        assert_eq!(state.residual_energy, 5.0);
        assert!(charge_cost(&inst.nodes[0], &inst.charger, 0.0).unwrap() > 5.0);
    }

    #[test]
    fn deterministic_offline_replay() {
        // prizes grow while the mission runs; freeze them so the plan's
        // cost is exactly what gets spent
        let mut inst = crate::instance::generate_instance(12, 1000.0, 5, &Default::default()).unwrap();
        inst.charger.depletion_rate = 0.0;
        let p = priors();
        let truth = TruthModel {
            dists: point_mass(&p),
            delta_mu: 0.0,
            delta_sigma: 0.0,
        };
        let ng = p.try_map(|_, d| ng_from_normal(d, &NgPriorConfig::default())).unwrap();
        let cfg = PlannerConfig::default();
        let offline = crate::planners::plan_offline(&inst, &p, &cfg.acs).unwrap();
        let window = ObservationWindow::default();
        let setup = MissionSetup {
            instance: &inst,
            planner: PlannerKind::Offline,
            config: &cfg,
            priors: &p,
            ng_priors: &ng,
            truth: &truth,
            offline: &offline,
            window: &window,
            seeds: MissionSeeds { truth: 1, planner: 2 },
            execution: 0,
        };
        let trace = run_mission(&setup).unwrap();
        assert!(trace.succeeded());
        assert!((trace.total_cost - offline.planned_cost).abs() < 1e-6);
        assert!((trace.total_prize - offline.planned_prize).abs() < 1e-9);
        assert_eq!(run_mission(&setup).unwrap(), trace);
    }
}
