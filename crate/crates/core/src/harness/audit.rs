use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::metrics::{metrics_csv, metrics_from_traces};
use super::run::{read_traces, METRICS_FILE, TRACES_FILE};
use crate::energy::ObservationWindow;
use crate::planners::END_LABEL;
use crate::sim::{MissionStatus, MissionTrace};
use crate::{Error, Result};

/// Slack for the summed conservation identity, kJ. The residual itself is
/// replayed bit for bit.
pub const CONSERVATION_TOLERANCE: f64 = 1e-9;

fn fail(t: &MissionTrace, what: impl std::fmt::Display) -> Error {
    Error::Audit(format!(
        "{} {} exec {} (dmu {}, dsig {}): {what}",
        t.instance, t.planner, t.execution, t.delta_mu, t.delta_sigma
    ))
}

/// Checks one trace against its own records.
///
/// * The battery is replayed reading by reading and charge by charge, in
///   mission order, and must land exactly on `final_residual`.
/// * Capacity minus final residual equals the summed leg and charge
///   energies within [`CONSERVATION_TOLERANCE`].
/// * Each leg's energy is the sum of its readings, P* is the sum of
///   delivered prizes and C* is capacity minus final residual.
/// * The status agrees with the failure flags.
/// * Replaying the first `observations_seen` readings through a fresh
///   window reproduces every recorded posterior exactly.
pub fn audit_trace(t: &MissionTrace) -> Result<()> {
    if t.legs.is_empty() {
        return Err(fail(t, "no legs"));
    }
    for (i, leg) in t.legs.iter().enumerate() {
        let sum = leg.observations.iter().fold(0.0, |acc, r| acc + r.energy());
        if sum != leg.actual_energy {
            return Err(fail(
                t,
                format!("leg {i} energy {} but readings sum to {sum}", leg.actual_energy),
            ));
        }
    }
    if t.charges.len() > t.legs.len() {
        return Err(fail(t, "more charges than legs"));
    }

    let mut residual = t.battery_capacity;
    for (i, leg) in t.legs.iter().enumerate() {
        for r in &leg.observations {
            residual -= r.energy();
        }
        if let Some(c) = t.charges.get(i) {
            if c.failed && (c.prize != 0.0 || c.cost != 0.0) {
                return Err(fail(t, format!("failed charge at node {} delivered energy", c.node)));
            }
            residual -= c.cost;
        }
    }
    if residual != t.final_residual {
        return Err(fail(
            t,
            format!("replayed residual {residual} but trace says {}", t.final_residual),
        ));
    }
    let spent: f64 =
        t.legs.iter().map(|l| l.actual_energy).sum::<f64>() + t.charges.iter().map(|c| c.cost).sum::<f64>();
    let used = t.battery_capacity - t.final_residual;
    if (used - spent).abs() > CONSERVATION_TOLERANCE {
        return Err(fail(
            t,
            format!("battery used {used} kJ but legs and charges spent {spent} kJ"),
        ));
    }
    let prize: f64 = t.charges.iter().map(|c| c.prize).sum();
    if prize != t.total_prize {
        return Err(fail(t, format!("P* {} but charges deliver {prize}", t.total_prize)));
    }
    if used != t.total_cost {
        return Err(fail(
            t,
            format!("C* {} but capacity minus residual is {used}", t.total_cost),
        ));
    }

    let failed_somewhere = t.legs.iter().any(|l| l.failed) || t.charges.iter().any(|c| c.failed);
    let reached_end = t.legs.last().is_some_and(|l| l.to == END_LABEL && !l.failed);
    match t.status {
        MissionStatus::Success if failed_somewhere || !reached_end || t.final_residual < t.energy_reserve => {
            return Err(fail(t, "marked success but a leg or charge failed"))
        }
        MissionStatus::Failure if !failed_somewhere => return Err(fail(t, "marked failure without a failed step")),
        _ => {}
    }

    let readings: Vec<_> = t.observations().copied().collect();
    for (k, replan) in t.replans.iter().enumerate() {
        let Some(recorded) = &replan.posteriors else { continue };
        if replan.observations_seen > readings.len() {
            return Err(fail(
                t,
                format!("replan {k} claims {} readings", replan.observations_seen),
            ));
        }
        let mut window = ObservationWindow::new(t.window_length, t.reading_period)?;
        for r in &readings[..replan.observations_seen] {
            window.push(r.regime, r.timestamp, r.power)?;
        }
        let replayed = window.posteriors(&t.ng_priors);
        if &replayed != recorded {
            return Err(fail(
                t,
                format!("replan {k} posteriors do not replay: {replayed:?} vs {recorded:?}"),
            ));
        }
    }
    Ok(())
}

/// What [`validate_archive`] checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchiveReport {
    pub traces: usize,
    pub metrics_rows: usize,
}

/// Audits every trace in `dir`, checks that planners of the same instance
/// and execution share the offline route, and recomputes the metrics file.
pub fn validate_archive(dir: &Path) -> Result<ArchiveReport> {
    let traces = read_traces(&dir.join(TRACES_FILE))?;
    for t in &traces {
        audit_trace(t)?;
    }
    let mut offline: HashMap<(&str, usize), &[usize]> = HashMap::new();
    for t in &traces {
        let route = offline
            .entry((t.instance.as_str(), t.execution))
            .or_insert(&t.offline_route);
        if *route != t.offline_route.as_slice() {
            return Err(fail(t, "offline route differs from another planner's"));
        }
    }
    let metrics = metrics_from_traces(&traces);
    let path = dir.join(METRICS_FILE);
    let on_disk = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    if on_disk != metrics_csv(&metrics) {
        return Err(Error::Audit(format!(
            "{} does not match the metrics recomputed from the traces",
            path.display()
        )));
    }
    Ok(ArchiveReport {
        traces: traces.len(),
        metrics_rows: metrics.len(),
    })
}
