use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use super::config::{EnergyModel, ExperimentConfig};
use super::metrics::{metrics_csv, metrics_from_traces, timing_csv, MetricsRecord};
use crate::instance::Instance;
use crate::planners::{plan_offline, Plan, PlannerKind};
use crate::seed::SeedTree;
use crate::sim::{make_truth, run_mission, MissionSeeds, MissionSetup, MissionTrace};
use crate::{Error, Result};

pub const METRICS_FILE: &str = "metrics.csv";
pub const TIMING_FILE: &str = "timing.csv";
pub const TRACES_FILE: &str = "traces.jsonl";

/// Traces in grid order and one metrics row per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub traces: Vec<MissionTrace>,
    pub metrics: Vec<MetricsRecord>,
}

struct Prepared {
    instance: Instance,
    model: EnergyModel,
    /// Indexed by execution.
    offline: Vec<Plan>,
}

/// Seeds of one execution of one instance.
///
/// Truth draws do not depend on the cell or the planner, so every planner
/// and every (delta_mu, delta_sigma) cell sees the same standard-normal
/// stream.
pub fn execution_seeds(root_seed: u64, instance: &str, execution: usize) -> SeedTree {
    SeedTree::new(root_seed).child(instance).child_u64(execution as u64)
}

pub fn mission_seeds(root_seed: u64, instance: &str, execution: usize, planner: PlannerKind) -> MissionSeeds {
    let tree = execution_seeds(root_seed, instance, execution);
    MissionSeeds {
        truth: tree.child("truth").value(),
        planner: tree.child("planner").child(planner.key()).value(),
    }
}

fn offline_seed(root_seed: u64, instance: &str, execution: usize) -> u64 {
    execution_seeds(root_seed, instance, execution).child("offline").value()
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn prepare(config: &ExperimentConfig, base_dir: &Path, pool: &rayon::ThreadPool) -> Result<Vec<Prepared>> {
    let mut out = Vec::new();
    for source in &config.instances {
        let instance = source.load(base_dir)?;
        if out.iter().any(|p: &Prepared| p.instance.name == instance.name) {
            return Err(Error::validation(
                "instances",
                format!("duplicate instance name {:?}", instance.name),
            ));
        }
        let model = config.energy.model(&instance.flight)?;
        let offline = pool.install(|| {
            (0..config.n_executions)
                .into_par_iter()
                .map(|exec| {
                    let acs = config
                        .planner
                        .acs
                        .with_seed(offline_seed(config.root_seed, &instance.name, exec));
                    plan_offline(&instance, &model.priors, &acs)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        out.push(Prepared {
            instance,
            model,
            offline,
        });
    }
    Ok(out)
}

/// Runs every (instance, planner, delta_mu, delta_sigma, execution) mission.
///
/// Within an instance and execution all planners and cells start from the
/// same offline route. Output order is the grid order above, whatever the
/// worker count. Relative instance paths resolve against `base_dir`.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path) -> Result<ExperimentOutput> {
    config.validate()?;
    let pool = pool(config.workers)?;
    let prepared = prepare(config, base_dir, &pool)?;

    let mut jobs = Vec::new();
    for (i, p) in prepared.iter().enumerate() {
        for &planner in &config.planners {
            for &dmu in &config.delta_mu_grid {
                for &dsig in &config.delta_sigma_grid {
                    let truth = make_truth(&p.model.priors, dmu, dsig)?;
                    for exec in 0..config.n_executions {
                        jobs.push((i, planner, truth, exec));
                    }
                }
            }
        }
    }

    let traces = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, planner, truth, exec)| {
                let p = &prepared[i];
                run_mission(&MissionSetup {
                    instance: &p.instance,
                    planner,
                    config: &config.planner,
                    priors: &p.model.priors,
                    ng_priors: &p.model.ng_priors,
                    truth: &truth,
                    offline: &p.offline[exec],
                    window: &p.model.window,
                    seeds: mission_seeds(config.root_seed, &p.instance.name, exec, planner),
                    execution: exec,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let metrics = metrics_from_traces(&traces);
    Ok(ExperimentOutput { traces, metrics })
}

/// Reruns the grid with ADAPT alone once per `theta_min`; the blocks are
/// concatenated in grid order.
pub fn theta_sensitivity_sweep(
    config: &ExperimentConfig,
    theta_min_grid: &[f64],
    base_dir: &Path,
) -> Result<ExperimentOutput> {
    if !config.planners.contains(&PlannerKind::Adapt) {
        return Err(Error::Config(
            "the safety-belief sweep needs ADAPT in the planner list".into(),
        ));
    }
    if theta_min_grid.is_empty() {
        return Err(Error::validation("theta_min_grid", "grid must not be empty"));
    }
    let mut all = ExperimentOutput {
        traces: Vec::new(),
        metrics: Vec::new(),
    };
    for &theta_min in theta_min_grid {
        let mut c = config.clone();
        c.planners = vec![PlannerKind::Adapt];
        c.planner.theta_min = theta_min;
        let out = run_experiment(&c, base_dir)?;
        all.traces.extend(out.traces);
        all.metrics.extend(out.metrics);
    }
    Ok(all)
}

/// Writes `metrics.csv`, `timing.csv` and `traces.jsonl` into `dir`.
pub fn write_archive(dir: &Path, output: &ExperimentOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let metrics_path = dir.join(METRICS_FILE);
    fs::write(&metrics_path, metrics_csv(&output.metrics)).map_err(|e| Error::io(&metrics_path, e))?;
    let timing_path = dir.join(TIMING_FILE);
    fs::write(&timing_path, timing_csv(&output.traces)).map_err(|e| Error::io(&timing_path, e))?;

    let traces_path = dir.join(TRACES_FILE);
    let file = fs::File::create(&traces_path).map_err(|e| Error::io(&traces_path, e))?;
    let mut w = BufWriter::new(file);
    for t in &output.traces {
        serde_json::to_writer(&mut w, t).map_err(|e| Error::io(&traces_path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(&traces_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&traces_path, e))
}

/// Reads a trace archive written by [`write_archive`].
pub fn read_traces(path: &Path) -> Result<Vec<MissionTrace>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", i + 1),
            })
        })
        .collect()
}
