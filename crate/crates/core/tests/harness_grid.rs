use std::fs;
use std::path::Path;

use udop::harness::{
    compute_metrics, metrics_csv, run_experiment, theta_sensitivity_sweep, validate_archive, write_archive,
    ExperimentConfig, GeneratorSpec, InstanceSource, METRICS_FILE,
};
use udop::instance::save_instance;
use udop::planners::PlannerKind;

fn small(planners: Vec<PlannerKind>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(vec![InstanceSource::generated(GeneratorSpec::new(8, 8))]);
    c.planners = planners;
    c.n_executions = 2;
    c.planner.acs.n_ants = 8;
    c.planner.acs.n_iterations = 20;
    c.planner.mc_samples = 4;
    c
}

#[test]
fn one_cell_two_executions() {
    let mut c = small(vec![PlannerKind::Romp]);
    c.delta_mu_grid = vec![0.1];
    c.delta_sigma_grid = vec![0.0];
    let out = run_experiment(&c, Path::new(".")).unwrap();
    assert_eq!(out.traces.len(), 2);
    assert_eq!(out.metrics.len(), 1);
    assert_eq!(out.metrics[0].executions, 2);
}

#[test]
fn full_grid_counts() {
    let mut c = small(PlannerKind::ALL.to_vec());
    c.n_executions = 1;
    let out = run_experiment(&c, Path::new(".")).unwrap();
    assert_eq!(out.traces.len(), 5 * 16);
    assert_eq!(out.metrics.len(), 5 * 16);
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let mut c = small(vec![PlannerKind::Offline, PlannerKind::Adapt]);
    c.delta_sigma_grid = vec![0.0, 0.2];
    c.workers = 1;
    let a = run_experiment(&c, Path::new(".")).unwrap();
    c.workers = 3;
    let b = run_experiment(&c, Path::new(".")).unwrap();
    assert_eq!(metrics_csv(&a.metrics), metrics_csv(&b.metrics));
    let strip = |o: &udop::harness::ExperimentOutput| o.traces.iter().map(|t| t.without_timing()).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn adding_a_planner_leaves_others_untouched() {
    let mut c = small(vec![PlannerKind::Romp]);
    c.delta_mu_grid = vec![0.2];
    let alone = run_experiment(&c, Path::new(".")).unwrap();
    c.planners = vec![PlannerKind::Adapt, PlannerKind::Romp];
    let both = run_experiment(&c, Path::new(".")).unwrap();
    let romp: Vec<_> = both
        .traces
        .iter()
        .filter(|t| t.planner == PlannerKind::Romp)
        .map(|t| t.without_timing())
        .collect();
    let solo: Vec<_> = alone.traces.iter().map(|t| t.without_timing()).collect();
    assert_eq!(romp, solo);
}

#[test]
fn sweep_at_default_theta_matches_base_run() {
    let mut c = small(vec![PlannerKind::Adapt]);
    c.delta_mu_grid = vec![0.2];
    c.delta_sigma_grid = vec![0.1];
    let base = run_experiment(&c, Path::new(".")).unwrap();
    let sweep = theta_sensitivity_sweep(&c, &[c.planner.theta_min], Path::new(".")).unwrap();
    assert_eq!(metrics_csv(&base.metrics), metrics_csv(&sweep.metrics));

    let blocks = theta_sensitivity_sweep(&c, &[0.45, 0.55, 0.65, 0.75, 0.85], Path::new(".")).unwrap();
    let thetas: Vec<f64> = blocks.metrics.iter().map(|m| m.theta_min).collect();
    assert_eq!(thetas, vec![0.45, 0.55, 0.65, 0.75, 0.85]);
}

#[test]
fn config_file_with_instance_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = GeneratorSpec::new(6, 2).generate().unwrap();
    save_instance(&inst, &dir.path().join("six.toml")).unwrap();
    let text = r#"
        planners = ["offline", "weighted_err"]
        n_executions = 2
        delta_mu_grid = [0.0]
        delta_sigma_grid = [0.0]
        [[instances]]
        file = "six.toml"
        [planner.acs]
        n_ants = 5
        n_iterations = 10
    "#;
    let cfg_path = dir.path().join("exp.toml");
    fs::write(&cfg_path, text).unwrap();
    let c = ExperimentConfig::load(&cfg_path).unwrap();
    let out = run_experiment(&c, dir.path()).unwrap();
    assert!(out.traces.iter().all(|t| t.instance == inst.name));

    let archive = dir.path().join("out");
    write_archive(&archive, &out).unwrap();
    let report = validate_archive(&archive).unwrap();
    assert_eq!(report.traces, 4);
    let again = run_experiment(&c, dir.path()).unwrap();
    assert_eq!(
        fs::read_to_string(archive.join(METRICS_FILE)).unwrap(),
        metrics_csv(&again.metrics)
    );
}

#[test]
fn metrics_over_successes_only() {
    let mut c = small(vec![PlannerKind::Offline]);
    c.delta_mu_grid = vec![0.2];
    c.delta_sigma_grid = vec![0.0];
    c.n_executions = 4;
    let out = run_experiment(&c, Path::new(".")).unwrap();
    let m = compute_metrics(&out.traces);
    let wins: Vec<f64> = out
        .traces
        .iter()
        .filter(|t| t.succeeded())
        .map(|t| t.total_prize)
        .collect();
    assert_eq!(m.successes, wins.len());
    assert_eq!(m.msr, wins.len() as f64 / 4.0);
    assert_eq!(m.prize_mean.is_none(), wins.is_empty());
}
