//! Experiment grids: instances x planners x (delta_mu, delta_sigma) cells x
//! executions, with metrics, timing and an auditable trace archive.

mod audit;
mod config;
mod metrics;
mod run;

pub use audit::{audit_trace, validate_archive, ArchiveReport, CONSERVATION_TOLERANCE};
pub use config::{EnergyConfig, EnergyModel, ExperimentConfig, GeneratorSpec, InstanceSource};
pub use metrics::{
    compute_metrics, group_cells, mean_sd, metrics_csv, metrics_from_traces, timing_csv, MetricsRecord, METRICS_HEADER,
};
pub use run::{
    execution_seeds, mission_seeds, read_traces, run_experiment, theta_sensitivity_sweep, write_archive,
    ExperimentOutput, METRICS_FILE, TIMING_FILE, TRACES_FILE,
};
