use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::energy::{
    ng_from_normal, regime_priors, NgPriorConfig, NormalDist, NormalGamma, ObservationWindow, PerRegime,
    RegressionCoefficients,
};
use crate::instance::{
    generate_instance, load_instance, ChargerModel, FlightProfile, GeneratorOptions, Instance, Point3,
};
use crate::planners::{PlannerConfig, PlannerKind};
use crate::{Error, Result};

/// Parameters of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n_nodes: usize,
    #[serde(default = "default_area_side")]
    pub area_side: f64,
    pub seed: u64,
    #[serde(default)]
    pub start_depot: Point3,
    #[serde(default)]
    pub end_depot: Point3,
    #[serde(default)]
    pub charger: Option<ChargerModel>,
    #[serde(default)]
    pub flight: Option<FlightProfile>,
}

fn default_area_side() -> f64 {
    1000.0
}

impl GeneratorSpec {
    pub fn new(n_nodes: usize, seed: u64) -> Self {
        GeneratorSpec {
            n_nodes,
            area_side: default_area_side(),
            seed,
            start_depot: Point3::ORIGIN,
            end_depot: Point3::ORIGIN,
            charger: None,
            flight: None,
        }
    }

    pub fn generate(&self) -> Result<Instance> {
        let options = GeneratorOptions {
            start_depot: self.start_depot,
            end_depot: self.end_depot,
            charger: self.charger.unwrap_or_default(),
            flight: self.flight.unwrap_or_default(),
        };
        generate_instance(self.n_nodes, self.area_side, self.seed, &options)
    }
}

/// Where an instance comes from: exactly one of `file` or `generate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GeneratorSpec>,
}

impl InstanceSource {
    pub fn generated(spec: GeneratorSpec) -> Self {
        InstanceSource {
            file: None,
            generate: Some(spec),
        }
    }

    /// Relative file paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<Instance> {
        match (&self.file, &self.generate) {
            (Some(file), None) => load_instance(&base.join(file)),
            (None, Some(spec)) => spec.generate(),
            _ => Err(Error::validation(
                "instances",
                "give exactly one of `file` or `generate`",
            )),
        }
    }
}

/// Power model shared by planners and the simulated truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    pub coefficients: PerRegime<RegressionCoefficients>,
    pub ng_prior: NgPriorConfig,
    pub window_length: f64,
    pub reading_period: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig {
            coefficients: RegressionCoefficients::m100(),
            ng_prior: NgPriorConfig::default(),
            window_length: 900.0,
            reading_period: 20.0,
        }
    }
}

/// Derived energy model for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    pub priors: PerRegime<NormalDist>,
    pub ng_priors: PerRegime<NormalGamma>,
    pub window: ObservationWindow,
}

impl EnergyConfig {
    pub fn model(&self, flight: &FlightProfile) -> Result<EnergyModel> {
        let priors = regime_priors(&self.coefficients, flight.uav_mass, flight.air_density)?;
        let ng_priors = priors.try_map(|_, p| ng_from_normal(p, &self.ng_prior))?;
        Ok(EnergyModel {
            priors,
            ng_priors,
            window: ObservationWindow::new(self.window_length, self.reading_period)?,
        })
    }
}

/// One experiment: instances x planners x (delta_mu, delta_sigma) cells x
/// executions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub instances: Vec<InstanceSource>,
    #[serde(default = "default_planners")]
    pub planners: Vec<PlannerKind>,
    #[serde(default = "default_grid")]
    pub delta_mu_grid: Vec<f64>,
    #[serde(default = "default_grid")]
    pub delta_sigma_grid: Vec<f64>,
    #[serde(default = "default_executions")]
    pub n_executions: usize,
    #[serde(default)]
    pub root_seed: u64,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub energy: EnergyConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_planners() -> Vec<PlannerKind> {
    PlannerKind::ALL.to_vec()
}

fn default_grid() -> Vec<f64> {
    vec![-0.10, 0.0, 0.10, 0.20]
}

fn default_executions() -> usize {
    50
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    /// Defaults with the given instances.
    pub fn new(instances: Vec<InstanceSource>) -> Self {
        ExperimentConfig {
            name: default_name(),
            instances,
            planners: default_planners(),
            delta_mu_grid: default_grid(),
            delta_sigma_grid: default_grid(),
            n_executions: default_executions(),
            root_seed: 0,
            workers: 0,
            planner: PlannerConfig::default(),
            energy: EnergyConfig::default(),
            output_dir: default_output_dir(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() {
            return Err(Error::validation("instances", "at least one instance is required"));
        }
        if self.planners.is_empty() {
            return Err(Error::validation("planners", "at least one planner is required"));
        }
        for (field, grid) in [
            ("delta_mu_grid", &self.delta_mu_grid),
            ("delta_sigma_grid", &self.delta_sigma_grid),
        ] {
            if grid.is_empty() {
                return Err(Error::validation(field, "grid must not be empty"));
            }
            if grid.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation(field, "grid values must be finite"));
            }
        }
        if let Some(bad) = self.delta_sigma_grid.iter().find(|&&s| s < -1.0) {
            return Err(Error::validation(
                "delta_sigma_grid",
                format!("{bad} would make the sd negative"),
            ));
        }
        if self.n_executions == 0 {
            return Err(Error::validation("n_executions", "must be at least 1"));
        }
        self.planner.validate()
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes to TOML")
    }
}
