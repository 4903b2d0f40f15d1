//! Problem data for UAV charging scheduling and the prize and cost functions
//! evaluated on it.
//!
//! Units: energy in kJ, power in W, time in s, lengths in m. Conversions
//! happen inside the functions here.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy::PerRegime;
use crate::seed::rng_from_seed;
use crate::{Error, Result};

/// Current instance file format version.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    /// Distance in the horizontal plane; cruise happens at a fixed altitude.
    pub fn horizontal_distance(&self, other: &Point3) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Point3 { x, y, z }
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// A rechargeable sensor node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: usize,
    pub position: Point3,
    /// Capacitor voltage at mission start, in volts.
    pub initial_voltage: f64,
}

/// Supercapacitor bank and inductive charging chain, identical for all nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargerModel {
    /// Farads.
    pub capacitance: f64,
    pub v_max: f64,
    pub v_min: f64,
    /// Constant-current charger current, amperes.
    pub avg_current: f64,
    /// Inductive link efficiency.
    pub eta_ipt: f64,
    /// Constant-current charger efficiency.
    pub eta_cc: f64,
    /// Node energy depletion rate, kJ/s.
    pub depletion_rate: f64,
}

impl Default for ChargerModel {
    fn default() -> Self {
        ChargerModel {
            capacitance: 10.0,
            v_max: 42.0,
            v_min: 20.0,
            avg_current: 0.825,
            eta_ipt: 0.4,
            eta_cc: 0.9,
            depletion_rate: 2.19e-6,
        }
    }
}

impl ChargerModel {
    /// Largest chargeable energy of a node, kJ.
    pub fn max_prize(&self) -> f64 {
        0.5 * self.capacitance * (self.v_max * self.v_max - self.v_min * self.v_min) * 1e-3
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("charger.capacitance", self.capacitance),
            ("charger.avg_current", self.avg_current),
            ("charger.v_max", self.v_max),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.v_min >= 0.0 && self.v_min < self.v_max) {
            return Err(Error::validation(
                "charger.v_min",
                format!("must lie in [0, v_max={}), got {}", self.v_max, self.v_min),
            ));
        }
        for (field, v) in [("charger.eta_ipt", self.eta_ipt), ("charger.eta_cc", self.eta_cc)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::validation(
                    field,
                    format!("efficiency must lie in (0, 1], got {v}"),
                ));
            }
        }
        if !(self.depletion_rate >= 0.0 && self.depletion_rate.is_finite()) {
            return Err(Error::validation(
                "charger.depletion_rate",
                format!("must be nonnegative, got {}", self.depletion_rate),
            ));
        }
        Ok(())
    }
}

/// UAV flight protocol and energy store.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightProfile {
    /// Cruise altitude, m.
    pub cruise_altitude: f64,
    pub speed_takeoff: f64,
    pub speed_cruise: f64,
    pub speed_landing: f64,
    /// Take-off mass including payload, kg.
    pub uav_mass: f64,
    pub air_density: f64,
    /// kJ.
    pub battery_capacity: f64,
    /// Minimum energy that must remain on board, kJ.
    pub energy_reserve: f64,
}

impl Default for FlightProfile {
    fn default() -> Self {
        FlightProfile {
            cruise_altitude: 30.0,
            speed_takeoff: 3.0,
            speed_cruise: 10.0,
            speed_landing: 2.0,
            uav_mass: 3.93,
            air_density: 1.225,
            battery_capacity: 359.64,
            energy_reserve: 0.0,
        }
    }
}

impl FlightProfile {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("flight.cruise_altitude", self.cruise_altitude),
            ("flight.speed_takeoff", self.speed_takeoff),
            ("flight.speed_cruise", self.speed_cruise),
            ("flight.speed_landing", self.speed_landing),
            ("flight.uav_mass", self.uav_mass),
            ("flight.air_density", self.air_density),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, format!("must be positive, got {v}")));
            }
        }
        if !(self.energy_reserve >= 0.0) {
            return Err(Error::validation(
                "flight.energy_reserve",
                format!("must be nonnegative, got {}", self.energy_reserve),
            ));
        }
        if !(self.battery_capacity > self.energy_reserve && self.battery_capacity.is_finite()) {
            return Err(Error::validation(
                "flight.battery_capacity",
                format!(
                    "must exceed the energy reserve {}, got {}",
                    self.energy_reserve, self.battery_capacity
                ),
            ));
        }
        Ok(())
    }

    /// Seconds spent in each regime flying between two points.
    pub fn regime_durations(&self, from: &Point3, to: &Point3) -> PerRegime<f64> {
        PerRegime {
            takeoff: (self.cruise_altitude - from.z) / self.speed_takeoff,
            cruise: from.horizontal_distance(to) / self.speed_cruise,
            landing: (self.cruise_altitude - to.z) / self.speed_landing,
        }
    }
}

/// A complete charging-scheduling instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    /// Nodes with ids `1..=N` in order.
    pub nodes: Vec<NodeSpec>,
    pub start_depot: Point3,
    pub end_depot: Point3,
    pub charger: ChargerModel,
    pub flight: FlightProfile,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        self.charger.validate()?;
        self.flight.validate()?;
        for (field, p) in [("start_depot", &self.start_depot), ("end_depot", &self.end_depot)] {
            check_altitude(field, p, &self.flight)?;
        }
        for (k, node) in self.nodes.iter().enumerate() {
            if node.id != k + 1 {
                return Err(Error::validation(
                    format!("nodes[{k}].id"),
                    format!("node ids must be contiguous from 1, expected {} got {}", k + 1, node.id),
                ));
            }
            check_altitude(&format!("nodes[{k}].position"), &node.position, &self.flight)?;
            let v = node.initial_voltage;
            if !(v >= self.charger.v_min && v <= self.charger.v_max) {
                return Err(Error::validation(
                    format!("nodes[{k}].initial_voltage"),
                    format!(
                        "voltage {v} V outside [{}, {}] V",
                        self.charger.v_min, self.charger.v_max
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn node(&self, id: usize) -> Option<&NodeSpec> {
        id.checked_sub(1).and_then(|k| self.nodes.get(k))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn check_altitude(field: &str, p: &Point3, flight: &FlightProfile) -> Result<()> {
    if !(p.x.is_finite() && p.y.is_finite()) {
        return Err(Error::validation(field, "coordinates must be finite"));
    }
    if !(p.z >= 0.0 && p.z < flight.cruise_altitude) {
        return Err(Error::validation(
            field,
            format!(
                "altitude {} must lie in [0, cruise altitude {})",
                p.z, flight.cruise_altitude
            ),
        ));
    }
    Ok(())
}

fn check_elapsed(elapsed: f64) -> Result<()> {
    if !(elapsed >= 0.0) || !elapsed.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "elapsed time must be finite and nonnegative, got {elapsed}"
        )));
    }
    Ok(())
}

/// Chargeable energy of a node at mission time `elapsed` (kJ).
///
/// Grows linearly with the depletion rate and saturates at the capacitor's
/// full `[v_min, v_max]` swing.
pub fn node_prize(node: &NodeSpec, charger: &ChargerModel, elapsed: f64) -> Result<f64> {
    check_elapsed(elapsed)?;
    let v0 = node.initial_voltage;
    let initial = 0.5 * charger.capacitance * (charger.v_max * charger.v_max - v0 * v0) * 1e-3;
    Ok((initial + charger.depletion_rate * elapsed).min(charger.max_prize()))
}

/// Energy the UAV spends to deliver the node's current prize (kJ).
pub fn charge_cost(node: &NodeSpec, charger: &ChargerModel, elapsed: f64) -> Result<f64> {
    if !(charger.eta_ipt > 0.0) {
        return Err(Error::Model(format!(
            "inductive link efficiency must be positive, got {}",
            charger.eta_ipt
        )));
    }
    Ok(node_prize(node, charger, elapsed)? / charger.eta_ipt)
}

/// Time needed to deliver `prize_kj` at constant current (s).
pub fn charge_time_for_prize(prize_kj: f64, charger: &ChargerModel) -> Result<f64> {
    if !(prize_kj >= 0.0) {
        return Err(Error::Model(format!("prize must be nonnegative, got {prize_kj}")));
    }
    if !(charger.eta_cc > 0.0 && charger.avg_current > 0.0) {
        return Err(Error::Model("charger current and efficiency must be positive".into()));
    }
    let headroom = charger.v_max * charger.v_max - 2.0 * prize_kj * 1e3 / charger.capacitance;
    if headroom < 0.0 {
        return Err(Error::Model(format!(
            "prize {prize_kj} kJ exceeds the capacitor's capacity"
        )));
    }
    let v_now = headroom.sqrt();
    Ok(charger.capacitance * (charger.v_max - v_now) / charger.avg_current / charger.eta_cc)
}

/// Charging time for a node at mission time `elapsed` (s).
pub fn charge_time(node: &NodeSpec, charger: &ChargerModel, elapsed: f64) -> Result<f64> {
    charge_time_for_prize(node_prize(node, charger, elapsed)?, charger)
}

/// Energy to fly from `from` to `to` at the given per-regime average powers
/// (kJ): climb to cruise altitude, cruise horizontally, descend.
pub fn travel_cost(from: &Point3, to: &Point3, flight: &FlightProfile, powers: &PerRegime<f64>) -> Result<f64> {
    if powers.iter().any(|(_, &p)| !(p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "regime powers must be positive and finite, got {powers:?}"
        )));
    }
    Ok(travel_cost_unchecked(from, to, flight, powers))
}

pub(crate) fn travel_cost_unchecked(
    from: &Point3,
    to: &Point3,
    flight: &FlightProfile,
    powers: &PerRegime<f64>,
) -> f64 {
    let d = flight.regime_durations(from, to);
    (powers.takeoff * d.takeoff + powers.cruise * d.cruise + powers.landing * d.landing) * 1e-3
}

/// Options for [`generate_instance`] beyond node count and area.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorOptions {
    pub start_depot: Point3,
    pub end_depot: Point3,
    pub charger: ChargerModel,
    pub flight: FlightProfile,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions {
            start_depot: Point3::ORIGIN,
            end_depot: Point3::ORIGIN,
            charger: ChargerModel::default(),
            flight: FlightProfile::default(),
        }
    }
}

/// Draws ground sensors uniformly over a square with uniform initial voltages.
///
/// The same seed always yields the same instance, but instances with
/// different node counts share no prefix.
pub fn generate_instance(n_nodes: usize, area_side: f64, seed: u64, options: &GeneratorOptions) -> Result<Instance> {
    if n_nodes == 0 {
        return Err(Error::InvalidArgument("instance needs at least one node".into()));
    }
    if !(area_side > 0.0 && area_side.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "area side must be positive, got {area_side}"
        )));
    }
    let mut rng = rng_from_seed(seed ^ (n_nodes as u64).rotate_left(32));
    let charger = options.charger;
    let nodes = (1..=n_nodes)
        .map(|id| {
            let x = rng.random::<f64>() * area_side;
            let y = rng.random::<f64>() * area_side;
            let initial_voltage = charger.v_min + rng.random::<f64>() * (charger.v_max - charger.v_min);
            NodeSpec {
                id,
                position: Point3::new(x, y, 0.0),
                initial_voltage,
            }
        })
        .collect();
    let instance = Instance {
        name: format!("gen{n_nodes}-s{seed}"),
        nodes,
        start_depot: options.start_depot,
        end_depot: options.end_depot,
        charger,
        flight: options.flight,
    };
    instance.validate()?;
    Ok(instance)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format_version: u32,
    name: String,
    start_depot: Point3,
    end_depot: Point3,
    charger: ChargerModel,
    flight: FlightProfile,
    #[serde(default)]
    nodes: Vec<NodeSpec>,
}

impl Instance {
    pub fn to_toml(&self) -> String {
        let doc = InstanceDoc {
            format_version: FORMAT_VERSION,
            name: self.name.clone(),
            start_depot: self.start_depot,
            end_depot: self.end_depot,
            charger: self.charger,
            flight: self.flight,
            nodes: self.nodes.clone(),
        };
        toml::to_string(&doc).expect("instance serializes to TOML")
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let doc: InstanceDoc = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::validation(
                "format_version",
                format!("unsupported version {}, expected {FORMAT_VERSION}", doc.format_version),
            ));
        }
        let instance = Instance {
            name: doc.name,
            nodes: doc.nodes,
            start_depot: doc.start_depot,
            end_depot: doc.end_depot,
            charger: doc.charger,
            flight: doc.flight,
        };
        instance.validate()?;
        Ok(instance)
    }
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<()> {
    fs::write(path, instance.to_toml()).map_err(|e| Error::io(path, e))
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Instance::from_toml(&text, path)
}
