use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{NormalGamma, PerRegime, Regime};
use crate::{Error, Result};

/// One average-power reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Mission time at which the reading completed, in seconds.
    pub timestamp: f64,
    /// Average power over the reading period, in watts.
    pub power: f64,
}

/// Sliding time window of power readings, kept per regime.
///
/// A reading is retained while its age relative to the newest reading is at
/// most `window_length` seconds (the boundary is inclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationWindow {
    window_length: f64,
    reading_period: f64,
    newest: Option<f64>,
    readings: PerRegime<VecDeque<Observation>>,
}

impl Default for ObservationWindow {
    fn default() -> Self {
        ObservationWindow::new(900.0, 20.0).expect("default window is valid")
    }
}

impl ObservationWindow {
    pub fn new(window_length: f64, reading_period: f64) -> Result<Self> {
        if !(window_length > 0.0) || !(reading_period > 0.0) {
            return Err(Error::Config(format!(
                "window length and reading period must be positive, got {window_length} and {reading_period}"
            )));
        }
        Ok(ObservationWindow {
            window_length,
            reading_period,
            newest: None,
            readings: PerRegime::default(),
        })
    }

    pub fn window_length(&self) -> f64 {
        self.window_length
    }

    pub fn reading_period(&self) -> f64 {
        self.reading_period
    }

    /// Drops every reading, keeping the window parameters.
    pub fn clear(&mut self) {
        self.newest = None;
        self.readings = PerRegime::default();
    }

    pub fn newest(&self) -> Option<f64> {
        self.newest
    }

    /// Appends a reading and evicts everything older than the window.
    pub fn push(&mut self, regime: Regime, timestamp: f64, power: f64) -> Result<()> {
        if !timestamp.is_finite() || !power.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "observation must be finite, got t={timestamp}, p={power}"
            )));
        }
        if let Some(newest) = self.newest {
            if timestamp < newest {
                return Err(Error::InvalidArgument(format!(
                    "observation at t={timestamp} precedes newest reading at t={newest}"
                )));
            }
        }
        self.newest = Some(timestamp);
        self.readings[regime].push_back(Observation { timestamp, power });
        let horizon = timestamp - self.window_length;
        for queue in [
            &mut self.readings.takeoff,
            &mut self.readings.cruise,
            &mut self.readings.landing,
        ] {
            while queue.front().is_some_and(|o| o.timestamp < horizon) {
                queue.pop_front();
            }
        }
        Ok(())
    }

    pub fn readings(&self, regime: Regime) -> impl Iterator<Item = &Observation> {
        self.readings[regime].iter()
    }

    pub fn samples(&self, regime: Regime) -> Vec<f64> {
        self.readings[regime].iter().map(|o| o.power).collect()
    }

    pub fn len(&self, regime: Regime) -> usize {
        self.readings[regime].len()
    }

    pub fn is_empty(&self) -> bool {
        Regime::ALL.iter().all(|&r| self.readings[r].is_empty())
    }

    /// Smallest and largest retained reading, if any.
    pub fn range(&self, regime: Regime) -> Option<(f64, f64)> {
        self.readings[regime].iter().fold(None, |acc, o| match acc {
            None => Some((o.power, o.power)),
            Some((lo, hi)) => Some((lo.min(o.power), hi.max(o.power))),
        })
    }

    /// Posteriors recomputed from the priors and the current window contents.
    pub fn posteriors(&self, priors: &PerRegime<NormalGamma>) -> PerRegime<NormalGamma> {
        PerRegime::from_fn(|r| priors[r].update(&self.samples(r)))
    }
}
