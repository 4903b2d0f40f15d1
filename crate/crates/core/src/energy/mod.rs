//! Flight power modelling.
//!
//! Average power during each flight regime is treated as normally
//! distributed. The prior comes from a hover-power regression whose
//! coefficients are themselves normal; online, a Normal-Gamma posterior per
//! regime is fitted to the readings held in a sliding window and its
//! Student-t predictive supplies power levels at a chosen safety belief.

mod posterior;
pub mod student_t;
mod window;

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use posterior::{ng_from_normal, NgPriorConfig, NormalGamma};
pub use window::{Observation, ObservationWindow};

/// One of the three flight regimes of a leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Takeoff,
    Cruise,
    Landing,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Takeoff, Regime::Cruise, Regime::Landing];
}

/// A value for each flight regime.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerRegime<T> {
    pub takeoff: T,
    pub cruise: T,
    pub landing: T,
}

impl<T> PerRegime<T> {
    pub fn new(takeoff: T, cruise: T, landing: T) -> Self {
        PerRegime {
            takeoff,
            cruise,
            landing,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Regime) -> T) -> Self {
        PerRegime {
            takeoff: f(Regime::Takeoff),
            cruise: f(Regime::Cruise),
            landing: f(Regime::Landing),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerRegime<U> {
        PerRegime {
            takeoff: f(&self.takeoff),
            cruise: f(&self.cruise),
            landing: f(&self.landing),
        }
    }

    pub fn try_map<U>(&self, mut f: impl FnMut(Regime, &T) -> Result<U>) -> Result<PerRegime<U>> {
        Ok(PerRegime {
            takeoff: f(Regime::Takeoff, &self.takeoff)?,
            cruise: f(Regime::Cruise, &self.cruise)?,
            landing: f(Regime::Landing, &self.landing)?,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Regime, &T)> {
        [
            (Regime::Takeoff, &self.takeoff),
            (Regime::Cruise, &self.cruise),
            (Regime::Landing, &self.landing),
        ]
        .into_iter()
    }
}

impl<T> Index<Regime> for PerRegime<T> {
    type Output = T;

    fn index(&self, regime: Regime) -> &T {
        match regime {
            Regime::Takeoff => &self.takeoff,
            Regime::Cruise => &self.cruise,
            Regime::Landing => &self.landing,
        }
    }
}

impl<T> IndexMut<Regime> for PerRegime<T> {
    fn index_mut(&mut self, regime: Regime) -> &mut T {
        match regime {
            Regime::Takeoff => &mut self.takeoff,
            Regime::Cruise => &mut self.cruise,
            Regime::Landing => &mut self.landing,
        }
    }
}

/// Hover-power regression coefficients with their bootstrap standard errors.
///
/// Average power is `b1 * sqrt(m^3 / rho) + b0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionCoefficients {
    pub b1_mean: f64,
    pub b1_sd: f64,
    pub b0_mean: f64,
    pub b0_sd: f64,
}

impl RegressionCoefficients {
    pub const fn new(b1_mean: f64, b1_sd: f64, b0_mean: f64, b0_sd: f64) -> Self {
        RegressionCoefficients {
            b1_mean,
            b1_sd,
            b0_mean,
            b0_sd,
        }
    }

    /// Coefficients fitted on DJI M100 flight logs.
    pub fn m100() -> PerRegime<Self> {
        PerRegime {
            takeoff: Self::new(80.4, 2.6, 13.8, 18.9),
            cruise: Self::new(68.9, 2.0, 16.8, 15.0),
            landing: Self::new(71.5, 1.7, -24.3, 12.5),
        }
    }
}

/// A normal distribution parameterised by mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalDist {
    pub mean: f64,
    pub variance: f64,
}

impl NormalDist {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "normal distribution needs finite mean and variance >= 0, got N({mean}, {variance})"
            )));
        }
        Ok(NormalDist { mean, variance })
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Prior over a regime's average power.
///
/// With `b1` and `b0` independent normals, `b1 * sqrt(m^3/rho) + b0` is
/// normal with mean `E[b1] sqrt(m^3/rho) + E[b0]` and variance
/// `Var[b1] m^3/rho + Var[b0]`.
pub fn prior_from_coefficients(coef: &RegressionCoefficients, mass: f64, air_density: f64) -> Result<NormalDist> {
    if !(mass > 0.0) || !(air_density > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mass and air density must be positive, got m={mass}, rho={air_density}"
        )));
    }
    if coef.b1_sd < 0.0 || coef.b0_sd < 0.0 {
        return Err(Error::InvalidArgument(
            "regression standard errors must be nonnegative".into(),
        ));
    }
    let induced = mass.powi(3) / air_density;
    NormalDist::new(
        coef.b1_mean * induced.sqrt() + coef.b0_mean,
        coef.b1_sd * coef.b1_sd * induced + coef.b0_sd * coef.b0_sd,
    )
}

/// Priors for all three regimes.
pub fn regime_priors(
    coefs: &PerRegime<RegressionCoefficients>,
    mass: f64,
    air_density: f64,
) -> Result<PerRegime<NormalDist>> {
    coefs.try_map(|_, c| prior_from_coefficients(c, mass, air_density))
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: f64 = 3.93;
    const RHO: f64 = 1.225;

    #[test]
    fn m100_priors() {
        let p = regime_priors(&RegressionCoefficients::m100(), M, RHO).unwrap();
        for (dist, (mean, var)) in [
            (p.takeoff, (579.75, 692.16)),
            (p.cruise, (501.80, 423.20)),
            (p.landing, (479.00, 299.45)),
        ] {
            assert!((dist.mean - mean).abs() < 0.01, "{dist:?}");
            assert!((dist.variance - var).abs() < 0.01, "{dist:?}");
        }
    }

    #[test]
    fn zero_standard_errors_give_point_mass() {
        let c = RegressionCoefficients::new(80.4, 0.0, 13.8, 0.0);
        let p = prior_from_coefficients(&c, M, RHO).unwrap();
        assert_eq!(p.variance, 0.0);
    }

    #[test]
    fn rejects_bad_mass() {
        let c = RegressionCoefficients::m100().cruise;
        assert!(prior_from_coefficients(&c, 0.0, RHO).is_err());
        assert!(prior_from_coefficients(&c, M, -1.0).is_err());
    }

    #[test]
    fn per_regime_indexing() {
        let mut p = PerRegime::new(1, 2, 3);
        p[Regime::Cruise] = 5;
        assert_eq!(p[Regime::Cruise], 5);
        assert_eq!(p.map(|v| v * 2), PerRegime::new(2, 10, 6));
        assert_eq!(p.iter().map(|(_, v)| *v).sum::<i32>(), 9);
    }
}
