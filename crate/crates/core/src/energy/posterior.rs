use serde::{Deserialize, Serialize};

use super::student_t::StudentT;
use super::NormalDist;
use crate::{Error, Result};

/// Normal-Gamma prior/posterior over the mean and precision of a regime's
/// average power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalGamma {
    pub mu: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// How a [`NormalGamma`] prior is derived from a regime's normal prior.
///
/// `mu` and `beta` default to the prior mean and variance; `kappa = 1` and
/// `alpha = 2` give a weakly informative prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgPriorConfig {
    pub mu: Option<f64>,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: Option<f64>,
}

impl Default for NgPriorConfig {
    fn default() -> Self {
        NgPriorConfig {
            mu: None,
            kappa: 1.0,
            alpha: 2.0,
            beta: None,
        }
    }
}

pub fn ng_from_normal(prior: &NormalDist, config: &NgPriorConfig) -> Result<NormalGamma> {
    if config.beta.is_none() && !(prior.variance > 0.0) {
        return Err(Error::Config(format!(
            "cannot derive a Normal-Gamma rate from prior variance {}",
            prior.variance
        )));
    }
    NormalGamma::new(
        config.mu.unwrap_or(prior.mean),
        config.kappa,
        config.alpha,
        config.beta.unwrap_or(prior.variance),
    )
}

impl NormalGamma {
    pub fn new(mu: f64, kappa: f64, alpha: f64, beta: f64) -> Result<Self> {
        let ok = mu.is_finite()
            && kappa > 0.0
            && kappa.is_finite()
            && alpha > 0.0
            && alpha.is_finite()
            && beta > 0.0
            && beta.is_finite();
        if !ok {
            return Err(Error::Config(format!(
                "Normal-Gamma needs finite mu and positive kappa, alpha, beta; got NG({mu}, {kappa}, {alpha}, {beta})"
            )));
        }
        Ok(NormalGamma { mu, kappa, alpha, beta })
    }

    /// Conjugate batch update with the given samples (all of them at once).
    pub fn update(&self, samples: &[f64]) -> NormalGamma {
        if samples.is_empty() {
            return *self;
        }
        let n = samples.len() as f64;
        // centring on the prior mean keeps mu exact when every sample equals it
        let diff = samples.iter().map(|x| x - self.mu).sum::<f64>() / n;
        let mean = self.mu + diff;
        let scatter: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
        let kappa_n = self.kappa + n;
        NormalGamma {
            mu: self.mu + n * diff / kappa_n,
            kappa: kappa_n,
            alpha: self.alpha + 0.5 * n,
            beta: self.beta + 0.5 * scatter + self.kappa * n * diff * diff / (2.0 * kappa_n),
        }
    }

    /// Degrees of freedom of the Student-t predictive, `2 alpha`.
    pub fn predictive_dof(&self) -> f64 {
        2.0 * self.alpha
    }

    /// Precision of the predictive, `alpha kappa / (beta (kappa + 1))`.
    pub fn predictive_precision(&self) -> f64 {
        self.alpha * self.kappa / (self.beta * (self.kappa + 1.0))
    }

    /// Scale of the predictive, `sqrt(beta (kappa + 1) / (alpha kappa))`.
    pub fn predictive_scale(&self) -> f64 {
        (self.beta * (self.kappa + 1.0) / (self.alpha * self.kappa)).sqrt()
    }

    /// Predictive variance; infinite while `2 alpha <= 2`.
    pub fn predictive_variance(&self) -> f64 {
        let dof = self.predictive_dof();
        if dof > 2.0 {
            self.predictive_scale().powi(2) * dof / (dof - 2.0)
        } else {
            f64::INFINITY
        }
    }

    /// Power level `x` with `P(X <= x) = theta` under the predictive.
    pub fn predictive_quantile(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "safety belief must lie in (0, 1), got {theta}"
            )));
        }
        let t = StudentT::new(self.predictive_dof()).quantile(theta);
        Ok(self.mu + t * self.predictive_scale())
    }

    pub fn predictive_cdf(&self, x: f64) -> f64 {
        StudentT::new(self.predictive_dof()).cdf((x - self.mu) / self.predictive_scale())
    }
}
