use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::gaussian::{mean_feasible, shrink_to_ball};
use super::ParamSpace;
use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Gaussian linear conditional density: `y | u ~ Normal(βᵀu, σ²)`.
///
/// The coefficient vector has one entry per covariate column; when an
/// intercept is used it is the first covariate (a column of ones).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegressionRepr", into = "RegressionRepr")]
pub struct RegressionParams {
    coefficients: Vec<f64>,
    noise_sd: f64,
    log_sd: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegressionRepr {
    coefficients: Vec<f64>,
    noise_sd: f64,
}

impl TryFrom<RegressionRepr> for RegressionParams {
    type Error = Error;
    fn try_from(r: RegressionRepr) -> Result<Self> {
        Self::new(r.coefficients, r.noise_sd)
    }
}

impl From<RegressionParams> for RegressionRepr {
    fn from(p: RegressionParams) -> Self {
        Self { coefficients: p.coefficients, noise_sd: p.noise_sd }
    }
}

impl RegressionParams {
    pub fn new(coefficients: Vec<f64>, noise_sd: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidParameter("regression needs at least one coefficient".into()));
        }
        if coefficients.iter().any(|b| !b.is_finite()) || !(noise_sd.is_finite() && noise_sd > 0.0) {
            return Err(Error::InvalidParameter(
                "regression needs finite coefficients and a positive noise sd".into(),
            ));
        }
        Ok(Self { coefficients, noise_sd, log_sd: noise_sd.ln() })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn covariates(&self) -> usize {
        self.coefficients.len()
    }

    #[inline]
    pub fn predict(&self, u: &[f64]) -> f64 {
        self.coefficients.iter().zip(u).map(|(b, x)| b * x).sum()
    }

    #[inline]
    pub(crate) fn log_density_unchecked(&self, u: &[f64], y: f64) -> f64 {
        let z = (y - self.predict(u)) / self.noise_sd;
        -HALF_LN_2PI - self.log_sd - 0.5 * z * z
    }

    pub fn log_density(&self, u: &[f64], y: f64) -> Result<f64> {
        if u.len() != self.covariates() {
            return Err(Error::DimensionMismatch { expected: self.covariates(), got: u.len() });
        }
        Ok(self.log_density_unchecked(u, y))
    }

    /// Draws `y` for the given covariate vector.
    pub fn sample_response<R: Rng + ?Sized>(&self, u: &[f64], rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.predict(u) + self.noise_sd * z
    }

    pub fn is_feasible(&self, space: &ParamSpace) -> bool {
        mean_feasible(&self.coefficients, space.b)
            && self.noise_sd >= space.c.recip()
            && self.noise_sd <= space.c
    }

    pub fn project_flagged(&self, space: &ParamSpace) -> (Self, bool) {
        if self.is_feasible(space) {
            return (self.clone(), false);
        }
        let mut coefficients = self.coefficients.clone();
        if !mean_feasible(&coefficients, space.b) {
            shrink_to_ball(&mut coefficients, space.b);
        }
        let noise_sd = self.noise_sd.clamp(space.c.recip(), space.c);
        (Self { coefficients, noise_sd, log_sd: noise_sd.ln() }, true)
    }

    pub fn project(&self, space: &ParamSpace) -> Self {
        self.project_flagged(space).0
    }
}
