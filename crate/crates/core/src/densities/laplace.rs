use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ParamSpace;
use crate::error::{Error, Result};

/// Laplace component with density `γ/2 · exp(−γ|x − μ|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LaplaceRepr", into = "LaplaceRepr")]
pub struct LaplaceParams {
    location: f64,
    rate: f64,
    log_half_rate: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LaplaceRepr {
    location: f64,
    rate: f64,
}

impl TryFrom<LaplaceRepr> for LaplaceParams {
    type Error = Error;
    fn try_from(r: LaplaceRepr) -> Result<Self> {
        Self::new(r.location, r.rate)
    }
}

impl From<LaplaceParams> for LaplaceRepr {
    fn from(p: LaplaceParams) -> Self {
        Self { location: p.location, rate: p.rate }
    }
}

impl LaplaceParams {
    pub fn new(location: f64, rate: f64) -> Result<Self> {
        if !location.is_finite() || !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Laplace needs finite location and positive rate, got ({location}, {rate})"
            )));
        }
        Ok(Self { location, rate, log_half_rate: (0.5 * rate).ln() })
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    #[inline]
    pub fn log_density(&self, x: f64) -> f64 {
        self.log_half_rate - self.rate * (x - self.location).abs()
    }

    /// Inverse CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        let t = p - 0.5;
        self.location - t.signum() * (1.0 - 2.0 * t.abs()).ln() / self.rate
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Open interval so the logarithm stays finite.
        let mut u: f64 = rng.random();
        while u == 0.0 {
            u = rng.random();
        }
        self.quantile(u)
    }

    pub fn is_feasible(&self, space: &ParamSpace) -> bool {
        self.location.abs() <= space.b && self.rate >= space.c.recip() && self.rate <= space.c
    }

    pub fn project_flagged(&self, space: &ParamSpace) -> (Self, bool) {
        if self.is_feasible(space) {
            return (*self, false);
        }
        let rate = self.rate.clamp(space.c.recip(), space.c);
        let p = Self { location: self.location.clamp(-space.b, space.b), rate, log_half_rate: (0.5 * rate).ln() };
        (p, true)
    }

    pub fn project(&self, space: &ParamSpace) -> Self {
        self.project_flagged(space).0
    }
}

/// Weighted median over `values` visited in ascending order via `order`.
/// Returns the first point at which the cumulative weight reaches half the
/// total (the lower median on exact ties).
pub(crate) fn weighted_median_sorted(values: &[f64], weights: &[f64], order: &[usize], total: f64) -> f64 {
    let half = 0.5 * total;
    let mut cum = 0.0;
    for &i in order {
        cum += weights[i];
        if cum >= half && weights[i] > 0.0 {
            return values[i];
        }
    }
    // Round-off left `cum` a hair below `half`: take the largest weighted point.
    order
        .iter()
        .rev()
        .find(|&&i| weights[i] > 0.0)
        .map(|&i| values[i])
        .unwrap_or(values[order[order.len() - 1]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        let l = LaplaceParams::new(0.0, 1.0).unwrap();
        assert!((l.log_density(0.0) - 0.5f64.ln()).abs() < 1e-15);
        let l = LaplaceParams::new(1.0, 2.0).unwrap();
        assert!((l.log_density(3.0) + 4.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_at_median_is_location() {
        let l = LaplaceParams::new(0.0, 1.0).unwrap();
        assert_eq!(l.quantile(0.5), 0.0);
        let l = LaplaceParams::new(2.0, 3.0).unwrap();
        // CDF below the location is ½ exp(γ (x − μ)).
        let x = l.quantile(0.1);
        assert!((0.5 * (3.0 * (x - 2.0)).exp() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn clamps_to_box() {
        let space = ParamSpace::new(3.0, 10.0).unwrap();
        let (p, moved) = LaplaceParams::new(5.0, 0.001).unwrap().project_flagged(&space);
        assert!(moved);
        assert_eq!(p, LaplaceParams::new(3.0, 0.1).unwrap());
    }

    #[test]
    fn lower_median_on_tie() {
        let v = [0.0, 1.0];
        let w = [1.0, 1.0];
        assert_eq!(weighted_median_sorted(&v, &w, &[0, 1], 2.0), 0.0);
        let v = [3.0, 0.0, 1.0];
        let w = [1.0, 1.0, 1.0];
        assert_eq!(weighted_median_sorted(&v, &w, &[1, 2, 0], 3.0), 1.0);
        // Leading zero weights are never chosen.
        let v = [0.0, 5.0];
        assert_eq!(weighted_median_sorted(&v, &[0.0, 1.0], &[0, 1], 1.0), 5.0);
    }
}
