//! The k-component mixture `f_k(x; ψ) = Σ π_z φ(x; θ_z)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Obs};
use crate::densities::{ComponentParams, Family, ParamSpace};
use crate::error::{Error, Result};

/// Weights and component parameters of a finite mixture, tied to the compact
/// set they live in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureRepr", into = "MixtureRepr")]
pub struct MixtureParams {
    family: Family,
    weights: Vec<f64>,
    components: Vec<ComponentParams>,
    space: ParamSpace,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureRepr {
    family: Family,
    weights: Vec<f64>,
    components: Vec<ComponentParams>,
    space: ParamSpace,
}

impl TryFrom<MixtureRepr> for MixtureParams {
    type Error = Error;
    fn try_from(r: MixtureRepr) -> Result<Self> {
        let m = MixtureParams::new(r.weights, r.components, r.space)?;
        if m.family != r.family {
            return Err(Error::InvalidParameter(format!(
                "declared family {:?} does not match components ({:?})",
                r.family, m.family
            )));
        }
        Ok(m)
    }
}

impl From<MixtureParams> for MixtureRepr {
    fn from(m: MixtureParams) -> Self {
        Self { family: m.family, weights: m.weights, components: m.components, space: m.space }
    }
}

impl MixtureParams {
    /// Validates and renormalizes the weights; every component must share one
    /// family and already be feasible in `space`.
    pub fn new(weights: Vec<f64>, components: Vec<ComponentParams>, space: ParamSpace) -> Result<Self> {
        let mixture = Self::new_unchecked_feasibility(weights, components, space)?;
        if let Some(z) = mixture.components.iter().position(|c| !c.is_feasible(&space)) {
            return Err(Error::InvalidParameter(format!(
                "component {z} lies outside the parameter space (b = {}, c = {})",
                space.b(),
                space.c()
            )));
        }
        Ok(mixture)
    }

    /// As [`MixtureParams::new`], projecting infeasible components instead of rejecting them.
    pub fn new_projected(weights: Vec<f64>, components: Vec<ComponentParams>, space: ParamSpace) -> Result<Self> {
        let components = components.iter().map(|c| c.project(&space)).collect();
        Self::new_unchecked_feasibility(weights, components, space)
    }

    fn new_unchecked_feasibility(
        mut weights: Vec<f64>,
        components: Vec<ComponentParams>,
        space: ParamSpace,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("a mixture needs at least one component".into()));
        }
        if weights.len() != components.len() {
            return Err(Error::DimensionMismatch { expected: components.len(), got: weights.len() });
        }
        let family = components[0].family();
        if components.iter().any(|c| c.family() != family) {
            return Err(Error::InvalidParameter("mixture components must share one family".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("mixture weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("mixture weights sum to zero".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { family, weights, components, space })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[ComponentParams] {
        &self.components
    }

    pub fn space(&self) -> &ParamSpace {
        &self.space
    }

    /// Components reordered so that new position `i` holds old component `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.k()];
        if perm.len() != self.k() || perm.iter().any(|&p| p >= self.k() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidInput("not a permutation of the components".into()));
        }
        Ok(Self {
            family: self.family,
            weights: perm.iter().map(|&p| self.weights[p]).collect(),
            components: perm.iter().map(|&p| self.components[p].clone()).collect(),
            space: self.space,
        })
    }

    fn check_obs(&self, obs: Obs<'_>) -> Result<()> {
        match (self.family, obs) {
            (Family::Regression { covariates }, Obs::Pair { covariates: u, .. }) if u.len() == covariates => Ok(()),
            (Family::Regression { covariates }, Obs::Pair { covariates: u, .. }) => {
                Err(Error::DimensionMismatch { expected: covariates, got: u.len() })
            }
            (f, Obs::Point(x)) if !f.is_conditional() => {
                if x.len() == f.row_dim() {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch { expected: f.row_dim(), got: x.len() })
                }
            }
            (f, _) => Err(Error::InvalidInput(format!(
                "observation kind does not match the {} family",
                f.name()
            ))),
        }
    }

    /// Writes `log π_z + log φ(x; θ_z)` into `terms` (−∞ for zero weights)
    /// and returns their log-sum-exp.
    #[inline]
    pub(crate) fn log_terms_into(&self, obs: Obs<'_>, terms: &mut [f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for ((t, w), c) in terms.iter_mut().zip(&self.weights).zip(&self.components) {
            *t = if *w > 0.0 { w.ln() + c.log_density_unchecked(obs) } else { f64::NEG_INFINITY };
            if *t > max {
                max = *t;
            }
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + sorted_exp_sum(terms, max).ln()
    }

    /// `log f_k(x; ψ)` via log-sum-exp; zero-weight components are skipped.
    pub fn log_density(&self, obs: Obs<'_>) -> Result<f64> {
        self.check_obs(obs)?;
        let mut terms = vec![0.0; self.k()];
        Ok(self.log_terms_into(obs, &mut terms))
    }

    /// Posterior component probabilities `r_z ∝ π_z φ(x; θ_z)`.
    pub fn responsibilities(&self, obs: Obs<'_>) -> Result<Vec<f64>> {
        self.check_obs(obs)?;
        let mut terms = vec![0.0; self.k()];
        self.log_terms_into(obs, &mut terms);
        // Normalising exp(t − max) directly keeps the sum at 1 to rounding
        // even when the log terms are huge in magnitude.
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        terms.iter_mut().for_each(|t| *t = (*t - max).exp());
        let s: f64 = terms.iter().sum();
        terms.iter_mut().for_each(|t| *t /= s);
        Ok(terms)
    }

    /// Mean negative log-likelihood `−n⁻¹ Σ log f_k(X_i; ψ)`.
    pub fn empirical_risk(&self, data: &Dataset) -> Result<f64> {
        self.family.check_data(data)?;
        if data.is_empty() {
            return Err(Error::InvalidInput("empirical risk of an empty dataset".into()));
        }
        Ok(self.empirical_risk_unchecked(data))
    }

    pub(crate) fn empirical_risk_unchecked(&self, data: &Dataset) -> f64 {
        let mut terms = vec![0.0; self.k()];
        let total: f64 = (0..data.len()).map(|i| self.log_terms_into(data.obs(i), &mut terms)).sum();
        -total / data.len() as f64
    }

    fn draw_label<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (z, w) in self.weights.iter().enumerate() {
            cum += w;
            if u < cum {
                return z;
            }
        }
        // u landed in the round-off gap above the last cumulative weight.
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    /// Draws `n` observations and their (0-based) component labels.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<(Dataset, Vec<usize>)> {
        if self.family.is_conditional() {
            return Err(Error::InvalidInput(
                "regression mixtures need covariates; use sample_conditional".into(),
            ));
        }
        let mut values = Vec::with_capacity(n * self.family.row_dim());
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let z = self.draw_label(rng);
            values.extend(self.components[z].sample_point(rng)?);
            labels.push(z);
        }
        Ok((Dataset::points(self.family.row_dim(), values)?, labels))
    }

    /// Draws `n` (covariate, response) pairs; `covariates` produces each `u`.
    pub fn sample_conditional<R, F>(&self, n: usize, mut covariates: F, rng: &mut R) -> Result<(Dataset, Vec<usize>)>
    where
        R: Rng + ?Sized,
        F: FnMut(&mut R) -> Vec<f64>,
    {
        let Family::Regression { covariates: p } = self.family else {
            return Err(Error::InvalidInput("sample_conditional needs a regression mixture".into()));
        };
        let mut us = Vec::with_capacity(n * p);
        let mut ys = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let u = covariates(rng);
            let z = self.draw_label(rng);
            ys.push(self.components[z].sample_response(&u, rng)?);
            us.extend(u);
            labels.push(z);
        }
        Ok((Dataset::regression(p, us, ys)?, labels))
    }
}

/// `log f_k(x; ψ)`.
/// `Σ exp(t − max)` accumulated in descending order of `t`, so that the
/// result does not depend on how the components are labelled.
#[inline]
fn sorted_exp_sum(terms: &[f64], max: f64) -> f64 {
    const STACK: usize = 16;
    if terms.len() <= STACK {
        let mut buf = [0.0f64; STACK];
        let b = &mut buf[..terms.len()];
        b.copy_from_slice(terms);
        b.sort_unstable_by(|x, y| y.total_cmp(x));
        b.iter().map(|t| (t - max).exp()).sum()
    } else {
        let mut b = terms.to_vec();
        b.sort_unstable_by(|x, y| y.total_cmp(x));
        b.iter().map(|t| (t - max).exp()).sum()
    }
}

pub fn log_mixture_density(mixture: &MixtureParams, obs: Obs<'_>) -> Result<f64> {
    mixture.log_density(obs)
}

/// Vector-space dimension `(m + 1)·k` of the mixture parameter set.
pub fn space_dim(family: &Family, k: usize) -> usize {
    (family.param_dim() + 1) * k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{GaussianParams, LaplaceParams};
    use crate::rng::rng_from_seed;

    fn laplace_pair() -> MixtureParams {
        MixtureParams::new(
            vec![0.3, 0.7],
            vec![
                LaplaceParams::new(0.0, 1.0).unwrap().into(),
                LaplaceParams::new(2.0, 1.0).unwrap().into(),
            ],
            ParamSpace::default(),
        )
        .unwrap()
    }

    fn gauss(mu: f64) -> ComponentParams {
        GaussianParams::univariate(mu, 1.0).unwrap().into()
    }

    #[test]
    fn single_component_matches_density() {
        let c = gauss(0.4);
        let m = MixtureParams::new(vec![1.0], vec![c.clone()], ParamSpace::default()).unwrap();
        let x = [1.7];
        assert_eq!(m.log_density(Obs::Point(&x)).unwrap(), c.log_density(Obs::Point(&x)).unwrap());
    }

    #[test]
    fn symmetric_gaussian_midpoint() {
        let a = 1.5;
        let m = MixtureParams::new(vec![0.5, 0.5], vec![gauss(-a), gauss(a)], ParamSpace::default()).unwrap();
        let expected = gauss(a).log_density(Obs::Point(&[0.0])).unwrap();
        assert!((m.log_density(Obs::Point(&[0.0])).unwrap() - expected).abs() < 1e-15);
        let r = m.responsibilities(Obs::Point(&[0.0])).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-15 && (r[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn laplace_equal_density_point() {
        let m = laplace_pair();
        // Both components evaluate to ½e⁻¹ at x = 1.
        let expected = (0.5f64).ln() - 1.0;
        assert!((m.log_density(Obs::Point(&[1.0])).unwrap() - expected).abs() < 1e-15);
        let r = m.responsibilities(Obs::Point(&[1.0])).unwrap();
        assert!((r[0] - 0.3).abs() < 1e-15 && (r[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn zero_weight_component() {
        let m = MixtureParams::new(vec![1.0, 0.0], vec![gauss(0.0), gauss(3.0)], ParamSpace::default()).unwrap();
        assert_eq!(m.responsibilities(Obs::Point(&[3.0])).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn risk_edge_cases() {
        let m = laplace_pair();
        let one = Dataset::univariate(vec![0.25]).unwrap();
        assert_eq!(m.empirical_risk(&one).unwrap(), -m.log_density(Obs::Point(&[0.25])).unwrap());
        assert!(m.empirical_risk(&Dataset::univariate(vec![]).unwrap()).is_err());
        let d = Dataset::univariate(vec![0.1, 1.4, -2.0]).unwrap();
        let dd = d.concat(&d).unwrap();
        assert!((m.empirical_risk(&d).unwrap() - m.empirical_risk(&dd).unwrap()).abs() < 1e-15);
        assert!(m.empirical_risk(&Dataset::points(2, vec![0.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn space_dims() {
        assert_eq!(space_dim(&Family::Laplace, 1), 3);
        assert_eq!(space_dim(&Family::Gaussian { dim: 1 }, 2), 6);
        assert_eq!(space_dim(&Family::Gaussian { dim: 2 }, 3), 18);
    }

    #[test]
    fn construction_checks() {
        let s = ParamSpace::new(1.0, 2.0).unwrap();
        assert!(MixtureParams::new(vec![1.0], vec![gauss(5.0)], s).is_err());
        let p = MixtureParams::new_projected(vec![2.0], vec![gauss(5.0)], s).unwrap();
        assert_eq!(p.weights(), &[1.0]);
        assert!(MixtureParams::new(vec![], vec![], s).is_err());
        assert!(MixtureParams::new(vec![0.0, 0.0], vec![gauss(0.0), gauss(0.0)], s).is_err());
        let mixed = vec![gauss(0.0), LaplaceParams::new(0.0, 1.0).unwrap().into()];
        assert!(MixtureParams::new(vec![0.5, 0.5], mixed, s).is_err());
    }

    #[test]
    fn sampling_labels_and_determinism() {
        let m = MixtureParams::new(vec![1.0, 0.0], vec![gauss(0.0), gauss(3.0)], ParamSpace::default()).unwrap();
        let (_, labels) = m.sample(500, &mut rng_from_seed(1)).unwrap();
        assert!(labels.iter().all(|&z| z == 0));

        let m = laplace_pair();
        let a = m.sample(50, &mut rng_from_seed(9)).unwrap();
        let b = m.sample(50, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn balanced_label_fraction() {
        let m = MixtureParams::new(vec![0.5, 0.5], vec![gauss(0.0), gauss(3.0)], ParamSpace::default()).unwrap();
        let n = 100_000;
        let (_, labels) = m.sample(n, &mut rng_from_seed(2024)).unwrap();
        let frac = labels.iter().filter(|&&z| z == 0).count() as f64 / n as f64;
        assert!((frac - 0.5).abs() <= 4.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn json_schema_fields() {
        let m = laplace_pair();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["family"]["kind"], "laplace");
        assert_eq!(v["components"][1]["location"], 2.0);
        assert_eq!(v["space"]["c"], 1e6);
        let back: MixtureParams = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
