//! Component density families: evaluation, sampling, weighted M-steps and
//! projection onto the compact parameter set.

mod gaussian;
mod laplace;
mod regression;

pub use gaussian::{clamp_spectrum, GaussianParams};
pub use laplace::LaplaceParams;
pub use regression::RegressionParams;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Obs};
use crate::error::{Error, Result};

/// A weight counts toward a component's support when it exceeds this
/// fraction of the component's total weight.
const SUPPORT_FRACTION: f64 = 1e-8;

/// Smallest eigenvalue ratio of the weighted Gram matrix accepted by the
/// regression M-step.
const GRAM_CONDITION_FLOOR: f64 = 1e-12;

/// The parametric family being mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Family {
    /// Multivariate normal on `R^dim`.
    Gaussian { dim: usize },
    /// Univariate Laplace.
    Laplace,
    /// Gaussian linear regression of a scalar response on `covariates` columns.
    Regression { covariates: usize },
}

impl Family {
    /// Number of free parameters `m` of one component.
    pub fn param_dim(&self) -> usize {
        match *self {
            Family::Gaussian { dim } => dim + dim * (dim + 1) / 2,
            Family::Laplace => 2,
            Family::Regression { covariates } => covariates + 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian { .. } => "gaussian",
            Family::Laplace => "laplace",
            Family::Regression { .. } => "regression",
        }
    }

    pub fn is_conditional(&self) -> bool {
        matches!(self, Family::Regression { .. })
    }

    /// Row length expected in a [`Dataset`] of this family.
    pub fn row_dim(&self) -> usize {
        match *self {
            Family::Gaussian { dim } => dim,
            Family::Laplace => 1,
            Family::Regression { covariates } => covariates,
        }
    }

    /// Fewest points one component needs to be identifiable.
    pub fn min_support(&self) -> usize {
        match *self {
            Family::Gaussian { dim } => dim + 1,
            _ => 1,
        }
    }

    pub fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.is_conditional() != self.is_conditional() {
            return Err(Error::InvalidInput(format!(
                "{} family {} (covariate, response) data",
                self.name(),
                if self.is_conditional() { "requires" } else { "does not accept" }
            )));
        }
        if data.dim() != self.row_dim() {
            return Err(Error::DimensionMismatch { expected: self.row_dim(), got: data.dim() });
        }
        Ok(())
    }
}

/// Free-parameter count `m` of one component of `family`.
pub fn param_dim(family: &Family) -> usize {
    family.param_dim()
}

/// Bounds of the compact parameter set: locations, means and coefficient
/// vectors lie in the closed `b`-ball; scales, rates and covariance
/// eigenvalues lie in `[c⁻¹, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct ParamSpace {
    pub(crate) b: f64,
    pub(crate) c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceRepr {
    b: f64,
    c: f64,
}

impl TryFrom<SpaceRepr> for ParamSpace {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        ParamSpace::new(r.b, r.c)
    }
}

impl From<ParamSpace> for SpaceRepr {
    fn from(s: ParamSpace) -> Self {
        Self { b: s.b, c: s.c }
    }
}

impl Default for ParamSpace {
    fn default() -> Self {
        Self { b: 1e6, c: 1e6 }
    }
}

impl ParamSpace {
    pub fn new(b: f64, c: f64) -> Result<Self> {
        if !(b.is_finite() && b >= 0.0) || !(c.is_finite() && c >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "parameter space needs finite b >= 0 and c >= 1, got b = {b}, c = {c}"
            )));
        }
        Ok(Self { b, c })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// One component's parameter θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentParams {
    Gaussian(GaussianParams),
    Laplace(LaplaceParams),
    Regression(RegressionParams),
}

impl From<GaussianParams> for ComponentParams {
    fn from(p: GaussianParams) -> Self {
        ComponentParams::Gaussian(p)
    }
}

impl From<LaplaceParams> for ComponentParams {
    fn from(p: LaplaceParams) -> Self {
        ComponentParams::Laplace(p)
    }
}

impl From<RegressionParams> for ComponentParams {
    fn from(p: RegressionParams) -> Self {
        ComponentParams::Regression(p)
    }
}

impl ComponentParams {
    pub fn family(&self) -> Family {
        match self {
            ComponentParams::Gaussian(g) => Family::Gaussian { dim: g.dim() },
            ComponentParams::Laplace(_) => Family::Laplace,
            ComponentParams::Regression(r) => Family::Regression { covariates: r.covariates() },
        }
    }

    /// `log φ(x; θ)`, or `log ρ(y | u; θ)` for the regression family.
    pub fn log_density(&self, obs: Obs<'_>) -> Result<f64> {
        match (self, obs) {
            (ComponentParams::Gaussian(g), Obs::Point(x)) => g.log_density(x),
            (ComponentParams::Laplace(l), Obs::Point(x)) => {
                if x.len() != 1 {
                    return Err(Error::DimensionMismatch { expected: 1, got: x.len() });
                }
                Ok(l.log_density(x[0]))
            }
            (ComponentParams::Regression(r), Obs::Pair { covariates, response }) => {
                r.log_density(covariates, response)
            }
            (p, _) => Err(Error::InvalidInput(format!(
                "observation kind does not match the {} family",
                p.family().name()
            ))),
        }
    }

    /// Shape-unchecked evaluation for hot loops; callers validate the data once.
    #[inline]
    pub(crate) fn log_density_unchecked(&self, obs: Obs<'_>) -> f64 {
        match (self, obs) {
            (ComponentParams::Gaussian(g), Obs::Point(x)) => g.log_density_unchecked(x),
            (ComponentParams::Laplace(l), Obs::Point(x)) => l.log_density(x[0]),
            (ComponentParams::Regression(r), Obs::Pair { covariates, response }) => {
                r.log_density_unchecked(covariates, response)
            }
            _ => f64::NAN,
        }
    }

    pub fn is_feasible(&self, space: &ParamSpace) -> bool {
        match self {
            ComponentParams::Gaussian(g) => g.is_feasible(space),
            ComponentParams::Laplace(l) => l.is_feasible(space),
            ComponentParams::Regression(r) => r.is_feasible(space),
        }
    }

    /// Projection onto the compact set, plus whether the input was moved.
    pub fn project_flagged(&self, space: &ParamSpace) -> (Self, bool) {
        match self {
            ComponentParams::Gaussian(g) => {
                let (p, f) = g.project_flagged(space);
                (p.into(), f)
            }
            ComponentParams::Laplace(l) => {
                let (p, f) = l.project_flagged(space);
                (p.into(), f)
            }
            ComponentParams::Regression(r) => {
                let (p, f) = r.project_flagged(space);
                (p.into(), f)
            }
        }
    }

    /// Identity on feasible parameters.
    pub fn project(&self, space: &ParamSpace) -> Self {
        self.project_flagged(space).0
    }

    /// Draws an observation from an unconditional family.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            ComponentParams::Gaussian(g) => Ok(g.sample(rng)),
            ComponentParams::Laplace(l) => Ok(vec![l.sample(rng)]),
            ComponentParams::Regression(_) => Err(Error::InvalidInput(
                "regression components draw responses given covariates; use sample_response".into(),
            )),
        }
    }

    /// Draws a response given covariates `u` (regression family only).
    pub fn sample_response<R: Rng + ?Sized>(&self, u: &[f64], rng: &mut R) -> Result<f64> {
        match self {
            ComponentParams::Regression(r) => {
                if u.len() != r.covariates() {
                    return Err(Error::DimensionMismatch { expected: r.covariates(), got: u.len() });
                }
                Ok(r.sample_response(u, rng))
            }
            p => Err(Error::InvalidInput(format!(
                "{} components have no covariates",
                p.family().name()
            ))),
        }
    }
}

/// Per-dataset state reused across M-steps (the ascending order of 1-D data
/// for weighted medians).
#[derive(Debug, Clone)]
pub(crate) struct MStepContext {
    order: Vec<usize>,
}

impl MStepContext {
    pub(crate) fn new(family: &Family, data: &Dataset) -> Self {
        let order = if matches!(family, Family::Laplace) {
            let v = data.values();
            let mut order: Vec<usize> = (0..v.len()).collect();
            order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
            order
        } else {
            Vec::new()
        };
        Self { order }
    }
}

/// Weighted maximum-likelihood update for one component followed by
/// projection onto `space`.
///
/// Gaussian: weighted mean and covariance. Laplace: weighted median and the
/// inverse weighted mean absolute deviation. Regression: weighted least
/// squares and the weighted mean squared residual.
pub fn weighted_mstep(
    family: &Family,
    data: &Dataset,
    weights: &[f64],
    space: &ParamSpace,
) -> Result<ComponentParams> {
    family.check_data(data)?;
    if data.is_empty() {
        return Err(Error::InvalidInput("M-step needs at least one observation".into()));
    }
    if weights.len() != data.len() {
        return Err(Error::DimensionMismatch { expected: data.len(), got: weights.len() });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidInput("weights must be finite and non-negative".into()));
    }
    let ctx = MStepContext::new(family, data);
    weighted_mstep_in(&ctx, family, data, weights, space).map(|(p, _)| p)
}

/// M-step with a prepared context; also reports whether projection moved
/// the unconstrained update.
pub(crate) fn weighted_mstep_in(
    ctx: &MStepContext,
    family: &Family,
    data: &Dataset,
    weights: &[f64],
    space: &ParamSpace,
) -> Result<(ComponentParams, bool)> {
    let total: f64 = weights.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Degenerate("component carries no weight".into()));
    }
    match *family {
        Family::Gaussian { dim } => gaussian_mstep(data, weights, total, dim, space),
        Family::Laplace => laplace_mstep(ctx, data, weights, total, space),
        Family::Regression { covariates } => regression_mstep(data, weights, total, covariates, space),
    }
}

fn gaussian_mstep(
    data: &Dataset,
    weights: &[f64],
    total: f64,
    dim: usize,
    space: &ParamSpace,
) -> Result<(ComponentParams, bool)> {
    let cutoff = SUPPORT_FRACTION * total;
    let support = weights.iter().filter(|&&w| w > cutoff).count();
    if support < dim + 1 {
        return Err(Error::Degenerate(format!(
            "weights concentrate on {support} point(s); {} needed",
            dim + 1
        )));
    }
    let mut mean = vec![0.0; dim];
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            for (m, x) in mean.iter_mut().zip(data.row(i)) {
                *m += w * x;
            }
        }
    }
    mean.iter_mut().for_each(|m| *m /= total);

    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    let mut centered = vec![0.0; dim];
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            for ((c, x), m) in centered.iter_mut().zip(data.row(i)).zip(&mean) {
                *c = x - m;
            }
            for a in 0..dim {
                for b in 0..=a {
                    cov[(a, b)] += w * centered[a] * centered[b];
                }
            }
        }
    }
    for a in 0..dim {
        for b in 0..=a {
            let v = cov[(a, b)] / total;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let (g, moved) = GaussianParams::from_raw_projected(mean, cov, space)?;
    Ok((g.into(), moved))
}

fn laplace_mstep(
    ctx: &MStepContext,
    data: &Dataset,
    weights: &[f64],
    total: f64,
    space: &ParamSpace,
) -> Result<(ComponentParams, bool)> {
    let values = data.values();
    let location = laplace::weighted_median_sorted(values, weights, &ctx.order, total);
    let abs_dev: f64 = values
        .iter()
        .zip(weights)
        .map(|(x, w)| w * (x - location).abs())
        .sum::<f64>()
        / total;
    if !(abs_dev > 0.0) {
        return Err(Error::Degenerate(
            "weighted mean absolute deviation is zero".into(),
        ));
    }
    let raw = LaplaceParams::new(location, abs_dev.recip())
        .or_else(|_| LaplaceParams::new(location, f64::MAX))?;
    let (p, moved) = raw.project_flagged(space);
    Ok((p.into(), moved))
}

fn regression_mstep(
    data: &Dataset,
    weights: &[f64],
    total: f64,
    p: usize,
    space: &ParamSpace,
) -> Result<(ComponentParams, bool)> {
    let y = data.responses().expect("regression data carries responses");
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            let u = data.row(i);
            for a in 0..p {
                rhs[a] += w * u[a] * y[i];
                for b in 0..=a {
                    gram[(a, b)] += w * u[a] * u[b];
                }
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    let eig = SymmetricEigen::new(gram.clone());
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
    if !(lo > GRAM_CONDITION_FLOOR * hi) {
        return Err(Error::Degenerate("weighted covariate matrix is rank deficient".into()));
    }
    let beta = gram
        .cholesky()
        .ok_or_else(|| Error::Degenerate("weighted covariate matrix is not positive definite".into()))?
        .solve(&rhs);
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let sse: f64 = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let r = y[i] - coefficients.iter().zip(data.row(i)).map(|(b, u)| b * u).sum::<f64>();
            w * r * r
        })
        .sum();
    let sd = (sse / total).sqrt();
    // An exact fit gives sd = 0; hand the projection a tiny positive value to clamp.
    let raw = RegressionParams::new(coefficients, if sd > 0.0 { sd } else { f64::MIN_POSITIVE })?;
    let (r, moved) = raw.project_flagged(space);
    Ok((r.into(), moved))
}
