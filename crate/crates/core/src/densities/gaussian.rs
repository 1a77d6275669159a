use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ParamSpace;
use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Relative slack used when deciding whether a covariance spectrum or a
/// mean norm already lies inside the compact set. Keeps `project` idempotent
/// despite eigen-decomposition round-off.
pub(crate) const FEASIBILITY_SLACK: f64 = 1e-12;

/// Multivariate normal component: mean and covariance together with the lower
/// Cholesky factor and log-determinant of the covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianRepr", into = "GaussianRepr")]
pub struct GaussianParams {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    chol: DMatrix<f64>,
    log_det: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianRepr {
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

impl TryFrom<GaussianRepr> for GaussianParams {
    type Error = Error;

    fn try_from(r: GaussianRepr) -> Result<Self> {
        let d = r.mean.len();
        if r.covariance.len() != d || r.covariance.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidParameter(format!("covariance must be {d} x {d}")));
        }
        let cov = DMatrix::from_fn(d, d, |i, j| r.covariance[i][j]);
        GaussianParams::new(r.mean, cov)
    }
}

impl From<GaussianParams> for GaussianRepr {
    fn from(g: GaussianParams) -> Self {
        let d = g.dim();
        Self {
            mean: g.mean.iter().copied().collect(),
            covariance: (0..d).map(|i| (0..d).map(|j| g.covariance[(i, j)]).collect()).collect(),
        }
    }
}

impl GaussianParams {
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidParameter("Gaussian mean must be non-empty".into()));
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: covariance.nrows() });
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("Gaussian parameters must be finite".into()));
        }
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (covariance[(i, j)], covariance[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidParameter("covariance is not symmetric".into()));
                }
            }
        }
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("covariance is not positive definite".into()))?
            .l();
        let log_det = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(Self { mean: DVector::from_vec(mean), covariance, chol, log_det })
    }

    pub fn univariate(mean: f64, variance: f64) -> Result<Self> {
        Self::new(vec![mean], DMatrix::from_element(1, 1, variance))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn cholesky_lower(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub(crate) fn log_density_unchecked(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        if d == 1 {
            let z = (x[0] - self.mean[0]) / self.chol[(0, 0)];
            return -0.5 * (LN_2PI + self.log_det + z * z);
        }
        // Forward substitution L z = x - mean; the quadratic form is |z|^2.
        let mut stack = [0.0f64; 8];
        let mut heap;
        let z: &mut [f64] = if d <= 8 {
            &mut stack[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut quad = 0.0;
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for j in 0..i {
                s -= self.chol[(i, j)] * z[j];
            }
            z[i] = s / self.chol[(i, i)];
            quad += z[i] * z[i];
        }
        -0.5 * (d as f64 * LN_2PI + self.log_det + quad)
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.log_density_unchecked(x))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        (&self.mean + &self.chol * z).iter().copied().collect()
    }

    pub fn is_feasible(&self, space: &ParamSpace) -> bool {
        mean_feasible(self.mean.as_slice(), space.b) && spectrum_feasible(&self.covariance, space.c)
    }

    /// Projects onto `{‖μ‖ ≤ b, c⁻¹ ≤ λ(Σ) ≤ c}`; the flag reports whether anything moved.
    pub fn project_flagged(&self, space: &ParamSpace) -> (Self, bool) {
        if self.is_feasible(space) {
            return (self.clone(), false);
        }
        let (g, _) = Self::from_raw_projected(self.mean.as_slice().to_vec(), self.covariance.clone(), space)
            .expect("projected covariance is positive definite");
        (g, true)
    }

    pub fn project(&self, space: &ParamSpace) -> Self {
        self.project_flagged(space).0
    }

    /// Builds a feasible component from an arbitrary symmetric `covariance`
    /// (possibly singular), clamping its spectrum into `[c⁻¹, c]` and
    /// shrinking the mean onto the `b`-ball.
    pub(crate) fn from_raw_projected(
        mut mean: Vec<f64>,
        covariance: DMatrix<f64>,
        space: &ParamSpace,
    ) -> Result<(Self, bool)> {
        let mut moved = false;
        if !mean_feasible(&mean, space.b) {
            shrink_to_ball(&mut mean, space.b);
            moved = true;
        }
        let cov = if spectrum_feasible(&covariance, space.c) {
            covariance
        } else {
            moved = true;
            clamp_spectrum(covariance, space.c)
        };
        Ok((Self::new(mean, cov)?, moved))
    }
}

pub(crate) fn mean_feasible(v: &[f64], b: f64) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    norm <= b * (1.0 + FEASIBILITY_SLACK)
}

pub(crate) fn shrink_to_ball(v: &mut [f64], b: f64) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        let scale = b / norm;
        v.iter_mut().for_each(|x| *x *= scale);
    }
}

fn spectrum_feasible(cov: &DMatrix<f64>, c: f64) -> bool {
    let (lo, hi) = (c.recip() * (1.0 - FEASIBILITY_SLACK), c * (1.0 + FEASIBILITY_SLACK));
    if cov.nrows() == 1 {
        let v = cov[(0, 0)];
        return v >= lo && v <= hi;
    }
    let eig = SymmetricEigen::new(cov.clone());
    eig.eigenvalues.iter().all(|&l| l >= lo && l <= hi)
}

/// Symmetric eigendecomposition, clamp eigenvalues into `[c⁻¹, c]`, reconstruct.
pub fn clamp_spectrum(cov: DMatrix<f64>, c: f64) -> DMatrix<f64> {
    let (lo, hi) = (c.recip(), c);
    if cov.nrows() == 1 {
        return DMatrix::from_element(1, 1, cov[(0, 0)].clamp(lo, hi));
    }
    let sym = (&cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let clamped = eig.eigenvalues.map(|l| l.clamp(lo, hi));
    let v = &eig.eigenvectors;
    let m = v * DMatrix::from_diagonal(&clamped) * v.transpose();
    (&m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal_mode() {
        let g = GaussianParams::univariate(0.0, 1.0).unwrap();
        assert!((g.log_density(&[0.0]).unwrap() + 0.918_938_533_204_672_7).abs() < 1e-12);
    }

    #[test]
    fn multivariate_matches_direct_formula() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let g = GaussianParams::new(vec![1.0, -1.0], cov.clone()).unwrap();
        let x = [0.3, 0.7];
        let inv = cov.clone().try_inverse().unwrap();
        let d = DVector::from_vec(vec![x[0] - 1.0, x[1] + 1.0]);
        let quad = (d.transpose() * inv * &d)[(0, 0)];
        let direct = -0.5 * ((2.0 * std::f64::consts::PI).powi(2) * cov.determinant()).ln() - 0.5 * quad;
        assert!((g.log_density(&x).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn log_det_matches_cholesky_diagonal() {
        let cov = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let g = GaussianParams::new(vec![0.0; 3], cov.clone()).unwrap();
        let det = cov.determinant();
        assert!((g.log_det() - det.ln()).abs() <= 1e-10 * det.ln().abs());
    }

    #[test]
    fn rejects_bad_covariances() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.1, 1.0]);
        assert!(GaussianParams::new(vec![0.0, 0.0], asym).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GaussianParams::new(vec![0.0, 0.0], indefinite).is_err());
        let g = GaussianParams::univariate(0.0, 1.0).unwrap();
        assert!(matches!(g.log_density(&[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn eigen_clamp_on_diagonal() {
        let space = ParamSpace::new(10.0, 10.0).unwrap();
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![100.0, 1e-4]));
        let (g, _) = GaussianParams::from_raw_projected(vec![0.0, 0.0], cov, &space).unwrap();
        let mut eig: Vec<f64> = SymmetricEigen::new(g.covariance().clone()).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert!((eig[0] - 0.1).abs() < 1e-12 && (eig[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn mean_shrunk_to_ball() {
        let space = ParamSpace::new(5.0, 10.0).unwrap();
        let g = GaussianParams::new(vec![6.0, 8.0], DMatrix::identity(2, 2)).unwrap();
        let (p, moved) = g.project_flagged(&space);
        assert!(moved);
        assert!((p.mean()[0] - 3.0).abs() < 1e-12 && (p.mean()[1] - 4.0).abs() < 1e-12);
    }
}
