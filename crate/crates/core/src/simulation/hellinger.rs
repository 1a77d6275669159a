//! Hellinger distance between univariate mixture densities by adaptive
//! Simpson quadrature.

use crate::data::Obs;
use crate::densities::ComponentParams;
use crate::error::{Error, Result};
use crate::mixture::MixtureParams;

/// Half-widths of the integration window, in units of each component's scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub gaussian_sds: f64,
    /// Laplace tails decay as `exp(-γ|x-μ|)`, so they need a wider window
    /// than Gaussian ones for the same neglected mass.
    pub laplace_scales: f64,
    /// Absolute tolerance on `𝔥²`.
    pub tol: f64,
    pub max_depth: u32,
    /// Equal pieces each breakpoint interval is cut into before refinement.
    pub initial_pieces: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { gaussian_sds: 12.0, laplace_scales: 40.0, tol: 1e-13, max_depth: 40, initial_pieces: 8 }
    }
}

fn location_and_reach(c: &ComponentParams, grid: &GridSpec) -> Result<(f64, f64)> {
    match c {
        ComponentParams::Gaussian(g) if g.dim() == 1 => {
            Ok((g.mean()[0], grid.gaussian_sds * g.covariance()[(0, 0)].sqrt()))
        }
        ComponentParams::Laplace(l) => Ok((l.location(), grid.laplace_scales / l.rate())),
        other => Err(Error::InvalidInput(format!(
            "Hellinger quadrature needs univariate densities, got a {} component",
            other.family().name()
        ))),
    }
}

/// `𝔥(f, g) = {½ ∫ (√f − √g)²}^{1/2}` with default grid settings.
pub fn hellinger_1d(f: &MixtureParams, g: &MixtureParams) -> Result<f64> {
    hellinger_1d_with(f, g, &GridSpec::default())
}

pub fn hellinger_1d_with(f: &MixtureParams, g: &MixtureParams, grid: &GridSpec) -> Result<f64> {
    Ok(squared_hellinger_1d(f, g, grid)?.sqrt())
}

/// `𝔥²(f, g)`, clamped to `[0, 1]`.
pub fn squared_hellinger_1d(f: &MixtureParams, g: &MixtureParams, grid: &GridSpec) -> Result<f64> {
    let mut breaks = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in f.components().iter().chain(g.components()) {
        let (loc, reach) = location_and_reach(c, grid)?;
        lo = lo.min(loc - reach);
        hi = hi.max(loc + reach);
        breaks.push(loc);
    }
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let integrand = |x: f64| {
        let obs = Obs::Point(std::slice::from_ref(&x));
        let a = f.log_density(obs).map(|l| (0.5 * l).exp()).unwrap_or(0.0);
        let b = g.log_density(obs).map(|l| (0.5 * l).exp()).unwrap_or(0.0);
        (a - b) * (a - b)
    };

    let pieces = grid.initial_pieces.max(1);
    let total_len = hi - lo;
    let mut sum = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / pieces as f64;
        for i in 0..pieces {
            let x0 = a + h * i as f64;
            let x1 = if i + 1 == pieces { b } else { x0 + h };
            let tol = grid.tol * (x1 - x0) / total_len;
            sum += adaptive_simpson(&integrand, x0, x1, tol, grid.max_depth);
        }
    }
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Adaptive Simpson with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{GaussianParams, LaplaceParams, ParamSpace};

    fn normal(mu: f64) -> MixtureParams {
        MixtureParams::new(vec![1.0], vec![GaussianParams::univariate(mu, 1.0).unwrap().into()], ParamSpace::default())
            .unwrap()
    }

    #[test]
    fn unit_normal_shift_closed_form() {
        for mu in [0.5, 1.0, 2.0, 4.0] {
            let want = (1.0 - (-mu * mu / 8.0f64).exp()).sqrt();
            let got = hellinger_1d(&normal(0.0), &normal(mu)).unwrap();
            assert!((got - want).abs() <= 1e-6, "mu={mu}: {got} vs {want}");
        }
        // √(1 − e^{−1/2}) = 0.627271…
        let h = hellinger_1d(&normal(0.0), &normal(2.0)).unwrap();
        assert!((h - 0.627_271).abs() < 1e-6);
    }

    #[test]
    fn identical_and_symmetric() {
        let f = MixtureParams::new(
            vec![0.3, 0.7],
            vec![
                LaplaceParams::new(0.0, 1.0).unwrap().into(),
                LaplaceParams::new(5.0, 2.0).unwrap().into(),
            ],
            ParamSpace::default(),
        )
        .unwrap();
        assert!(hellinger_1d(&f, &f).unwrap() <= 1e-8);
        let g = normal(1.0);
        let a = hellinger_1d(&f, &g).unwrap();
        let b = hellinger_1d(&g, &f).unwrap();
        assert!((a - b).abs() <= 1e-10);
        assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn laplace_shift_closed_form() {
        // Same rate γ, locations 0 and d: ∫√(fg) = e^{-γd/2}(1 + γd/2).
        let f = MixtureParams::new(vec![1.0], vec![LaplaceParams::new(0.0, 1.5).unwrap().into()], ParamSpace::default())
            .unwrap();
        let g = MixtureParams::new(vec![1.0], vec![LaplaceParams::new(2.0, 1.5).unwrap().into()], ParamSpace::default())
            .unwrap();
        let t = 1.5 * 2.0 / 2.0;
        let want = (1.0 - (-t as f64).exp() * (1.0 + t)).sqrt();
        assert!((hellinger_1d(&f, &g).unwrap() - want).abs() <= 1e-6);
    }

    #[test]
    fn rejects_bivariate() {
        let f = MixtureParams::new(
            vec![1.0],
            vec![GaussianParams::new(vec![0.0, 0.0], nalgebra::DMatrix::identity(2, 2)).unwrap().into()],
            ParamSpace::default(),
        )
        .unwrap();
        assert!(hellinger_1d(&f, &f).is_err());
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 10);
        assert!((v - 0.0).abs() < 1e-12);
    }
}
