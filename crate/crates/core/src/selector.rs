//! The order estimator: fit every `k = 1..=k_max`, add the penalty, return
//! the smallest minimizer.
//!
//! Fits at consecutive orders are chained: the `(k+1)`-fit gets one extra
//! restart started from the `k`-solution with its heaviest component split
//! in two, so the fitted risk path is non-increasing in `k` up to EM
//! tolerance.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::criteria::{penalty, CriterionSpec};
use crate::data::Dataset;
use crate::densities::{Family, ParamSpace};
use crate::error::{Error, Result};
use crate::fitter::{duplicate_heaviest, fit_with_warm_starts, FitConfig, FitResult};
use crate::mixture::MixtureParams;

pub const SCHEMA_VERSION: u32 = 1;

/// Criterion values within this absolute distance of the minimum count as ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full likelihood of the observations.
    Joint,
    /// Conditional likelihood of responses given covariates.
    Conditional,
}

/// Fit summary and criterion value at one order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub k: usize,
    pub risk: f64,
    pub penalty: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart_risks: Vec<Option<f64>>,
    pub best_restart: usize,
    pub projection_flags: usize,
    pub monotonicity_violations: usize,
    pub reseeds: usize,
    pub params: MixtureParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedOrder {
    pub k: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub schema_version: u32,
    pub family: Family,
    pub mode: Mode,
    pub n: usize,
    pub k_max: usize,
    pub criterion: CriterionSpec,
    pub criterion_label: String,
    /// Free parameters per component.
    pub param_dim: usize,
    pub fits: Vec<OrderFit>,
    pub excluded: Vec<ExcludedOrder>,
    pub selected: usize,
    pub seed: u64,
    pub fit_config: FitConfig,
    pub space: ParamSpace,
    pub config_hash: String,
    pub data_digest: String,
    pub wall_time_ms: f64,
}

impl SelectionReport {
    pub fn selected_fit(&self) -> &OrderFit {
        self.fits.iter().find(|f| f.k == self.selected).expect("selected order was fitted")
    }
}

/// Fits at every order, in order.
#[derive(Debug, Clone)]
pub struct FitPath {
    pub fits: Vec<(usize, FitResult)>,
    pub excluded: Vec<ExcludedOrder>,
}

/// Fits `k = 1..=k_max`, warm-starting each order from the previous one.
/// Orders whose fit fails numerically are excluded rather than aborting.
pub fn fit_path(
    data: &Dataset,
    family: &Family,
    k_max: usize,
    cfg: &FitConfig,
    space: &ParamSpace,
) -> Result<FitPath> {
    family.check_data(data)?;
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be ≥ 1".into()));
    }
    let needed = k_max * family.min_support();
    if data.len() < needed {
        return Err(Error::InvalidInput(format!(
            "{} observations cannot support fits up to k = {k_max} (need ≥ {needed})",
            data.len()
        )));
    }
    cfg.validate(k_max)?;
    let mut fits: Vec<(usize, FitResult)> = Vec::with_capacity(k_max);
    let mut excluded = Vec::new();
    for k in 1..=k_max {
        let warm: Vec<MixtureParams> = match fits.last() {
            Some((prev_k, prev)) if *prev_k + 1 == k => vec![duplicate_heaviest(&prev.params)],
            _ => Vec::new(),
        };
        match fit_with_warm_starts(data, family, k, space, cfg, &warm) {
            Ok(r) => fits.push((k, r)),
            Err(e) if e.is_numerical() => excluded.push(ExcludedOrder { k, reason: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    if fits.is_empty() {
        return Err(Error::NoOrderFitted { k_max });
    }
    Ok(FitPath { fits, excluded })
}

/// Smallest `k` whose value is within [`TIE_TOL`] of the minimum.
pub fn choose_order(values: &[(usize, f64)]) -> Option<usize> {
    let min = values.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    values.iter().filter(|&&(_, v)| v <= min + TIE_TOL).map(|&(k, _)| k).min()
}

/// Order selected from fitted risks alone.
pub fn select_from_risks(risks: &[(usize, f64)], spec: &CriterionSpec, m: usize, n: u64) -> Option<usize> {
    let values: Vec<(usize, f64)> = risks.iter().map(|&(k, r)| (k, r + penalty(spec, k, m, n))).collect();
    choose_order(&values)
}

fn config_hash(family: &Family, mode: Mode, k_max: usize, spec: &CriterionSpec, cfg: &FitConfig, space: &ParamSpace) -> String {
    let echo = serde_json::json!({
        "family": family,
        "mode": mode,
        "k_max": k_max,
        "criterion": spec,
        "fit_config": cfg,
        "space": space,
    });
    hex::encode(Sha256::digest(echo.to_string().as_bytes()))
}

fn assemble(
    data: &Dataset,
    family: &Family,
    mode: Mode,
    k_max: usize,
    spec: &CriterionSpec,
    cfg: &FitConfig,
    space: &ParamSpace,
    path: &FitPath,
    digest: &str,
    wall_time_ms: f64,
) -> Result<SelectionReport> {
    let m = family.param_dim();
    spec.validate(k_max, m)?;
    let n = data.len() as u64;
    let fits: Vec<OrderFit> = path
        .fits
        .iter()
        .map(|(k, r)| {
            let pen = penalty(spec, *k, m, n);
            OrderFit {
                k: *k,
                risk: r.risk,
                penalty: pen,
                value: r.risk + pen,
                iterations: r.iterations,
                converged: r.converged,
                restart_risks: r.restart_risks.clone(),
                best_restart: r.best_restart,
                projection_flags: r.projection_flags,
                monotonicity_violations: r.monotonicity_violations,
                reseeds: r.reseeds,
                params: r.params.clone(),
            }
        })
        .collect();
    let values: Vec<(usize, f64)> = fits.iter().map(|f| (f.k, f.value)).collect();
    let selected = choose_order(&values).ok_or(Error::NoOrderFitted { k_max })?;
    Ok(SelectionReport {
        schema_version: SCHEMA_VERSION,
        family: *family,
        mode,
        n: data.len(),
        k_max,
        criterion: spec.clone(),
        criterion_label: spec.label(),
        param_dim: m,
        fits,
        excluded: path.excluded.clone(),
        selected,
        seed: cfg.base_seed,
        fit_config: cfg.clone(),
        space: *space,
        config_hash: config_hash(family, mode, k_max, spec, cfg, space),
        data_digest: digest.to_string(),
        wall_time_ms,
    })
}

/// One report per criterion, all sharing a single path of fits.
pub fn select_many(
    data: &Dataset,
    family: &Family,
    k_max: usize,
    specs: &[CriterionSpec],
    cfg: &FitConfig,
    space: &ParamSpace,
) -> Result<Vec<SelectionReport>> {
    let m = family.param_dim();
    for spec in specs {
        spec.validate(k_max, m)?;
    }
    let start = Instant::now();
    let path = fit_path(data, family, k_max, cfg, space)?;
    let wall = start.elapsed().as_secs_f64() * 1e3;
    let mode = if family.is_conditional() { Mode::Conditional } else { Mode::Joint };
    let digest = data.digest();
    specs
        .iter()
        .map(|spec| assemble(data, family, mode, k_max, spec, cfg, space, &path, &digest, wall))
        .collect()
}

/// `k̂`: smallest minimizer of `min risk_k + pen_{k,n}` over `k = 1..=k_max`.
pub fn select(
    data: &Dataset,
    family: &Family,
    k_max: usize,
    spec: &CriterionSpec,
    cfg: &FitConfig,
    space: &ParamSpace,
) -> Result<SelectionReport> {
    let mut reports = select_many(data, family, k_max, std::slice::from_ref(spec), cfg, space)?;
    Ok(reports.remove(0))
}

/// `k̃`: selection for a mixture of regressions using only the conditional
/// likelihood of responses given covariates. The covariate density is never
/// modelled; it would add the same constant to every order's risk.
pub fn select_conditional(
    data: &Dataset,
    k_max: usize,
    spec: &CriterionSpec,
    cfg: &FitConfig,
    space: &ParamSpace,
) -> Result<SelectionReport> {
    if !data.is_conditional() {
        return Err(Error::InvalidInput(
            "conditional selection needs (covariate, response) data".into(),
        ));
    }
    select(data, &Family::Regression { covariates: data.dim() }, k_max, spec, cfg, space)
}

/// One row of the `k ↦ criterion` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub k: usize,
    pub risk: f64,
    pub penalty: f64,
    pub value: f64,
}

pub fn criterion_path(report: &SelectionReport) -> Vec<PathRow> {
    report
        .fits
        .iter()
        .map(|f| PathRow { k: f.k, risk: f.risk, penalty: f.penalty, value: f.value })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{GaussianParams, LaplaceParams};
    use crate::rng::rng_from_seed;

    #[test]
    fn ties_resolve_to_smaller_order() {
        let v = [(1, 1.0), (2, 0.5), (3, 0.5 + 1e-15), (4, 0.7)];
        assert_eq!(choose_order(&v), Some(2));
        let v = [(1, 1.0), (2, 0.5 + 1e-15), (3, 0.5)];
        assert_eq!(choose_order(&v), Some(2));
        let v = [(1, 1.0), (2, 0.5 + 1e-9), (3, 0.5)];
        assert_eq!(choose_order(&v), Some(3));
        assert_eq!(choose_order(&[]), None);
    }

    #[test]
    fn risk_shift_does_not_change_choice() {
        let spec = CriterionSpec::bic();
        let risks = [(1, 2.31), (2, 2.05), (3, 2.049), (4, 2.048)];
        let base = select_from_risks(&risks, &spec, 2, 500).unwrap();
        for shift in [-3.0, 0.25, 17.0] {
            let shifted: Vec<(usize, f64)> = risks.iter().map(|&(k, r)| (k, r + shift)).collect();
            assert_eq!(select_from_risks(&shifted, &spec, 2, 500), Some(base));
        }
    }

    #[test]
    fn single_candidate() {
        let d = Dataset::univariate(vec![0.3, 1.1, -0.2, 5.0]).unwrap();
        let r = select(&d, &Family::Laplace, 1, &CriterionSpec::aic(), &FitConfig::default(), &ParamSpace::default())
            .unwrap();
        assert_eq!(r.selected, 1);
        assert_eq!(r.schema_version, 1);
        assert_eq!(criterion_path(&r).len(), 1);
    }

    #[test]
    fn conditional_needs_pairs() {
        let d = Dataset::univariate(vec![0.3, 1.1]).unwrap();
        assert!(select_conditional(&d, 1, &CriterionSpec::bic(), &FitConfig::default(), &ParamSpace::default())
            .is_err());
    }

    #[test]
    fn path_rows_add_up_and_nest() {
        let truth = MixtureParams::new(
            vec![0.5, 0.5],
            vec![
                LaplaceParams::new(0.0, 1.0).unwrap().into(),
                LaplaceParams::new(6.0, 1.0).unwrap().into(),
            ],
            ParamSpace::default(),
        )
        .unwrap();
        let (d, _) = truth.sample(300, &mut rng_from_seed(4)).unwrap();
        let cfg = FitConfig { restarts: 3, ..FitConfig::default() };
        let r = select(&d, &Family::Laplace, 4, &CriterionSpec::bic(), &cfg, &ParamSpace::default()).unwrap();
        let rows = criterion_path(&r);
        assert_eq!(rows.len(), 4);
        for w in rows.windows(2) {
            assert!(w[1].risk <= w[0].risk + 1e-6);
        }
        for row in &rows {
            assert!((row.value - (row.risk + row.penalty)).abs() <= 1e-12);
        }
    }

    #[test]
    fn reports_are_deterministic_apart_from_time() {
        let truth = MixtureParams::new(
            vec![0.5, 0.5],
            vec![
                GaussianParams::univariate(0.0, 1.0).unwrap().into(),
                GaussianParams::univariate(4.0, 1.0).unwrap().into(),
            ],
            ParamSpace::default(),
        )
        .unwrap();
        let (d, _) = truth.sample(200, &mut rng_from_seed(8)).unwrap();
        let cfg = FitConfig { restarts: 2, base_seed: 99, ..FitConfig::default() };
        let f = Family::Gaussian { dim: 1 };
        let mut a = select(&d, &f, 3, &CriterionSpec::bic(), &cfg, &ParamSpace::default()).unwrap();
        let mut b = select(&d, &f, 3, &CriterionSpec::bic(), &cfg, &ParamSpace::default()).unwrap();
        a.wall_time_ms = 0.0;
        b.wall_time_ms = 0.0;
        assert_eq!(a, b);
        assert_eq!(a.seed, 99);
    }
}
