//! Monte Carlo consistency harness.
//!
//! For every sample size `n` in the grid and every replicate `r`, one dataset
//! is drawn from the true mixture with seed `split_path(base_seed, [n, r])`.
//! All criteria are evaluated on that same dataset and the same fitted path,
//! so criterion columns are paired.

mod hellinger;
mod scenarios;

pub use hellinger::{adaptive_simpson, hellinger_1d, hellinger_1d_with, squared_hellinger_1d, GridSpec};
pub use scenarios::{scenario, scenario_library, scenario_names};

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::CriterionSpec;
use crate::data::Dataset;
use crate::densities::{ComponentParams, Family, ParamSpace};
use crate::error::{Error, Result};
use crate::fitter::FitConfig;
use crate::mixture::MixtureParams;
use crate::rng::{rng_from_seed, split_path};
use crate::selector::select_many;

/// Stream index for fitting seeds, next to the data stream of a replicate.
const FIT_STREAM: u64 = 1;

/// Covariate rows `(1?, x_1, …, x_q)` with `x_j ~ Uniform(lo_j, hi_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateSampler {
    pub intercept: bool,
    pub uniform: Vec<(f64, f64)>,
}

impl CovariateSampler {
    pub fn width(&self) -> usize {
        self.uniform.len() + usize::from(self.intercept)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.width());
        if self.intercept {
            u.push(1.0);
        }
        u.extend(self.uniform.iter().map(|&(lo, hi)| rng.random_range(lo..hi)));
        u
    }
}

/// The data-generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Truth {
    Mixture { mixture: MixtureParams },
    Regression { mixture: MixtureParams, covariates: CovariateSampler },
}

impl Truth {
    pub fn mixture(&self) -> &MixtureParams {
        match self {
            Truth::Mixture { mixture } | Truth::Regression { mixture, .. } => mixture,
        }
    }

    /// True order `k₀`.
    pub fn order(&self) -> usize {
        self.mixture().k()
    }

    pub fn family(&self) -> Family {
        self.mixture().family()
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        match self {
            Truth::Mixture { mixture } => Ok(mixture.sample(n, rng)?.0),
            Truth::Regression { mixture, covariates } => {
                Ok(mixture.sample_conditional(n, |r: &mut R| covariates.draw(r), rng)?.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub name: String,
    pub truth: Truth,
    pub n_grid: Vec<usize>,
    pub criteria: Vec<CriterionSpec>,
    pub replicates: usize,
    pub k_max: usize,
    #[serde(default)]
    pub fit_config: FitConfig,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub space: ParamSpace,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be ≥ 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("n_grid must be non-empty and strictly increasing".into()));
        }
        if self.criteria.is_empty() {
            return Err(Error::InvalidParameter("at least one criterion is required".into()));
        }
        let k0 = self.truth.order();
        if k0 > self.k_max {
            return Err(Error::InvalidParameter(format!("true order {k0} exceeds k_max = {}", self.k_max)));
        }
        let mixture = self.truth.mixture();
        if mixture.components().iter().any(|c| !c.is_feasible(&self.space)) {
            return Err(Error::InvalidParameter("truth lies outside the parameter space".into()));
        }
        if let Truth::Regression { mixture, covariates } = &self.truth {
            let Family::Regression { covariates: p } = mixture.family() else {
                return Err(Error::InvalidParameter("regression truth needs regression components".into()));
            };
            if p != covariates.width() {
                return Err(Error::DimensionMismatch { expected: p, got: covariates.width() });
            }
            if covariates.uniform.iter().any(|&(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
                return Err(Error::InvalidParameter("covariate ranges must satisfy lo < hi".into()));
            }
        } else if mixture.family().is_conditional() {
            return Err(Error::InvalidParameter("regression components need a covariate sampler".into()));
        }
        let m = mixture.family().param_dim();
        for spec in &self.criteria {
            spec.validate(self.k_max, m)?;
        }
        self.fit_config.validate(self.k_max)
    }
}

/// One (criterion, n, replicate) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub criterion: String,
    pub n: usize,
    pub replicate: usize,
    pub data_digest: String,
    pub selected: Option<usize>,
    /// Fitted-vs-true Hellinger distance at the selected order (1-D families only).
    pub hellinger: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub criterion: String,
    pub n: usize,
    /// Replicates whose selection succeeded; the accuracy denominator.
    pub replicates: usize,
    pub failed: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub mean_k: f64,
    pub under: usize,
    pub over: usize,
    pub median_hellinger: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub schema_version: u32,
    pub scenario: String,
    pub true_order: usize,
    pub k_max: usize,
    pub base_seed: u64,
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyTable {
    pub fn row(&self, criterion: &str, n: usize) -> Option<&AccuracyRow> {
        self.rows.iter().find(|r| r.criterion == criterion && r.n == n)
    }
}

/// Table plus per-replicate detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub table: AccuracyTable,
    pub records: Vec<ReplicateRecord>,
}

fn is_univariate(family: &Family) -> bool {
    matches!(family, Family::Laplace | Family::Gaussian { dim: 1 })
}

fn run_replicate(cfg: &SimulationConfig, n: usize, r: usize) -> Vec<ReplicateRecord> {
    let labels: Vec<String> = cfg.criteria.iter().map(|c| c.label()).collect();
    let fail = |digest: String, msg: String| -> Vec<ReplicateRecord> {
        labels
            .iter()
            .map(|c| ReplicateRecord {
                criterion: c.clone(),
                n,
                replicate: r,
                data_digest: digest.clone(),
                selected: None,
                hellinger: None,
                error: Some(msg.clone()),
            })
            .collect()
    };
    let mut rng = rng_from_seed(split_path(cfg.base_seed, &[n as u64, r as u64]));
    let data = match cfg.truth.sample(n, &mut rng) {
        Ok(d) => d,
        Err(e) => return fail(String::new(), e.to_string()),
    };
    let digest = data.digest();
    let fit_cfg = FitConfig {
        base_seed: split_path(cfg.base_seed, &[n as u64, r as u64, FIT_STREAM]),
        ..cfg.fit_config.clone()
    };
    let family = cfg.truth.family();
    let reports = match select_many(&data, &family, cfg.k_max, &cfg.criteria, &fit_cfg, &cfg.space) {
        Ok(r) => r,
        Err(e) => return fail(digest, e.to_string()),
    };
    let mut distances: HashMap<usize, Option<f64>> = HashMap::new();
    reports
        .iter()
        .zip(&labels)
        .map(|(rep, label)| {
            let hellinger = *distances.entry(rep.selected).or_insert_with(|| {
                is_univariate(&family)
                    .then(|| hellinger_1d(&rep.selected_fit().params, cfg.truth.mixture()).ok())
                    .flatten()
            });
            ReplicateRecord {
                criterion: label.clone(),
                n,
                replicate: r,
                data_digest: digest.clone(),
                selected: Some(rep.selected),
                hellinger,
                error: None,
            }
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[h] } else { 0.5 * (v[h - 1] + v[h]) })
}

fn aggregate(cfg: &SimulationConfig, records: &[ReplicateRecord]) -> AccuracyTable {
    let k0 = cfg.truth.order();
    let mut rows = Vec::new();
    for spec in &cfg.criteria {
        let label = spec.label();
        for &n in &cfg.n_grid {
            let cell: Vec<&ReplicateRecord> =
                records.iter().filter(|x| x.criterion == label && x.n == n).collect();
            let picks: Vec<usize> = cell.iter().filter_map(|x| x.selected).collect();
            let ok = picks.len();
            let correct = picks.iter().filter(|&&k| k == k0).count();
            rows.push(AccuracyRow {
                criterion: label.clone(),
                n,
                replicates: ok,
                failed: cell.len() - ok,
                correct,
                accuracy: if ok == 0 { 0.0 } else { correct as f64 / ok as f64 },
                mean_k: if ok == 0 { f64::NAN } else { picks.iter().sum::<usize>() as f64 / ok as f64 },
                under: picks.iter().filter(|&&k| k < k0).count(),
                over: picks.iter().filter(|&&k| k > k0).count(),
                median_hellinger: median(cell.iter().filter_map(|x| x.hellinger).collect()),
            });
        }
    }
    AccuracyTable {
        schema_version: 1,
        scenario: cfg.name.clone(),
        true_order: k0,
        k_max: cfg.k_max,
        base_seed: cfg.base_seed,
        rows,
    }
}

/// Runs every (n, replicate) cell and aggregates accuracy per (criterion, n).
pub fn run_consistency(cfg: &SimulationConfig) -> Result<AccuracyTable> {
    Ok(run_consistency_detailed(cfg)?.table)
}

pub fn run_consistency_detailed(cfg: &SimulationConfig) -> Result<SimulationOutcome> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> =
        cfg.n_grid.iter().flat_map(|&n| (0..cfg.replicates).map(move |r| (n, r))).collect();
    let records: Vec<ReplicateRecord> =
        cells.par_iter().flat_map_iter(|&(n, r)| run_replicate(cfg, n, r)).collect();
    let table = aggregate(cfg, &records);
    Ok(SimulationOutcome { table, records })
}

/// Univariate truth built from `(weight, component)` pairs on `space`.
pub fn truth_from_components(
    weights: Vec<f64>,
    components: Vec<ComponentParams>,
    space: ParamSpace,
) -> Result<Truth> {
    Ok(Truth::Mixture { mixture: MixtureParams::new(weights, components, space)? })
}
