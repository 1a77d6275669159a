//! Canned simulation designs.

use super::{CovariateSampler, SimulationConfig, Truth};
use crate::criteria::CriterionSpec;
use crate::densities::{ComponentParams, GaussianParams, LaplaceParams, ParamSpace, RegressionParams};
use crate::error::{Error, Result};
use crate::fitter::FitConfig;
use crate::mixture::MixtureParams;

const NAMES: [&str; 4] = ["gaussian-2comp", "laplace-2comp", "regression-2line", "gaussian-1comp-null"];

fn space() -> ParamSpace {
    ParamSpace::new(100.0, 100.0).expect("valid bounds")
}

fn criteria() -> Vec<CriterionSpec> {
    vec![
        CriterionSpec::aic(),
        CriterionSpec::bic(),
        CriterionSpec::nu_bic(3).expect("valid ν"),
        CriterionSpec::eps_bic(0.02).expect("valid ε"),
    ]
}

fn fit_config() -> FitConfig {
    FitConfig { restarts: 4, max_iters: 300, rel_tol: 1e-8, ..FitConfig::default() }
}

fn mixture(weights: Vec<f64>, components: Vec<ComponentParams>) -> MixtureParams {
    MixtureParams::new(weights, components, space()).expect("canned truth is feasible")
}

fn build(name: &str) -> Option<SimulationConfig> {
    let cfg = match name {
        "gaussian-2comp" => SimulationConfig {
            name: name.into(),
            truth: Truth::Mixture {
                mixture: mixture(
                    vec![0.5, 0.5],
                    vec![
                        GaussianParams::univariate(0.0, 1.0).ok()?.into(),
                        GaussianParams::univariate(6.0, 1.0).ok()?.into(),
                    ],
                ),
            },
            n_grid: vec![200, 500, 2000],
            criteria: criteria(),
            replicates: 200,
            k_max: 5,
            fit_config: fit_config(),
            base_seed: 0,
            space: space(),
        },
        "laplace-2comp" => SimulationConfig {
            name: name.into(),
            truth: Truth::Mixture {
                mixture: mixture(
                    vec![0.5, 0.5],
                    vec![LaplaceParams::new(0.0, 1.0).ok()?.into(), LaplaceParams::new(6.0, 1.0).ok()?.into()],
                ),
            },
            n_grid: vec![200, 500, 2000],
            criteria: criteria(),
            replicates: 200,
            k_max: 5,
            fit_config: fit_config(),
            base_seed: 0,
            space: space(),
        },
        "regression-2line" => SimulationConfig {
            name: name.into(),
            truth: Truth::Regression {
                mixture: mixture(
                    vec![0.5, 0.5],
                    vec![
                        RegressionParams::new(vec![0.0, 2.0], 0.5).ok()?.into(),
                        RegressionParams::new(vec![0.0, -2.0], 0.5).ok()?.into(),
                    ],
                ),
                covariates: CovariateSampler { intercept: true, uniform: vec![(-1.0, 1.0)] },
            },
            n_grid: vec![1000],
            criteria: criteria(),
            replicates: 200,
            k_max: 4,
            fit_config: fit_config(),
            base_seed: 0,
            space: space(),
        },
        "gaussian-1comp-null" => SimulationConfig {
            name: name.into(),
            truth: Truth::Mixture { mixture: mixture(vec![1.0], vec![GaussianParams::univariate(0.0, 1.0).ok()?.into()]) },
            n_grid: vec![5000],
            criteria: criteria(),
            replicates: 200,
            k_max: 3,
            fit_config: fit_config(),
            base_seed: 0,
            space: space(),
        },
        _ => return None,
    };
    Some(cfg)
}

pub fn scenario_names() -> Vec<String> {
    NAMES.iter().map(|s| s.to_string()).collect()
}

/// Every canned scenario, in a fixed order.
pub fn scenario_library() -> Vec<SimulationConfig> {
    NAMES.iter().filter_map(|n| build(n)).collect()
}

pub fn scenario(name: &str) -> Result<SimulationConfig> {
    build(name).ok_or_else(|| Error::UnknownScenario { name: name.to_string(), available: scenario_names() })
}
