//! Penalties for order selection.
//!
//! All penalties are written per observation, to be added to the empirical
//! risk (mean negative log-likelihood):
//!
//! | kind        | penalty                                   |
//! |-------------|-------------------------------------------|
//! | AIC         | `dim / n`                                 |
//! | BIC         | `dim · log n / (2n)`                      |
//! | ν-BIC       | `α(k) · Ln∘ν(n) · log n / n`              |
//! | ε-BIC       | `α(k) · (log n)^(1+ε) / n`                |
//!
//! where `dim = (m + 1)k` (or `(m + 1)k − 1` under [`DimConvention::Free`]),
//! `Ln(x) = log(max(e, x))` and `Ln∘ν` is its ν-fold composition. With the
//! default `α(k) = (m + 1)k / 2`, ν-BIC coincides with BIC bit-for-bit for
//! every `n ≤ exp∘ν(1)` because `Ln∘ν(n) = 1` there.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `log(max(e, x))`, the natural logarithm truncated below at 1.
pub fn ln_trunc(x: f64) -> f64 {
    if x <= std::f64::consts::E {
        1.0
    } else {
        x.ln()
    }
}

/// ν-fold composition of [`ln_trunc`]; `nu = 0` is the identity.
pub fn ln_compose(nu: u32, x: f64) -> f64 {
    (0..nu).fold(x, |acc, _| ln_trunc(acc))
}

/// How `dim(S_k)` is counted for AIC and BIC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DimConvention {
    /// `(m + 1)k`: every weight counted.
    #[default]
    Paper,
    /// `(m + 1)k − 1`: the weights' sum-to-one constraint removes one.
    Free,
}

impl DimConvention {
    pub fn dim(&self, k: usize, m: usize) -> usize {
        match self {
            DimConvention::Paper => (m + 1) * k,
            DimConvention::Free => (m + 1) * k - 1,
        }
    }
}

/// The order-dependent factor α(k) of the ν- and ε-BIC penalties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alpha {
    /// `(m + 1)k / 2`.
    HalfDim,
    /// `s · (m + 1)k`.
    Scaled(f64),
    /// Explicit values for `k = 1, 2, …`.
    Table(Vec<f64>),
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha::HalfDim
    }
}

impl Alpha {
    pub fn eval(&self, k: usize, m: usize) -> f64 {
        match self {
            Alpha::HalfDim => 0.5 * ((m + 1) * k) as f64,
            Alpha::Scaled(s) => s * ((m + 1) * k) as f64,
            Alpha::Table(t) => t.get(k.wrapping_sub(1)).copied().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CriterionKind {
    Aic,
    Bic,
    NuBic { nu: u32 },
    EpsBic { eps: f64 },
}

/// A penalty family together with its α and dimension convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSpec {
    pub kind: CriterionKind,
    #[serde(default)]
    pub alpha: Alpha,
    #[serde(default)]
    pub dim_convention: DimConvention,
}

impl CriterionSpec {
    fn of(kind: CriterionKind) -> Self {
        Self { kind, alpha: Alpha::HalfDim, dim_convention: DimConvention::Paper }
    }

    pub fn aic() -> Self {
        Self::of(CriterionKind::Aic)
    }

    pub fn bic() -> Self {
        Self::of(CriterionKind::Bic)
    }

    pub fn nu_bic(nu: u32) -> Result<Self> {
        if nu == 0 {
            return Err(Error::InvalidParameter("ν-BIC needs ν ≥ 1".into()));
        }
        Ok(Self::of(CriterionKind::NuBic { nu }))
    }

    pub fn eps_bic(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!("ε-BIC needs ε > 0, got {eps}")));
        }
        Ok(Self::of(CriterionKind::EpsBic { eps }))
    }

    pub fn with_alpha(mut self, alpha: Alpha) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_dim_convention(mut self, convention: DimConvention) -> Self {
        self.dim_convention = convention;
        self
    }

    /// Checks the kind's parameters and that α is positive and strictly
    /// increasing on `k = 1..=k_max`.
    pub fn validate(&self, k_max: usize, m: usize) -> Result<()> {
        match self.kind {
            CriterionKind::NuBic { nu: 0 } => {
                return Err(Error::InvalidParameter("ν-BIC needs ν ≥ 1".into()))
            }
            CriterionKind::EpsBic { eps } if !(eps.is_finite() && eps > 0.0) => {
                return Err(Error::InvalidParameter(format!("ε-BIC needs ε > 0, got {eps}")))
            }
            _ => {}
        }
        if matches!(self.kind, CriterionKind::NuBic { .. } | CriterionKind::EpsBic { .. }) {
            let mut prev = 0.0;
            for k in 1..=k_max {
                let a = self.alpha.eval(k, m);
                if !(a.is_finite() && a > prev) {
                    return Err(Error::InvalidParameter(format!(
                        "α must be positive and strictly increasing; fails at k = {k} (α = {a})"
                    )));
                }
                prev = a;
            }
        }
        Ok(())
    }

    /// Short stable name used in tables: `aic`, `bic`, `nu-bic(3)`, `eps-bic(0.02)`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CriterionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CriterionKind::Aic => write!(f, "aic"),
            CriterionKind::Bic => write!(f, "bic"),
            CriterionKind::NuBic { nu } => write!(f, "nu-bic({nu})"),
            CriterionKind::EpsBic { eps } => write!(f, "eps-bic({eps})"),
        }?;
        if self.dim_convention == DimConvention::Free
            && matches!(self.kind, CriterionKind::Aic | CriterionKind::Bic)
        {
            write!(f, "[free]")?;
        }
        Ok(())
    }
}

/// Anything that assigns a penalty to (order k, component dimension m, sample size n).
pub trait Penalty {
    fn penalty(&self, k: usize, m: usize, n: u64) -> f64;
}

impl Penalty for CriterionSpec {
    fn penalty(&self, k: usize, m: usize, n: u64) -> f64 {
        penalty(self, k, m, n)
    }
}

/// Per-observation penalty `pen_{k,n}`.
pub fn penalty(spec: &CriterionSpec, k: usize, m: usize, n: u64) -> f64 {
    let nf = n as f64;
    let ln_n = nf.ln();
    match spec.kind {
        CriterionKind::Aic => spec.dim_convention.dim(k, m) as f64 / nf,
        CriterionKind::Bic => 0.5 * spec.dim_convention.dim(k, m) as f64 * ln_n / nf,
        // Same operation order as BIC so that Ln∘ν(n) = 1 reproduces it exactly.
        CriterionKind::NuBic { nu } => spec.alpha.eval(k, m) * ln_compose(nu, nf) * ln_n / nf,
        CriterionKind::EpsBic { eps } => spec.alpha.eval(k, m) * ln_n.powf(1.0 + eps) / nf,
    }
}

/// `risk + pen_{k,n}`.
pub fn criterion_value(spec: &CriterionSpec, risk: f64, k: usize, m: usize, n: u64) -> f64 {
    risk + penalty(spec, k, m, n)
}

/// Finite-grid evidence for the two penalty conditions.
///
/// * B1: `pen_{k,n} → 0`. Checked as strictly decreasing along the grid.
/// * B2: `(n / log n)(pen_{l,n} − pen_{k,n}) → ∞` for `k < l`. Checked as
///   positive, non-decreasing along the grid and larger at the end than at
///   the start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub n_grid: Vec<u64>,
    pub b1_pass: bool,
    pub b2_pass: bool,
    pub violations: Vec<String>,
}

/// `(n / log n)(pen_{l,n} − pen_{k,n})`.
pub fn scaled_penalty_gap<P: Penalty + ?Sized>(p: &P, k: usize, l: usize, m: usize, n: u64) -> f64 {
    let nf = n as f64;
    nf / nf.ln() * (p.penalty(l, m, n) - p.penalty(k, m, n))
}

pub fn check_b1_b2<P: Penalty + ?Sized>(p: &P, k_max: usize, m: usize, n_grid: &[u64]) -> Result<ConditionReport> {
    if n_grid.len() < 2 || n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] < 2 {
        return Err(Error::InvalidInput(
            "n grid must hold at least two strictly increasing sizes ≥ 2".into(),
        ));
    }
    let mut violations = Vec::new();
    let mut b1 = true;
    for k in 1..=k_max {
        let pens: Vec<f64> = n_grid.iter().map(|&n| p.penalty(k, m, n)).collect();
        if let Some(i) = pens.windows(2).position(|w| !(w[1] < w[0])) {
            b1 = false;
            violations.push(format!(
                "B1: pen at k = {k} does not decrease from n = {} to n = {}",
                n_grid[i],
                n_grid[i + 1]
            ));
        }
    }
    let mut b2 = true;
    for k in 1..k_max {
        for l in k + 1..=k_max {
            let gaps: Vec<f64> = n_grid.iter().map(|&n| scaled_penalty_gap(p, k, l, m, n)).collect();
            let tol = |a: f64| 1e-12 * a.abs();
            let problem = if let Some(i) = gaps.iter().position(|g| !(*g > 0.0)) {
                Some(format!("gap is not positive at n = {}", n_grid[i]))
            } else if let Some(i) = gaps.windows(2).position(|w| w[1] < w[0] - tol(w[0])) {
                Some(format!("gap decreases from n = {} to n = {}", n_grid[i], n_grid[i + 1]))
            } else if !(gaps[gaps.len() - 1] > gaps[0] + tol(gaps[0])) {
                Some("gap does not grow across the grid".to_string())
            } else {
                None
            };
            if let Some(msg) = problem {
                b2 = false;
                violations.push(format!("B2: (k, l) = ({k}, {l}): {msg}"));
            }
        }
    }
    Ok(ConditionReport { n_grid: n_grid.to_vec(), b1_pass: b1, b2_pass: b2, violations })
}

/// Largest `n` for which a penalty's extra factor stays at or below `level`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub level: f64,
    /// Natural logarithm of the threshold (may be `null` when even that overflows).
    pub exponent: Option<f64>,
    /// The threshold itself when representable below 1e300.
    pub value: Option<f64>,
    /// Two-significant-figure rendering, or a symbolic form for huge values.
    pub magnitude: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub criterion: String,
    pub thresholds: Vec<Threshold>,
}

const REPRESENTABLE_LIMIT: f64 = 1e300;

fn sci_from_ln(ln_value: f64) -> String {
    let log10 = ln_value / std::f64::consts::LN_10;
    let mut exp = log10.floor();
    let mut mantissa = 10f64.powf(log10 - exp);
    if (mantissa * 10.0).round() >= 100.0 {
        mantissa /= 10.0;
        exp += 1.0;
    }
    format!("{mantissa:.1}e{exp}")
}

fn threshold_from_ln(level: f64, ln_value: f64) -> Threshold {
    let value = ln_value.exp();
    Threshold {
        level,
        exponent: Some(ln_value),
        value: (value < REPRESENTABLE_LIMIT).then_some(value),
        magnitude: sci_from_ln(ln_value),
    }
}

/// `exp∘ν(level)`: the largest `n` with `Ln∘ν(n) ≤ level` (for `level ≥ 1`).
pub fn nu_threshold(nu: u32, level: f64) -> Result<Threshold> {
    if nu == 0 {
        return Err(Error::InvalidParameter("ν must be ≥ 1".into()));
    }
    if !(level >= 1.0 && level.is_finite()) {
        return Err(Error::InvalidParameter(format!("level must be ≥ 1, got {level}")));
    }
    // Climb the tower in log space: after the loop `ln_value = exp∘(ν−1)(level)`.
    let mut ln_value = level;
    let mut depth = 1;
    while depth < nu {
        let next = ln_value.exp();
        if !next.is_finite() {
            break;
        }
        ln_value = next;
        depth += 1;
    }
    if depth == nu {
        return Ok(threshold_from_ln(level, ln_value));
    }
    // exp∘(nu − depth)(exp(ln_value)) with the outer exponentials beyond f64.
    Ok(Threshold {
        level,
        exponent: None,
        value: None,
        magnitude: format!("exp^{}({ln_value})", nu - depth + 1),
    })
}

/// `exp(level^(1/ε))`: the largest `n` with `(log n)^ε ≤ level`.
pub fn eps_threshold(eps: f64, level: f64) -> Result<Threshold> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParameter(format!("ε must be > 0, got {eps}")));
    }
    if !(level >= 1.0 && level.is_finite()) {
        return Err(Error::InvalidParameter(format!("level must be ≥ 1, got {level}")));
    }
    let ln_value = (level.ln() / eps).exp();
    if !ln_value.is_finite() {
        return Ok(Threshold {
            level,
            exponent: None,
            value: None,
            magnitude: format!("exp(exp({}))", level.ln() / eps),
        });
    }
    Ok(threshold_from_ln(level, ln_value))
}

/// Thresholds at levels 1 and 1.1 for ν-BIC.
pub fn nu_thresholds(nu: u32) -> Result<ThresholdReport> {
    Ok(ThresholdReport {
        criterion: format!("nu-bic({nu})"),
        thresholds: vec![nu_threshold(nu, 1.0)?, nu_threshold(nu, 1.1)?],
    })
}

/// Threshold at level 1.1 for ε-BIC.
pub fn eps_thresholds(eps: f64) -> Result<ThresholdReport> {
    Ok(ThresholdReport { criterion: format!("eps-bic({eps})"), thresholds: vec![eps_threshold(eps, 1.1)?] })
}
