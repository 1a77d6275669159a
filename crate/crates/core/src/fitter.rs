//! Constrained maximum-likelihood fitting of a k-component mixture by EM
//! with independently seeded restarts.
//!
//! Every iterate stays inside the compact parameter set: component updates
//! are projected after each M-step and mixture weights are floored at
//! [`FitConfig::weight_floor`] and renormalized. EM's monotonicity argument
//! does not cover either operation, so an iteration in which the risk rises
//! while one of them was active is accepted and counted in
//! [`FitResult::projection_flags`]; a rise without them lands in
//! [`FitResult::monotonicity_violations`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::densities::{
    weighted_mstep_in, ComponentParams, Family, GaussianParams, LaplaceParams, MStepContext, ParamSpace,
    RegressionParams,
};
use crate::error::{Error, Result};
use crate::mixture::MixtureParams;
use crate::rng::{rng_from_seed, split};

/// Slack on the per-iteration risk decrease.
pub const MONOTONICITY_TOL: f64 = 1e-9;

/// Attempts at finding `k` distinct farthest-point seeds.
const GREEDY_SEED_ATTEMPTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Uniform random responsibilities followed by one M-step.
    RandomResponsibility,
    /// Farthest-point seeds, nearest-seed assignment, one M-step. For
    /// regression, greedily chosen lines through random minimal subsets
    /// and nearest-line assignment.
    #[default]
    GreedySeed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub max_iters: usize,
    /// Stop once `|Δrisk| ≤ rel_tol · max(|risk|, 1)`.
    pub rel_tol: f64,
    pub restarts: usize,
    pub weight_floor: f64,
    pub init_strategy: InitStrategy,
    pub base_seed: u64,
    /// Keep the per-iteration risk path of the returned restart.
    pub record_trace: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            rel_tol: 1e-8,
            restarts: 10,
            weight_floor: 1e-8,
            init_strategy: InitStrategy::GreedySeed,
            base_seed: 0,
            record_trace: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be ≥ 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("rel_tol must be > 0".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be ≥ 1".into()));
        }
        if !(self.weight_floor >= 0.0 && self.weight_floor * (k as f64) < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "weight_floor must lie in [0, 1/k) = [0, {})",
                1.0 / k as f64
            )));
        }
        Ok(())
    }
}

/// Outcome of [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: MixtureParams,
    /// Empirical risk of `params`.
    pub risk: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final risk of every restart (random restarts first, then warm starts);
    /// `null` for restarts that failed.
    pub restart_risks: Vec<Option<f64>>,
    pub best_restart: usize,
    /// Risk-raising iterations with projection or weight flooring active.
    pub projection_flags: usize,
    /// Risk-raising iterations with nothing to explain them.
    pub monotonicity_violations: usize,
    /// Components re-seeded after a degenerate M-step.
    pub reseeds: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub risk_trace: Vec<f64>,
}

/// Result of a single [`em_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmStep {
    pub params: MixtureParams,
    pub risk: f64,
    /// A component update or a weight was moved back into the feasible set.
    pub projected: bool,
    /// At least one component was re-seeded.
    pub reseeded: bool,
}

/// Per-dataset state shared by every restart.
struct EmContext<'a> {
    family: Family,
    data: &'a Dataset,
    space: ParamSpace,
    mstep: MStepContext,
    /// Single-component MLE, the template for re-seeded components.
    reference: ComponentParams,
}

impl<'a> EmContext<'a> {
    fn new(family: Family, data: &'a Dataset, space: ParamSpace) -> Result<Self> {
        let mstep = MStepContext::new(&family, data);
        let ones = vec![1.0; data.len()];
        let (reference, _) = weighted_mstep_in(&mstep, &family, data, &ones, &space)?;
        Ok(Self { family, data, space, mstep, reference })
    }

    /// A broad component centred on observation `i`.
    fn component_at(&self, i: usize) -> Result<ComponentParams> {
        let c: ComponentParams = match &self.reference {
            ComponentParams::Gaussian(g) => {
                GaussianParams::new(self.data.row(i).to_vec(), g.covariance().clone())?.into()
            }
            ComponentParams::Laplace(l) => LaplaceParams::new(self.data.row(i)[0], l.rate())?.into(),
            ComponentParams::Regression(r) => {
                // Smallest change to the pooled coefficients that fits (u_i, y_i) exactly.
                let u = self.data.row(i);
                let y = self.data.responses().expect("regression data")[i];
                let resid = y - r.predict(u);
                let norm2: f64 = u.iter().map(|v| v * v).sum();
                let beta = r
                    .coefficients()
                    .iter()
                    .zip(u)
                    .map(|(b, v)| if norm2 > 0.0 { b + v * resid / norm2 } else { *b })
                    .collect();
                RegressionParams::new(beta, r.noise_sd())?.into()
            }
        };
        Ok(c.project(&self.space))
    }
}

/// Scratch buffers for one EM run.
struct Workspace {
    k: usize,
    log_terms: Vec<f64>,
    log_f: Vec<f64>,
    weights: Vec<f64>,
}

impl Workspace {
    fn new(n: usize, k: usize) -> Self {
        Self { k, log_terms: vec![0.0; n * k], log_f: vec![0.0; n], weights: vec![0.0; n] }
    }

    /// Fills the per-point log terms and mixture log-densities; returns the risk.
    fn e_step(&mut self, psi: &MixtureParams, data: &Dataset) -> f64 {
        let k = self.k;
        let mut total = 0.0;
        for i in 0..data.len() {
            let lf = psi.log_terms_into(data.obs(i), &mut self.log_terms[i * k..(i + 1) * k]);
            self.log_f[i] = lf;
            total += lf;
        }
        -total / data.len() as f64
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct StepFlags {
    projected: bool,
    reseeded: usize,
}

/// M-step from the responsibilities held in `ws` (filled by `e_step` at `psi`).
fn m_step(
    ctx: &EmContext<'_>,
    ws: &mut Workspace,
    weight_floor: f64,
) -> Result<(MixtureParams, StepFlags)> {
    let n = ctx.data.len();
    let k = ws.k;
    let mut flags = StepFlags::default();
    let mut components = Vec::with_capacity(k);
    let mut raw_weights = Vec::with_capacity(k);
    let mut degenerate = Vec::new();
    for z in 0..k {
        let mut mass = 0.0;
        for i in 0..n {
            let w = (ws.log_terms[i * k + z] - ws.log_f[i]).exp();
            ws.weights[i] = w;
            mass += w;
        }
        match weighted_mstep_in(&ctx.mstep, &ctx.family, ctx.data, &ws.weights, &ctx.space) {
            Ok((theta, moved)) => {
                flags.projected |= moved;
                components.push(Some(theta));
                raw_weights.push(mass / n as f64);
            }
            Err(Error::Degenerate(_)) => {
                degenerate.push(z);
                components.push(None);
                raw_weights.push(1.0 / n as f64);
            }
            Err(e) => return Err(e),
        }
    }
    if !degenerate.is_empty() {
        // Worst-fitting points first; each degenerate component takes the next one.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ws.log_f[a].total_cmp(&ws.log_f[b]).then(a.cmp(&b)));
        for (slot, z) in degenerate.into_iter().enumerate() {
            let i = order[slot % n];
            components[z] = Some(ctx.component_at(i)?);
            flags.reseeded += 1;
        }
    }
    let (weights, floored) = floor_weights(raw_weights, weight_floor);
    flags.projected |= floored;
    let components = components.into_iter().map(|c| c.expect("every slot filled")).collect();
    Ok((MixtureParams::new(weights, components, ctx.space)?, flags))
}

/// Normalizes, raises weights below `floor` to it and renormalizes.
fn floor_weights(mut w: Vec<f64>, floor: f64) -> (Vec<f64>, bool) {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let mut floored = false;
    for v in w.iter_mut() {
        if *v < floor {
            *v = floor;
            floored = true;
        }
    }
    if floored {
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
    }
    (w, floored)
}

struct Run {
    params: MixtureParams,
    risk: f64,
    iterations: usize,
    converged: bool,
    projection_flags: usize,
    monotonicity_violations: usize,
    reseeds: usize,
    trace: Vec<f64>,
}

fn run_em(ctx: &EmContext<'_>, start: MixtureParams, cfg: &FitConfig) -> Result<Run> {
    let mut ws = Workspace::new(ctx.data.len(), start.k());
    let mut psi = start;
    let mut risk = ws.e_step(&psi, ctx.data);
    if !risk.is_finite() {
        return Err(Error::Degenerate("initial risk is not finite".into()));
    }
    let mut run = Run {
        params: psi.clone(),
        risk,
        iterations: 0,
        converged: false,
        projection_flags: 0,
        monotonicity_violations: 0,
        reseeds: 0,
        trace: if cfg.record_trace { vec![risk] } else { Vec::new() },
    };
    for it in 1..=cfg.max_iters {
        let (next, flags) = m_step(ctx, &mut ws, cfg.weight_floor)?;
        let next_risk = ws.e_step(&next, ctx.data);
        if !next_risk.is_finite() {
            return Err(Error::Degenerate(format!("risk became non-finite at iteration {it}")));
        }
        if next_risk > risk + MONOTONICITY_TOL {
            if flags.reseeded > 0 {
                // Re-seeding restarts a component; no descent is expected.
            } else if flags.projected {
                run.projection_flags += 1;
            } else {
                run.monotonicity_violations += 1;
            }
        }
        run.reseeds += flags.reseeded;
        if cfg.record_trace {
            run.trace.push(next_risk);
        }
        let done = flags.reseeded == 0 && (risk - next_risk).abs() <= cfg.rel_tol * risk.abs().max(1.0);
        psi = next;
        risk = next_risk;
        run.iterations = it;
        if done {
            run.converged = true;
            break;
        }
    }
    run.params = psi;
    run.risk = risk;
    Ok(run)
}

fn check_fit_inputs(data: &Dataset, family: &Family, k: usize, cfg: &FitConfig) -> Result<()> {
    family.check_data(data)?;
    if k == 0 {
        return Err(Error::InvalidInput("k must be ≥ 1".into()));
    }
    let needed = k * family.min_support();
    if data.len() < needed {
        return Err(Error::InvalidInput(format!(
            "{} observations cannot support k = {k} {} components (need ≥ {needed})",
            data.len(),
            family.name()
        )));
    }
    cfg.validate(k)
}

/// Initial mixture for one restart.
pub fn init<R: Rng + ?Sized>(
    data: &Dataset,
    family: &Family,
    k: usize,
    space: &ParamSpace,
    strategy: InitStrategy,
    weight_floor: f64,
    rng: &mut R,
) -> Result<MixtureParams> {
    check_fit_inputs(data, family, k, &FitConfig { weight_floor, ..FitConfig::default() })?;
    let ctx = EmContext::new(*family, data, *space)?;
    init_in(&ctx, k, strategy, weight_floor, rng)
}

fn init_in<R: Rng + ?Sized>(
    ctx: &EmContext<'_>,
    k: usize,
    strategy: InitStrategy,
    weight_floor: f64,
    rng: &mut R,
) -> Result<MixtureParams> {
    let n = ctx.data.len();
    if k == 1 {
        return MixtureParams::new(vec![1.0], vec![ctx.reference.clone()], ctx.space);
    }
    let mut components = Vec::with_capacity(k);
    let mut raw_weights = Vec::with_capacity(k);
    let mut weights = vec![0.0; n];
    match strategy {
        InitStrategy::RandomResponsibility => {
            let mut resp = vec![0.0; n * k];
            for row in resp.chunks_mut(k) {
                row.iter_mut().for_each(|r| *r = rng.random::<f64>());
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|r| *r /= s);
            }
            for z in 0..k {
                for i in 0..n {
                    weights[i] = resp[i * k + z];
                }
                let mass: f64 = weights.iter().sum();
                let (theta, _) = weighted_mstep_in(&ctx.mstep, &ctx.family, ctx.data, &weights, &ctx.space)?;
                components.push(theta);
                raw_weights.push(mass / n as f64);
            }
        }
        InitStrategy::GreedySeed if ctx.family.is_conditional() => {
            return greedy_line_init(ctx, k, weight_floor, rng);
        }
        InitStrategy::GreedySeed => {
            let seeds = farthest_point_seeds(ctx.data, k, rng)?;
            let labels = nearest_seed(ctx.data, &seeds);
            for (z, &seed) in seeds.iter().enumerate() {
                for (w, &l) in weights.iter_mut().zip(&labels) {
                    *w = if l == z { 1.0 } else { 0.0 };
                }
                let count = labels.iter().filter(|&&l| l == z).count();
                let theta = match weighted_mstep_in(&ctx.mstep, &ctx.family, ctx.data, &weights, &ctx.space) {
                    Ok((theta, _)) => theta,
                    Err(Error::Degenerate(_)) => ctx.component_at(seed)?,
                    Err(e) => return Err(e),
                };
                components.push(theta);
                raw_weights.push(count as f64 / n as f64);
            }
        }
    }
    let (w, _) = floor_weights(raw_weights, weight_floor);
    MixtureParams::new(w, components, ctx.space)
}

/// Candidate lines drawn per component when seeding a regression mixture.
const LINE_CANDIDATES_PER_COMPONENT: usize = 16;

/// Regression seeding: lines through random minimal subsets of the data are
/// added greedily, each time taking the candidate that most reduces the sum
/// over observations of the smallest squared residual. Every observation
/// then goes to its closest line and each line is refitted on its share.
fn greedy_line_init<R: Rng + ?Sized>(
    ctx: &EmContext<'_>,
    k: usize,
    weight_floor: f64,
    rng: &mut R,
) -> Result<MixtureParams> {
    let data = ctx.data;
    let n = data.len();
    let p = data.dim();
    let y = data.responses().ok_or_else(|| Error::InvalidInput("regression data needs responses".into()))?;
    let mut weights = vec![0.0; n];
    let mut candidates: Vec<RegressionParams> = Vec::new();
    for _ in 0..LINE_CANDIDATES_PER_COMPONENT * k {
        weights.iter_mut().for_each(|w| *w = 0.0);
        for i in rand::seq::index::sample(rng, n, p.min(n)) {
            weights[i] = 1.0;
        }
        if let Ok((ComponentParams::Regression(r), _)) =
            weighted_mstep_in(&ctx.mstep, &ctx.family, data, &weights, &ctx.space)
        {
            candidates.push(r);
        }
    }
    if candidates.len() < k {
        return Err(Error::Degenerate("too few non-degenerate candidate lines".into()));
    }
    let sq_resid = |r: &RegressionParams, i: usize| {
        let e = y[i] - r.predict(data.row(i));
        e * e
    };
    let mut best_sq = vec![f64::INFINITY; n];
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k {
        let pick = (0..candidates.len())
            .filter(|c| !chosen.contains(c))
            .map(|c| {
                let cost: f64 = (0..n).map(|i| best_sq[i].min(sq_resid(&candidates[c], i))).sum();
                (c, cost)
            })
            .fold((usize::MAX, f64::INFINITY), |best, (c, cost)| if cost < best.1 { (c, cost) } else { best })
            .0;
        for (i, b) in best_sq.iter_mut().enumerate() {
            *b = b.min(sq_resid(&candidates[pick], i));
        }
        chosen.push(pick);
    }
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            chosen
                .iter()
                .enumerate()
                .map(|(z, &c)| (z, sq_resid(&candidates[c], i)))
                .fold((0, f64::INFINITY), |best, (z, e)| if e < best.1 { (z, e) } else { best })
                .0
        })
        .collect();
    let mut components = Vec::with_capacity(k);
    let mut raw_weights = Vec::with_capacity(k);
    for (z, &c) in chosen.iter().enumerate() {
        for (w, &l) in weights.iter_mut().zip(&labels) {
            *w = if l == z { 1.0 } else { 0.0 };
        }
        let count = labels.iter().filter(|&&l| l == z).count();
        let theta = match weighted_mstep_in(&ctx.mstep, &ctx.family, data, &weights, &ctx.space) {
            Ok((theta, _)) => theta,
            Err(Error::Degenerate(_)) => ComponentParams::from(candidates[c].clone()),
            Err(e) => return Err(e),
        };
        components.push(theta);
        raw_weights.push(count.max(1) as f64 / n as f64);
    }
    let (w, _) = floor_weights(raw_weights, weight_floor);
    MixtureParams::new_projected(w, components, ctx.space)
}

fn sq_dist(data: &Dataset, i: usize, j: usize) -> f64 {
    let mut d: f64 = data.row(i).iter().zip(data.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
    if let Some(y) = data.responses() {
        d += (y[i] - y[j]) * (y[i] - y[j]);
    }
    d
}

/// Farthest-point traversal from a random start; indices of `k` distinct seeds.
pub fn farthest_point_seeds<R: Rng + ?Sized>(data: &Dataset, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = data.len();
    if k == 0 || n == 0 {
        return Err(Error::InvalidInput("farthest-point seeding needs k ≥ 1 and data".into()));
    }
    'attempt: for _ in 0..GREEDY_SEED_ATTEMPTS {
        let first = rng.random_range(0..n);
        let mut seeds = vec![first];
        let mut min_d: Vec<f64> = (0..n).map(|i| sq_dist(data, i, first)).collect();
        while seeds.len() < k {
            let (best, &d) = min_d
                .iter()
                .enumerate()
                .fold((0, &f64::NEG_INFINITY), |acc, (i, d)| if *d > *acc.1 { (i, d) } else { acc });
            if !(d > 0.0) {
                continue 'attempt;
            }
            seeds.push(best);
            for (i, m) in min_d.iter_mut().enumerate() {
                *m = m.min(sq_dist(data, i, best));
            }
        }
        return Ok(seeds);
    }
    Err(Error::Degenerate(format!(
        "could not find {k} distinct seed points in {GREEDY_SEED_ATTEMPTS} attempts"
    )))
}

fn nearest_seed(data: &Dataset, seeds: &[usize]) -> Vec<usize> {
    (0..data.len())
        .map(|i| {
            let mut best = (0, f64::INFINITY);
            for (z, &s) in seeds.iter().enumerate() {
                let d = sq_dist(data, i, s);
                if d < best.1 {
                    best = (z, d);
                }
            }
            best.0
        })
        .collect()
}

/// One EM iteration (E-step, M-step with projection, weight update).
pub fn em_step(psi: &MixtureParams, data: &Dataset, space: &ParamSpace, cfg: &FitConfig) -> Result<EmStep> {
    check_fit_inputs(data, &psi.family(), psi.k(), cfg)?;
    let ctx = EmContext::new(psi.family(), data, *space)?;
    let psi = MixtureParams::new_projected(psi.weights().to_vec(), psi.components().to_vec(), *space)?;
    let mut ws = Workspace::new(data.len(), psi.k());
    ws.e_step(&psi, data);
    let (params, flags) = m_step(&ctx, &mut ws, cfg.weight_floor)?;
    let risk = ws.e_step(&params, data);
    Ok(EmStep { params, risk, projected: flags.projected, reseeded: flags.reseeded > 0 })
}

/// Constrained MLE of a `k`-component mixture: best of `cfg.restarts` seeded EM runs.
pub fn fit(data: &Dataset, family: &Family, k: usize, space: &ParamSpace, cfg: &FitConfig) -> Result<FitResult> {
    fit_with_warm_starts(data, family, k, space, cfg, &[])
}

/// As [`fit`], with extra EM runs started from the given mixtures (projected
/// onto `space`). Warm starts are indexed after the random restarts.
pub fn fit_with_warm_starts(
    data: &Dataset,
    family: &Family,
    k: usize,
    space: &ParamSpace,
    cfg: &FitConfig,
    warm_starts: &[MixtureParams],
) -> Result<FitResult> {
    check_fit_inputs(data, family, k, cfg)?;
    if let Some(w) = warm_starts.iter().find(|w| w.k() != k || w.family() != *family) {
        return Err(Error::InvalidInput(format!(
            "warm start has k = {} ({}) but the fit has k = {k} ({})",
            w.k(),
            w.family().name(),
            family.name()
        )));
    }
    let ctx = EmContext::new(*family, data, *space)?;
    let random: Vec<Result<Run>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(split(cfg.base_seed, r as u64));
            let start = init_in(&ctx, k, cfg.init_strategy, cfg.weight_floor, &mut rng)?;
            run_em(&ctx, start, cfg)
        })
        .collect();
    let warm: Vec<Result<Run>> = warm_starts
        .par_iter()
        .map(|w| {
            let (weights, _) = floor_weights(w.weights().to_vec(), cfg.weight_floor);
            let start = MixtureParams::new_projected(weights, w.components().to_vec(), *space)?;
            run_em(&ctx, start, cfg)
        })
        .collect();
    let runs: Vec<Result<Run>> = random.into_iter().chain(warm).collect();

    let restart_risks: Vec<Option<f64>> = runs.iter().map(|r| r.as_ref().ok().map(|r| r.risk)).collect();
    let best = runs
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().ok().map(|r| (i, r.risk)))
        .fold(None, |acc: Option<(usize, f64)>, (i, risk)| match acc {
            Some((_, b)) if b <= risk => acc,
            _ => Some((i, risk)),
        });
    let Some((best_restart, _)) = best else {
        let last = runs
            .into_iter()
            .filter_map(|r| r.err())
            .last()
            .map(|e| e.to_string())
            .unwrap_or_default();
        return Err(Error::AllRestartsFailed { k, restarts: restart_risks.len(), last });
    };
    let run = runs.into_iter().nth(best_restart).expect("index in range").expect("successful run");
    Ok(FitResult {
        params: run.params,
        risk: run.risk,
        iterations: run.iterations,
        converged: run.converged,
        restart_risks,
        best_restart,
        projection_flags: run.projection_flags,
        monotonicity_violations: run.monotonicity_violations,
        reseeds: run.reseeds,
        risk_trace: run.trace,
    })
}

/// `mixture` with its heaviest component split into two identical halves;
/// a (k+1)-component start whose risk equals that of `mixture`.
pub fn duplicate_heaviest(mixture: &MixtureParams) -> MixtureParams {
    let heaviest = mixture
        .weights()
        .iter()
        .enumerate()
        .fold(0, |best, (z, w)| if *w > mixture.weights()[best] { z } else { best });
    let mut weights = mixture.weights().to_vec();
    let mut components = mixture.components().to_vec();
    weights[heaviest] *= 0.5;
    weights.push(weights[heaviest]);
    components.push(components[heaviest].clone());
    MixtureParams::new(weights, components, *mixture.space()).expect("split of a valid mixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Obs;

    fn uni(v: &[f64]) -> Dataset {
        Dataset::univariate(v.to_vec()).unwrap()
    }

    #[test]
    fn k1_gaussian_closed_form() {
        let d = uni(&[-1.0, 0.0, 1.0]);
        let r = fit(&d, &Family::Gaussian { dim: 1 }, 1, &ParamSpace::default(), &FitConfig::default()).unwrap();
        let ComponentParams::Gaussian(g) = &r.params.components()[0] else { panic!() };
        assert!(g.mean()[0].abs() < 1e-15);
        assert!((g.covariance()[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!(r.converged);
        assert_eq!(r.risk, r.params.empirical_risk(&d).unwrap());
    }

    #[test]
    fn k1_laplace_closed_form() {
        let d = uni(&[0.0, 1.0, 3.0]);
        let r = fit(&d, &Family::Laplace, 1, &ParamSpace::default(), &FitConfig::default()).unwrap();
        assert_eq!(r.params.components()[0], LaplaceParams::new(1.0, 1.0).unwrap().into());
    }

    #[test]
    fn rejects_small_samples_and_bad_configs() {
        let d = uni(&[0.0, 1.0, 3.0]);
        let g = Family::Gaussian { dim: 1 };
        let s = ParamSpace::default();
        assert!(matches!(fit(&d, &g, 2, &s, &FitConfig::default()), Err(Error::InvalidInput(_))));
        assert!(fit(&d, &Family::Laplace, 0, &s, &FitConfig::default()).is_err());
        let bad = FitConfig { restarts: 0, ..FitConfig::default() };
        assert!(fit(&d, &Family::Laplace, 1, &s, &bad).is_err());
        let bad = FitConfig { weight_floor: 0.5, ..FitConfig::default() };
        assert!(fit(&d, &Family::Laplace, 2, &s, &bad).is_err());
        let bad = FitConfig { rel_tol: 0.0, ..FitConfig::default() };
        assert!(fit(&d, &Family::Laplace, 1, &s, &bad).is_err());
    }

    #[test]
    fn greedy_seeds_on_separated_clusters() {
        let d = uni(&[0.0, 0.0, 0.0, 10.0, 10.0, 10.0]);
        for seed in 0..10 {
            let seeds = farthest_point_seeds(&d, 2, &mut rng_from_seed(seed)).unwrap();
            let mut vals: Vec<f64> = seeds.iter().map(|&i| d.row(i)[0]).collect();
            vals.sort_by(f64::total_cmp);
            assert_eq!(vals, vec![0.0, 10.0]);
        }
        assert!(farthest_point_seeds(&uni(&[1.0, 1.0, 1.0]), 2, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn init_k1_is_global_mle_and_init_is_deterministic() {
        let d = uni(&[0.3, -1.2, 2.5, 0.9, 4.1, -0.4]);
        let s = ParamSpace::default();
        let f = Family::Laplace;
        let m = init(&d, &f, 1, &s, InitStrategy::RandomResponsibility, 1e-8, &mut rng_from_seed(3)).unwrap();
        let mle = crate::densities::weighted_mstep(&f, &d, &[1.0; 6], &s).unwrap();
        assert_eq!(m.components()[0], mle);
        for strategy in [InitStrategy::RandomResponsibility, InitStrategy::GreedySeed] {
            let a = init(&d, &f, 2, &s, strategy, 1e-8, &mut rng_from_seed(5)).unwrap();
            let b = init(&d, &f, 2, &s, strategy, 1e-8, &mut rng_from_seed(5)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn em_step_fixed_point_at_k1_mle() {
        let d = uni(&[-1.0, 0.0, 1.0, 2.0]);
        let s = ParamSpace::default();
        let f = Family::Gaussian { dim: 1 };
        let r = fit(&d, &f, 1, &s, &FitConfig::default()).unwrap();
        let step = em_step(&r.params, &d, &s, &FitConfig::default()).unwrap();
        let (ComponentParams::Gaussian(a), ComponentParams::Gaussian(b)) =
            (&step.params.components()[0], &r.params.components()[0])
        else {
            panic!()
        };
        assert!((a.mean()[0] - b.mean()[0]).abs() < 1e-12);
        assert!((a.covariance()[(0, 0)] - b.covariance()[(0, 0)]).abs() < 1e-12);
        assert!((step.risk - r.risk).abs() < 1e-12);
    }

    #[test]
    fn far_component_is_reseeded() {
        let d = uni(&[-1.0, -0.5, 0.0, 0.2, 0.5, 1.0, 1.5, 2.0]);
        let s = ParamSpace::default();
        let psi = MixtureParams::new(
            vec![1.0 - 1e-8, 1e-8],
            vec![
                GaussianParams::univariate(0.4, 1.0).unwrap().into(),
                GaussianParams::univariate(1e5, 1.0).unwrap().into(),
            ],
            s,
        )
        .unwrap();
        let step = em_step(&psi, &d, &s, &FitConfig::default()).unwrap();
        assert!(step.reseeded);
        assert_eq!(step.params.k(), 2);
        let ComponentParams::Gaussian(g) = &step.params.components()[1] else { panic!() };
        assert!(g.mean()[0].abs() <= 2.0, "re-seeded at a data point");
        assert!(step.params.log_density(Obs::Point(&[0.0])).unwrap().is_finite());
    }

    #[test]
    fn weight_floor_applies() {
        let (w, floored) = floor_weights(vec![0.0, 1.0], 1e-3);
        assert!(floored);
        assert!((w[0] - 1e-3 / 1.001).abs() < 1e-15);
        let (w, floored) = floor_weights(vec![2.0, 2.0], 1e-3);
        assert!(!floored);
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn duplicated_component_keeps_risk() {
        let d = uni(&[0.1, 0.4, 2.2, 3.0, 3.3]);
        let m = MixtureParams::new(
            vec![0.4, 0.6],
            vec![
                LaplaceParams::new(0.2, 2.0).unwrap().into(),
                LaplaceParams::new(3.0, 1.5).unwrap().into(),
            ],
            ParamSpace::default(),
        )
        .unwrap();
        let dup = duplicate_heaviest(&m);
        assert_eq!(dup.k(), 3);
        assert_eq!(dup.weights(), &[0.4, 0.3, 0.3]);
        let a = m.empirical_risk(&d).unwrap();
        let b = dup.empirical_risk(&d).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}
