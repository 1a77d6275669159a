//! The `mixorder` command line.
//!
//! Exit codes: 0 on success, 1 when fitting fails numerically, 2 on usage or
//! input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::criteria::{eps_thresholds, nu_thresholds, penalty, CriterionSpec, DimConvention, ThresholdReport};
use crate::data::Dataset;
use crate::densities::{Family, ParamSpace};
use crate::error::{Error, Result};
use crate::fitter::{fit, FitConfig, FitResult, InitStrategy};
use crate::io::{points_from_table, read_rows, read_table, regression_from_table, write_rows};
use crate::selector::{criterion_path, select, SelectionReport};
use crate::simulation::{run_consistency_detailed, scenario, SimulationConfig};

#[derive(Debug, Parser)]
#[command(name = "mixorder", version, about = "Order selection for finite mixture models")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a k-component mixture and print it as JSON.
    Fit(FitArgs),
    /// Select the number of components.
    Select(SelectArgs),
    /// Run a Monte Carlo consistency study.
    Simulate(SimulateArgs),
    /// Sample sizes below which ν-BIC / ε-BIC barely differ from BIC.
    Thresholds(ThresholdArgs),
    /// Penalty values over a grid of orders and sample sizes.
    PenaltyTable(PenaltyTableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Gaussian,
    Laplace,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionName {
    Aic,
    Bic,
    NuBic,
    EpsBic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitName {
    GreedySeed,
    RandomResponsibility,
}

impl From<InitName> for InitStrategy {
    fn from(v: InitName) -> Self {
        match v {
            InitName::GreedySeed => InitStrategy::GreedySeed,
            InitName::RandomResponsibility => InitStrategy::RandomResponsibility,
        }
    }
}

/// Options read from `--config`; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub family: Option<FamilyName>,
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub criterion: Option<CriterionName>,
    pub nu: Option<u32>,
    pub eps: Option<f64>,
    pub dim_convention: Option<DimConvention>,
    pub response: Option<String>,
    pub intercept: Option<bool>,
    pub conditional: Option<bool>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub rel_tol: Option<f64>,
    pub weight_floor: Option<f64>,
    pub init: Option<InitStrategy>,
    pub b: Option<f64>,
    pub c: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(toml::from_str(&fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// CSV input with a header row.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// TOML file with default values for any of these options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// Response column for the regression family.
    #[arg(long)]
    pub response: Option<String>,
    /// Do not prepend an intercept column to the covariates.
    #[arg(long)]
    pub no_intercept: bool,
    /// Root seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub weight_floor: Option<f64>,
    #[arg(long, value_enum)]
    pub init: Option<InitName>,
    /// Bound on location parameters.
    #[arg(long)]
    pub b: Option<f64>,
    /// Bound on scale parameters, and on their reciprocals.
    #[arg(long)]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of components.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Largest order considered.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionName>,
    /// ν for nu-bic.
    #[arg(long)]
    pub nu: Option<u32>,
    /// ε for eps-bic.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_enum)]
    pub dim_convention: Option<DimConventionName>,
    /// Conditional likelihood of the response given covariates (regression).
    #[arg(long)]
    pub conditional: bool,
    /// Also write the (k, risk, penalty, value) path as CSV.
    #[arg(long)]
    pub path_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DimConventionName {
    Paper,
    Free,
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["scenario", "config"])))]
pub struct SimulateArgs {
    /// One of the built-in scenarios.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Simulation design as TOML (or JSON, by extension).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Accuracy table CSV.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Per-replicate records on stderr, one JSON object per line.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Args)]
#[command(group(clap::ArgGroup::new("which").required(true).multiple(true).args(["nu", "eps"])))]
pub struct ThresholdArgs {
    #[arg(long)]
    pub nu: Vec<u32>,
    #[arg(long)]
    pub eps: Vec<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PenaltyTableArgs {
    /// Orders, as `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "1..5")]
    pub k: String,
    /// Sample sizes, comma separated.
    #[arg(long, default_value = "100,1000")]
    pub n: String,
    /// Repeat for several criteria.
    #[arg(long, value_enum, default_values_t = [CriterionName::Bic])]
    pub criterion: Vec<CriterionName>,
    #[arg(long, default_value_t = 3)]
    pub nu: u32,
    #[arg(long, default_value_t = 0.02)]
    pub eps: f64,
    /// Free parameters per component.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, value_enum)]
    pub dim_convention: Option<DimConventionName>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// `fit` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub data_digest: String,
    pub fit_config: FitConfig,
    pub space: ParamSpace,
    pub result: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdOutput {
    pub schema_version: u32,
    pub reports: Vec<ThresholdReport>,
}

/// One `penalty-table` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyRow {
    pub criterion: String,
    pub k: usize,
    pub m: usize,
    pub n: u64,
    pub penalty: f64,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    path.as_deref().map(RunConfig::load).transpose().map(Option::unwrap_or_default)
}

fn fit_config(c: &CommonArgs, f: &RunConfig) -> FitConfig {
    let d = FitConfig::default();
    FitConfig {
        max_iters: c.max_iters.or(f.max_iters).unwrap_or(d.max_iters),
        rel_tol: c.rel_tol.or(f.rel_tol).unwrap_or(d.rel_tol),
        restarts: c.restarts.or(f.restarts).unwrap_or(d.restarts),
        weight_floor: c.weight_floor.or(f.weight_floor).unwrap_or(d.weight_floor),
        init_strategy: c.init.map(Into::into).or(f.init).unwrap_or(d.init_strategy),
        base_seed: c.seed.or(f.seed).unwrap_or(0),
        record_trace: false,
    }
}

fn space(c: &CommonArgs, f: &RunConfig) -> Result<ParamSpace> {
    let d = ParamSpace::default();
    ParamSpace::new(c.b.or(f.b).unwrap_or(d.b()), c.c.or(f.c).unwrap_or(d.c()))
}

/// Reads the input CSV and turns it into data for the requested family.
fn load_data(c: &CommonArgs, f: &RunConfig, force_regression: bool) -> Result<(Dataset, Family)> {
    let path = c.input.clone().or_else(|| f.input.clone()).ok_or_else(|| usage("--input is required"))?;
    let table = read_table(fs::File::open(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?)?;
    let family = match c.family.or(f.family) {
        Some(name) => name,
        None if force_regression => FamilyName::Regression,
        None => return Err(usage("--family is required")),
    };
    if force_regression && family != FamilyName::Regression {
        return Err(usage("--conditional needs --family regression"));
    }
    match family {
        FamilyName::Gaussian => {
            let d = points_from_table(&table)?;
            let dim = d.dim();
            Ok((d, Family::Gaussian { dim }))
        }
        FamilyName::Laplace => {
            if table.header.len() != 1 {
                return Err(usage(format!("laplace needs one column, found {}", table.header.len())));
            }
            Ok((points_from_table(&table)?, Family::Laplace))
        }
        FamilyName::Regression => {
            let response = c
                .response
                .clone()
                .or_else(|| f.response.clone())
                .ok_or_else(|| usage("--response is required for regression"))?;
            let intercept = !c.no_intercept && f.intercept.unwrap_or(true);
            let (d, _) = regression_from_table(&table, &response, intercept)?;
            let p = d.dim();
            Ok((d, Family::Regression { covariates: p }))
        }
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

pub fn cmd_fit(args: &FitArgs) -> Result<FitReport> {
    let f = load_config(&args.common.config)?;
    let (data, family) = load_data(&args.common, &f, false)?;
    let k = args.k.or(f.k).ok_or_else(|| usage("--k is required"))?;
    let cfg = fit_config(&args.common, &f);
    let space = space(&args.common, &f)?;
    let result = fit(&data, &family, k, &space, &cfg)?;
    Ok(FitReport {
        schema_version: 1,
        seed: cfg.base_seed,
        n: data.len(),
        k,
        data_digest: data.digest(),
        fit_config: cfg,
        space,
        result,
    })
}

fn criterion_spec(
    name: CriterionName,
    nu: Option<u32>,
    eps: Option<f64>,
    convention: Option<DimConvention>,
) -> Result<CriterionSpec> {
    let spec = match name {
        CriterionName::Aic => CriterionSpec::aic(),
        CriterionName::Bic => CriterionSpec::bic(),
        CriterionName::NuBic => CriterionSpec::nu_bic(nu.ok_or_else(|| usage("--criterion nu-bic needs --nu"))?)?,
        CriterionName::EpsBic => {
            CriterionSpec::eps_bic(eps.ok_or_else(|| usage("--criterion eps-bic needs --eps"))?)?
        }
    };
    Ok(spec.with_dim_convention(convention.unwrap_or_default()))
}

fn convention(v: Option<DimConventionName>) -> Option<DimConvention> {
    v.map(|c| match c {
        DimConventionName::Paper => DimConvention::Paper,
        DimConventionName::Free => DimConvention::Free,
    })
}

pub fn cmd_select(args: &SelectArgs) -> Result<SelectionReport> {
    let f = load_config(&args.common.config)?;
    let conditional = args.conditional || f.conditional.unwrap_or(false);
    let (data, family) = load_data(&args.common, &f, conditional)?;
    let k_max = args.kmax.or(f.k_max).ok_or_else(|| usage("--kmax is required"))?;
    let name = args.criterion.or(f.criterion).unwrap_or(CriterionName::Bic);
    let spec = criterion_spec(
        name,
        args.nu.or(f.nu),
        args.eps.or(f.eps),
        convention(args.dim_convention).or(f.dim_convention),
    )?;
    let cfg = fit_config(&args.common, &f);
    let space = space(&args.common, &f)?;
    let report = select(&data, &family, k_max, &spec, &cfg, &space)?;
    if let Some(p) = &args.path_csv {
        write_rows(fs::File::create(p)?, &criterion_path(&report))?;
    }
    Ok(report)
}

pub fn load_simulation_config(path: &Path) -> Result<SimulationConfig> {
    let text = fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&text)?)
    } else {
        Ok(toml::from_str(&text)?)
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Vec<u8>> {
    let mut cfg = match (&args.scenario, &args.config) {
        (Some(name), _) => scenario(name)?,
        (None, Some(path)) => load_simulation_config(path)?,
        (None, None) => return Err(usage("--scenario or --config is required")),
    };
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    let outcome = run_consistency_detailed(&cfg)?;
    if args.verbose {
        let mut err = std::io::stderr().lock();
        for rec in &outcome.records {
            serde_json::to_writer(&mut err, rec)?;
            err.write_all(b"\n")?;
        }
    }
    if let Some(p) = &args.out {
        write_rows(fs::File::create(p)?, &outcome.table.rows)?;
    }
    json_bytes(&outcome.table)
}

pub fn cmd_thresholds(args: &ThresholdArgs) -> Result<ThresholdOutput> {
    let mut reports = Vec::new();
    for &nu in &args.nu {
        reports.push(nu_thresholds(nu)?);
    }
    for &eps in &args.eps {
        reports.push(eps_thresholds(eps)?);
    }
    Ok(ThresholdOutput { schema_version: 1, reports })
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| usage(format!("bad {what} value `{x}`"))))
        .collect()
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_orders(s: &str) -> Result<Vec<usize>> {
    let ks = match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| usage(format!("bad order range `{s}`")))?;
            let b: usize = b.trim().parse().map_err(|_| usage(format!("bad order range `{s}`")))?;
            (a..=b).collect()
        }
        None => parse_list(s, "order")?,
    };
    if ks.is_empty() || ks.contains(&0) {
        return Err(usage(format!("orders must be ≥ 1 and non-empty: `{s}`")));
    }
    Ok(ks)
}

pub fn cmd_penalty_table(args: &PenaltyTableArgs) -> Result<Vec<PenaltyRow>> {
    let ks = parse_orders(&args.k)?;
    let ns: Vec<u64> = parse_list(&args.n, "sample size")?;
    if ns.contains(&0) {
        return Err(usage("sample sizes must be ≥ 1"));
    }
    let mut rows = Vec::new();
    for &name in &args.criterion {
        let spec = criterion_spec(name, Some(args.nu), Some(args.eps), convention(args.dim_convention))?;
        spec.validate(*ks.iter().max().expect("non-empty"), args.m)?;
        let label = spec.label();
        for &k in &ks {
            for &n in &ns {
                rows.push(PenaltyRow { criterion: label.clone(), k, m: args.m, n, penalty: penalty(&spec, k, args.m, n) });
            }
        }
    }
    Ok(rows)
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => emit(&a.common.out, &json_bytes(&cmd_fit(a)?)?),
        Command::Select(a) => emit(&a.common.out, &json_bytes(&cmd_select(a)?)?),
        Command::Simulate(a) => emit(&None, &cmd_simulate(a)?),
        Command::Thresholds(a) => emit(&a.out, &json_bytes(&cmd_thresholds(a)?)?),
        Command::PenaltyTable(a) => {
            let mut buf = Vec::new();
            write_rows(&mut buf, &cmd_penalty_table(a)?)?;
            emit(&a.out, &buf)
        }
    }
}

/// Round-trips a CSV produced by this tool: parse, then serialize again.
pub fn reserialize_penalty_table(csv: &[u8]) -> Result<Vec<u8>> {
    let rows: Vec<PenaltyRow> = read_rows(csv)?;
    let mut out = Vec::new();
    write_rows(&mut out, &rows)?;
    Ok(out)
}

/// Entry point for the binary.
pub fn run(cli: Cli) -> ExitCode {
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 1 } else { 2 })
        }
    }
}
