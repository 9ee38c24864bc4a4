//! Command-line front end. Every command writes its primary output plus a
//! JSON manifest recording the resolved configuration.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::blasso::{run_blasso, LambdaPrior, LassoHyper};
use crate::blogistic::{run_blogistic, LogisticPrior, DEFAULT_PRIOR_SCALE};
use crate::design::{Features, Generator, TaskKind, DEFAULT_CLASSIFICATION_DIM, DEFAULT_REGRESSION_SIGMA};
use crate::error::{Error, Result};
use crate::eval::{self, CurveMode, LogRiskMode, Method, MethodSettings};
use crate::horseshoe::{run_horseshoe, HorseshoeHyper};
use crate::io;
use crate::posterior::{ChainConfig, PosteriorSamples};
use crate::rng::RngHandle;
use crate::safebayes::{self, ChainMode, EtaGrid, ModelSpec, SafeBayesConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "genbayes", version, about = "Tempered Bayesian regression toolkit")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "GENBAYES_THREADS")]
    pub threads: Option<usize>,

    /// Record wall-clock time in manifests (makes them non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a synthetic dataset to CSV.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Run a sampler on a CSV dataset.
    #[command(subcommand)]
    Fit(FitCmd),
    /// Select a learning rate by SafeBayes.
    Safebayes(SafeBayesArgs),
    /// Replicated risk curves over training sizes.
    Risk(RiskArgs),
    /// Predictive-variance curve from saved lasso draws.
    Predvar(PredvarArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum SimulateCmd {
    RegressionWrong {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_REGRESSION_SIGMA)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    ClassificationWrong {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_CLASSIFICATION_DIM)]
        p: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    LogisticWell {
        #[arg(long)]
        n: usize,
        /// Comma-separated true coefficients.
        #[arg(long, value_delimiter = ',', default_value = "4")]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum FitCmd {
    Blasso(FitArgs),
    Blogistic(FitArgs),
    Horseshoe(FitArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 3000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Fourier basis size (odd); raw covariates when absent.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// fixed:<lambda> or gamma:<r>,<delta>.
    #[arg(long, default_value = "gamma:1,1")]
    pub lambda_prior: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Logistic prior covariance scale (prior N(0, scale·I)).
    #[arg(long, default_value_t = DEFAULT_PRIOR_SCALE)]
    pub prior_scale: f64,
    /// Rescale covariates to [-1, 1] on ingestion.
    #[arg(long)]
    pub rescale: bool,
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Blasso,
    Blogistic,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SafeBayesArgs {
    #[arg(long, value_enum, default_value = "blasso")]
    pub model: ModelName,
    #[arg(long)]
    pub data: PathBuf,
    /// dyadic:<kstep>,<kmax> or list:<v1,v2,...>.
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value = "gamma:1,1")]
    pub lambda_prior: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = DEFAULT_PRIOR_SCALE)]
    pub prior_scale: f64,
    #[arg(long, default_value_t = 100)]
    pub draws_per_step: usize,
    #[arg(long, default_value_t = 200)]
    pub burn_per_step: usize,
    #[arg(long, default_value_t = 1)]
    pub skip_initial: usize,
    #[arg(long, value_enum, default_value = "warm")]
    pub mode: ChainModeArg,
    #[arg(long)]
    pub rescale: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional long-format CSV of per-step losses.
    #[arg(long)]
    pub per_step_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainModeArg {
    Warm,
    Cold,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveModeArg {
    Nested,
    Fresh,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogModeArg {
    Mixture,
    PlugIn,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RiskArgs {
    /// Comma-separated methods: blasso@<eta>, horseshoe, blogistic@<eta>.
    #[arg(long, value_delimiter = ',', required = true)]
    pub methods: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "25,50,100")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 25)]
    pub replications: usize,
    /// Noise scale of the wrong-model generator.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Covariate dimension for classification data.
    #[arg(long, default_value_t = DEFAULT_CLASSIFICATION_DIM)]
    pub p: usize,
    /// Use well-specified logistic data with these coefficients instead.
    #[arg(long, value_delimiter = ',')]
    pub logistic_beta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 101)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub test_points: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value = "gamma:1,1")]
    pub lambda_prior: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = DEFAULT_PRIOR_SCALE)]
    pub prior_scale: f64,
    #[arg(long, value_enum, default_value = "nested")]
    pub curve: CurveModeArg,
    #[arg(long, value_enum, default_value = "mixture")]
    pub log_mode: LogModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredvarArgs {
    /// Output prefix of a previous `fit blasso` or `fit horseshoe` run.
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub grid_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub grid_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::ParameterDomain(_) => 2,
        Error::Io { .. } | Error::Data { .. } => 3,
        Error::Numeric(_) | Error::LinearAlgebra { .. } | Error::Shape(_) => 4,
        Error::TaskMismatch { .. } => 5,
    }
}

struct Manifest<'a> {
    command: &'a str,
    config: Value,
    seed: u64,
    timing: Option<Instant>,
}

impl Manifest<'_> {
    fn finish(&self, results: Value) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "results": results,
            "wall_time_s": self.timing.map(|t| t.elapsed().as_secs_f64()),
            "version": VERSION,
        })
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("config is serializable")
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("--{name} must be positive, got {v}")))
    }
}

fn at_least_one(name: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::config(format!("--{name} must be at least 1")))
    }
}

/// Parse `fixed:<v>` or `gamma:<r>,<d>`.
pub fn parse_lambda_prior(s: &str) -> Result<LambdaPrior> {
    let bad = || Error::config(format!("malformed lambda prior '{s}'"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = rest
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match (kind, nums.as_slice()) {
        ("fixed", [lambda]) => Ok(LambdaPrior::Fixed { lambda: *lambda }),
        ("gamma", [r, delta]) => Ok(LambdaPrior::GammaOnLambdaSq { r: *r, delta: *delta }),
        _ => Err(bad()),
    }
}

/// Parse `dyadic:<kstep>,<kmax>` or `list:<v1,...>`.
pub fn parse_grid(s: &str) -> Result<EtaGrid> {
    let bad = || Error::config(format!("malformed grid '{s}'"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "dyadic" => {
            let ks: Vec<u32> = rest
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            match ks.as_slice() {
                [step, max] => EtaGrid::dyadic(*step, *max),
                _ => Err(bad()),
            }
        }
        "list" => {
            if rest.trim().is_empty() {
                return Err(Error::config("grid list is empty"));
            }
            let vs: Vec<f64> = rest
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            EtaGrid::explicit(vs)
        }
        _ => Err(bad()),
    }
}

fn features_for(k: Option<usize>) -> Result<Features> {
    match k {
        Some(k) => Ok(Features::fourier(crate::design::FourierBasis::new(k)?)),
        None => Ok(Features::Raw),
    }
}

fn lasso_hyper(alpha: f64, gamma: f64, lambda_prior: &str) -> Result<LassoHyper> {
    let hyper = LassoHyper {
        alpha,
        gamma,
        lambda_prior: parse_lambda_prior(lambda_prior)?,
    };
    hyper.validate()?;
    Ok(hyper)
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let timing = cli.timing.then(Instant::now);
    let go = || match cli.command {
        Command::Simulate(cmd) => simulate(cmd, timing),
        Command::Fit(cmd) => fit(cmd, timing),
        Command::Safebayes(a) => safebayes_cmd(a, timing),
        Command::Risk(a) => risk(a, timing),
        Command::Predvar(a) => predvar(a, timing),
    };
    match cli.threads {
        Some(t) => {
            at_least_one("threads", t)?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::config(e.to_string()))?
                .install(go)
        }
        None => go(),
    }
}

fn simulate(cmd: SimulateCmd, timing: Option<Instant>) -> Result<()> {
    let config = to_value(&cmd);
    let (generator, n, seed, out) = match cmd {
        SimulateCmd::RegressionWrong { n, sigma, seed, out } => {
            (Generator::RegressionWrong { sigma }, n, seed, out)
        }
        SimulateCmd::ClassificationWrong { n, p, sigma, seed, out } => {
            at_least_one("p", p)?;
            (Generator::ClassificationWrong { p, sigma }, n, seed, out)
        }
        SimulateCmd::LogisticWell { n, beta, seed, out } => {
            (Generator::LogisticWell { beta }, n, seed, out)
        }
    };
    at_least_one("n", n)?;
    let data = generator.simulate(n, &mut RngHandle::new(seed, 0))?;
    io::write_dataset(&out, &data)?;
    let m = Manifest { command: "simulate", config, seed, timing };
    io::write_json(
        &manifest_path(&out),
        &m.finish(json!({ "rows": data.len(), "output": out })),
    )
}

fn summary(samples: &PosteriorSamples, draws_path: &Path) -> Value {
    json!({
        "samples": io::SamplesInfo {
            features: samples.features,
            intercept: samples.intercept,
            meta: samples.meta.clone(),
        },
        "draws": samples.len(),
        "beta_mean": io::vec_of(&samples.beta_mean()),
        "beta_sd": io::vec_of(&samples.beta_sd()),
        "sigma2_mean": samples.sigma2_mean(),
        "draws_path": draws_path,
    })
}

fn fit(cmd: FitCmd, timing: Option<Instant>) -> Result<()> {
    let (name, a) = match &cmd {
        FitCmd::Blasso(a) => ("blasso", a),
        FitCmd::Blogistic(a) => ("blogistic", a),
        FitCmd::Horseshoe(a) => ("horseshoe", a),
    };
    positive("eta", a.eta)?;
    let chain = ChainConfig::new(a.iters, a.burnin, a.thin)?;
    let features = features_for(a.k)?;
    let mut rng = RngHandle::new(a.seed, 0);
    let samples = match cmd {
        FitCmd::Blasso(ref a) => {
            let data = io::ingest_csv(&a.data, TaskKind::Regression, a.rescale)?;
            let hyper = lasso_hyper(a.alpha, a.gamma, &a.lambda_prior)?;
            run_blasso(&data, features, &hyper, a.eta, &chain, &mut rng)?
        }
        FitCmd::Horseshoe(ref a) => {
            let data = io::ingest_csv(&a.data, TaskKind::Regression, a.rescale)?;
            let hyper = HorseshoeHyper { alpha: a.alpha, gamma: a.gamma };
            run_horseshoe(&data, features, &hyper, &chain, &mut rng)?
        }
        FitCmd::Blogistic(ref a) => {
            positive("prior-scale", a.prior_scale)?;
            let data = io::ingest_csv(&a.data, TaskKind::Classification, a.rescale)?;
            let prior = LogisticPrior::isotropic(features.dim(data.dim()), a.prior_scale)?;
            run_blogistic(&data, features, &prior, a.eta, &chain, &mut rng)?
        }
    };
    let draws_path = with_suffix(&a.out_prefix, "_draws.csv");
    io::write_draws(&draws_path, &samples)?;
    let mut config = to_value(a);
    config["sampler"] = json!(name);
    let m = Manifest { command: "fit", config, seed: a.seed, timing };
    io::write_json(
        &with_suffix(&a.out_prefix, "_summary.json"),
        &m.finish(summary(&samples, &draws_path)),
    )
}

fn safebayes_cmd(a: SafeBayesArgs, timing: Option<Instant>) -> Result<()> {
    let grid = parse_grid(&a.grid)?;
    let cfg = SafeBayesConfig {
        draws_per_step: a.draws_per_step,
        burn_per_step: a.burn_per_step,
        skip_initial: a.skip_initial,
        mode: match a.mode {
            ChainModeArg::Warm => ChainMode::Warm,
            ChainModeArg::Cold => ChainMode::Cold,
        },
    };
    let features = features_for(a.k)?;
    let (data, model) = match a.model {
        ModelName::Blasso => (
            io::ingest_csv(&a.data, TaskKind::Regression, a.rescale)?,
            ModelSpec::Lasso {
                features,
                hyper: lasso_hyper(a.alpha, a.gamma, &a.lambda_prior)?,
            },
        ),
        ModelName::Blogistic => {
            positive("prior-scale", a.prior_scale)?;
            let data = io::ingest_csv(&a.data, TaskKind::Classification, a.rescale)?;
            let prior = LogisticPrior::isotropic(features.dim(data.dim()), a.prior_scale)?;
            (data, ModelSpec::Logistic { features, prior })
        }
    };
    let result = safebayes::safe_bayes(&data, &grid, &model, &cfg, &RngHandle::new(a.seed, 0))?;
    if let (Some(path), Some(per_step)) = (&a.per_step_out, &result.per_step) {
        let mut rows = Vec::new();
        for (&(eta, _), steps) in result.s.iter().zip(per_step) {
            for (i, &l) in steps.iter().enumerate() {
                if !l.is_nan() {
                    rows.push(vec![io::fmt(eta), (i + 1).to_string(), io::fmt(l)]);
                }
            }
        }
        io::write_csv(path, &["eta", "i", "loss"], &rows)?;
    }
    let s: serde_json::Map<String, Value> = result
        .s
        .iter()
        .map(|&(eta, v)| (io::fmt(eta), json!(v)))
        .collect();
    let results = json!({
        "eta_hat": result.eta_hat,
        "grid": grid.values(),
        "s": s,
    });
    let m = Manifest { command: "safebayes", config: to_value(&a), seed: a.seed, timing };
    io::write_json(&a.out, &m.finish(results))
}

fn risk(a: RiskArgs, timing: Option<Instant>) -> Result<()> {
    let methods: Vec<Method> = a.methods.iter().map(|s| Method::parse(s)).collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::config("--methods is empty"));
    }
    at_least_one("replications", a.replications)?;
    at_least_one("test-points", a.test_points)?;
    let kind = methods[0].kind();
    let generator = match (kind, &a.logistic_beta) {
        (TaskKind::Regression, _) => Generator::RegressionWrong {
            sigma: a.sigma.unwrap_or(DEFAULT_REGRESSION_SIGMA),
        },
        (TaskKind::Classification, Some(beta)) => Generator::LogisticWell { beta: beta.clone() },
        (TaskKind::Classification, None) => Generator::ClassificationWrong {
            p: a.p,
            sigma: a.sigma.unwrap_or(1.0),
        },
    };
    let features = match kind {
        TaskKind::Regression => features_for(Some(a.k))?,
        TaskKind::Classification => Features::Raw,
    };
    positive("prior-scale", a.prior_scale)?;
    let settings = MethodSettings {
        features,
        lasso: lasso_hyper(a.alpha, a.gamma, &a.lambda_prior)?,
        horseshoe: HorseshoeHyper { alpha: a.alpha, gamma: a.gamma },
        prior_scale: a.prior_scale,
        chain: ChainConfig::new(a.iters, a.burnin, a.thin)?,
        log_mode: match a.log_mode {
            LogModeArg::Mixture => LogRiskMode::Mixture,
            LogModeArg::PlugIn => LogRiskMode::PlugIn,
        },
    };
    let mode = match a.curve {
        CurveModeArg::Nested => CurveMode::Nested,
        CurveModeArg::Fresh => CurveMode::Fresh,
    };
    if a.replications == 1 {
        eprintln!("warning: one replication, standard errors reported as 0");
    }
    let rows = eval::risk_curve(
        &generator,
        &methods,
        &settings,
        &a.n_list,
        a.replications,
        a.test_points,
        mode,
        &RngHandle::new(a.seed, 0),
    )?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.method.clone(),
                io::fmt(r.risk.value),
                io::fmt(r.risk.std_error),
            ]
        })
        .collect();
    io::write_csv(&a.out, &["n", "method", "risk", "se"], &table)?;
    let mut config = to_value(&a);
    config["generator"] = to_value(&generator);
    let m = Manifest { command: "risk", config, seed: a.seed, timing };
    io::write_json(&manifest_path(&a.out), &m.finish(json!({ "rows": rows.len(), "output": a.out })))
}

fn predvar(a: PredvarArgs, timing: Option<Instant>) -> Result<()> {
    positive("step", a.step)?;
    let summary_path = with_suffix(&a.samples, "_summary.json");
    let text = std::fs::read_to_string(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    let summary: Value = serde_json::from_str(&text).map_err(|e| Error::Data {
        path: summary_path.display().to_string(),
        row: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let info: io::SamplesInfo = serde_json::from_value(summary["results"]["samples"].clone())
        .map_err(|e| Error::Data {
            path: summary_path.display().to_string(),
            row: 0,
            column: 0,
            message: format!("missing sample metadata: {e}"),
        })?;
    let samples = io::read_draws(&with_suffix(&a.samples, "_draws.csv"), &info)?;
    let xs = eval::grid(a.grid_min, a.grid_max, a.step)?;
    let curve = eval::predictive_variance_curve(&samples, &xs)?;
    let rows: Vec<Vec<String>> = xs
        .iter()
        .zip(&curve)
        .map(|(&x, &v)| vec![io::fmt(x), io::fmt(v)])
        .collect();
    io::write_csv(&a.out, &["x", "variance"], &rows)?;
    let m = Manifest { command: "predvar", config: to_value(&a), seed: info.meta.seed, timing };
    io::write_json(&manifest_path(&a.out), &m.finish(json!({ "points": xs.len(), "output": a.out })))
}
