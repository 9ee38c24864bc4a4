//! Risk estimation, predictive-variance curves and central-condition checks.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blasso::{run_blasso, LassoHyper};
use crate::blogistic::{logistic, predict_blogistic, run_blogistic, LogisticPrior};
use crate::design::{Dataset, Features, TaskKind};
use crate::error::{Error, Result};
use crate::horseshoe::{run_horseshoe, HorseshoeHyper};
use crate::posterior::{ChainConfig, PosteriorSamples};
use crate::rng::RngHandle;

const TRAIN_STREAM: u64 = 1;
const FIT_STREAM: u64 = 2;
const TEST_STREAM: u64 = 3;

/// Anything that can draw a fresh sample of a given size.
pub trait DataSource: Sync {
    fn simulate(&self, n: usize, rng: &mut RngHandle) -> Result<Dataset>;
}

impl DataSource for crate::design::Generator {
    fn simulate(&self, n: usize, rng: &mut RngHandle) -> Result<Dataset> {
        crate::design::Generator::simulate(self, n, rng)
    }
}

impl<F> DataSource for F
where
    F: Fn(usize, &mut RngHandle) -> Result<Dataset> + Sync,
{
    fn simulate(&self, n: usize, rng: &mut RngHandle) -> Result<Dataset> {
        self(n, rng)
    }
}

/// Monte Carlo risk with its standard error over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub value: f64,
    /// Sample SD / √replications; 0 by convention for one replication.
    pub std_error: f64,
    pub replications: usize,
    pub per_replication: Vec<f64>,
}

impl RiskEstimate {
    pub fn from_replications(values: Vec<f64>) -> Result<Self> {
        let r = values.len();
        if r == 0 {
            return Err(Error::config("risk estimate needs at least one replication"));
        }
        let mean = values.iter().sum::<f64>() / r as f64;
        let std_error = if r > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
            (var / r as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            value: mean,
            std_error,
            replications: r,
            per_replication: values,
        })
    }
}

/// Squared error of a point prediction.
pub fn squared_error(y: f64, prediction: f64) -> f64 {
    (y - prediction).powi(2)
}

/// −log p̂(y | x) for a predicted probability p̂ = P(Y = 1 | x).
pub fn log_loss(y: f64, prob_one: f64) -> f64 {
    let p = if y == 1.0 { prob_one } else { 1.0 - prob_one };
    -p.max(f64::MIN_POSITIVE).ln()
}

fn replicated_risk<F, P>(
    source: &dyn DataSource,
    train_n: usize,
    replications: usize,
    points_per_rep: usize,
    rng: &RngHandle,
    fit: F,
    loss: fn(f64, f64) -> f64,
) -> Result<RiskEstimate>
where
    F: Fn(&Dataset, &mut RngHandle) -> Result<P> + Sync,
    P: Fn(&[f64]) -> Result<f64>,
{
    if replications == 0 {
        return Err(Error::config("replications must be at least 1"));
    }
    if points_per_rep == 0 {
        return Err(Error::config("test points per replication must be at least 1"));
    }
    let values: Vec<Result<f64>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let rep = rng.derive(r);
            let train = source.simulate(train_n, &mut rep.derive(TRAIN_STREAM))?;
            let predictor = fit(&train, &mut rep.derive(FIT_STREAM))?;
            let test = source.simulate(points_per_rep, &mut rep.derive(TEST_STREAM))?;
            mean_test_loss(&test, &predictor, loss)
        })
        .collect();
    RiskEstimate::from_replications(values.into_iter().collect::<Result<Vec<_>>>()?)
}

fn mean_test_loss<P>(test: &Dataset, predictor: &P, loss: fn(f64, f64) -> f64) -> Result<f64>
where
    P: Fn(&[f64]) -> Result<f64>,
{
    let mut acc = 0.0;
    for i in 0..test.len() {
        acc += loss(test.y[i], predictor(&test.row(i))?);
    }
    Ok(acc / test.len() as f64)
}

/// Square-risk of a fitted point predictor: per replication, fit on a
/// fresh training sample and average the squared error over a fresh test
/// sample from the same source.
pub fn square_risk<F, P>(
    source: &dyn DataSource,
    train_n: usize,
    replications: usize,
    points_per_rep: usize,
    rng: &RngHandle,
    fit: F,
) -> Result<RiskEstimate>
where
    F: Fn(&Dataset, &mut RngHandle) -> Result<P> + Sync,
    P: Fn(&[f64]) -> Result<f64>,
{
    replicated_risk(source, train_n, replications, points_per_rep, rng, fit, squared_error)
}

/// Log-risk of a fitted predictive probability P(Y = 1 | x).
pub fn log_risk<F, P>(
    source: &dyn DataSource,
    train_n: usize,
    replications: usize,
    points_per_rep: usize,
    rng: &RngHandle,
    fit: F,
) -> Result<RiskEstimate>
where
    F: Fn(&Dataset, &mut RngHandle) -> Result<P> + Sync,
    P: Fn(&[f64]) -> Result<f64>,
{
    replicated_risk(source, train_n, replications, points_per_rep, rng, fit, log_loss)
}

/// {−1.00, −0.99, …, 1.00}.
pub fn default_prediction_grid() -> Vec<f64> {
    grid(-1.0, 1.0, 0.01).expect("static grid is valid")
}

/// Evenly spaced points from `min` to `max` inclusive (up to rounding).
pub fn grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::config(format!("grid step must be positive, got {step}")));
    }
    if !(max >= min) {
        return Err(Error::config(format!("grid max {max} is below min {min}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| min + i as f64 * step).collect())
}

/// Var̂(Y | x) = mean σ² + spread of the per-draw means xᵀβ^{(k)}.
pub fn predictive_variance_curve(samples: &PosteriorSamples, x_grid: &[f64]) -> Result<Vec<f64>> {
    samples.check_nonempty()?;
    let sigma2_bar = samples
        .sigma2_mean()
        .ok_or_else(|| Error::config("samples carry no noise-variance draws"))?;
    let m = samples.len() as f64;
    x_grid
        .iter()
        .map(|&x| {
            let row = samples.expand(&[x])?;
            let means: DVector<f64> = samples.linear_predictions(&row);
            let bar = means.mean();
            let spread = means.iter().map(|a| (a - bar).powi(2)).sum::<f64>() / m;
            Ok(sigma2_bar + spread)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CentralConditionMode {
    MonteCarlo,
    ClosedForm,
}

/// Value of E[exp(−η L_f)] and whether it is at most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralConditionReport {
    pub eta: f64,
    pub value: f64,
    /// Monte Carlo standard error (0 for closed forms).
    pub std_error: f64,
    /// `holds` is `value <= 1 + tolerance`.
    pub tolerance: f64,
    pub holds: bool,
    pub mode: CentralConditionMode,
}

/// Number of standard errors allowed above one in the Monte Carlo check.
pub const CC_MC_SE_MULTIPLIER: f64 = 3.0;

/// Slack for rounding in the closed-form check.
pub const CC_CLOSED_FORM_TOL: f64 = 1e-12;

/// Monte Carlo estimate of E[exp(−η L)] from draws of the excess loss L.
pub fn central_condition_mc(loss_gaps: &[f64], eta: f64) -> Result<CentralConditionReport> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!("eta must be positive, got {eta}")));
    }
    if loss_gaps.is_empty() {
        return Err(Error::config("no excess-loss samples"));
    }
    let m = loss_gaps.len() as f64;
    let shift = loss_gaps
        .iter()
        .map(|l| -eta * l)
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::Numeric("excess-loss samples are not finite".into()));
    }
    // exp(-ηL) = e^shift · w with w ≤ 1
    let w: Vec<f64> = loss_gaps.iter().map(|l| (-eta * l - shift).exp()).collect();
    let mean_w = w.iter().sum::<f64>() / m;
    let var_w = if w.len() > 1 {
        w.iter().map(|x| (x - mean_w).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    let scale = shift.exp();
    let value = scale * mean_w;
    let std_error = scale * (var_w / m).sqrt();
    let tolerance = CC_MC_SE_MULTIPLIER * std_error;
    Ok(CentralConditionReport {
        eta,
        value,
        std_error,
        tolerance,
        holds: value <= 1.0 + tolerance,
        mode: CentralConditionMode::MonteCarlo,
    })
}

/// Exponential-family closed form
/// E[(p_θ/p_θ*)^η] = exp(log E[e^{η(θ−θ*)Y}] + ηF(θ*) − ηF(θ)),
/// with `log_normalizer` = F and `mgf_log(λ)` = log E_P[e^{λY}].
pub fn expfam_cc_closed_form(
    theta: f64,
    theta_star: f64,
    eta: f64,
    log_normalizer: &dyn Fn(f64) -> f64,
    mgf_log: &dyn Fn(f64) -> f64,
) -> Result<CentralConditionReport> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!("eta must be positive, got {eta}")));
    }
    let lm = mgf_log(eta * (theta - theta_star));
    let value = if lm.is_finite() {
        (lm + eta * log_normalizer(theta_star) - eta * log_normalizer(theta)).exp()
    } else {
        f64::INFINITY
    };
    Ok(CentralConditionReport {
        eta,
        value,
        std_error: 0.0,
        tolerance: CC_CLOSED_FORM_TOL,
        holds: value.is_finite() && value <= 1.0 + CC_CLOSED_FORM_TOL,
        mode: CentralConditionMode::ClosedForm,
    })
}

/// Largest η for which the central condition holds in a Gaussian location
/// family with model variance σ*² under Gaussian data with variance σ².
pub fn gaussian_eta_bar(sigma_star2: f64, sigma2: f64) -> Result<f64> {
    if !(sigma_star2 > 0.0 && sigma2 > 0.0) {
        return Err(Error::domain(format!(
            "variances must be positive, got {sigma_star2} and {sigma2}"
        )));
    }
    Ok(sigma_star2 / sigma2)
}

/// Fitting procedure compared in a risk curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Blasso { eta: f64 },
    Horseshoe,
    Blogistic { eta: f64 },
}

impl Method {
    /// Parse `blasso@<eta>`, `blogistic@<eta>` or `horseshoe`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, eta) = match s.split_once('@') {
            Some((name, eta)) => {
                let eta: f64 = eta
                    .parse()
                    .map_err(|_| Error::config(format!("bad learning rate in method '{s}'")))?;
                if !(eta > 0.0 && eta.is_finite()) {
                    return Err(Error::domain(format!("learning rate must be positive in '{s}'")));
                }
                (name, Some(eta))
            }
            None => (s, None),
        };
        match (name, eta) {
            ("blasso", Some(eta)) => Ok(Method::Blasso { eta }),
            ("blasso", None) => Ok(Method::Blasso { eta: 1.0 }),
            ("blogistic", Some(eta)) => Ok(Method::Blogistic { eta }),
            ("blogistic", None) => Ok(Method::Blogistic { eta: 1.0 }),
            ("horseshoe", None) => Ok(Method::Horseshoe),
            ("horseshoe", Some(_)) => Err(Error::config("horseshoe takes no learning rate")),
            _ => Err(Error::config(format!("unknown method '{s}'"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Method::Blasso { eta } => format!("blasso@{eta}"),
            Method::Horseshoe => "horseshoe".into(),
            Method::Blogistic { eta } => format!("blogistic@{eta}"),
        }
    }

    pub fn kind(&self) -> TaskKind {
        match self {
            Method::Blogistic { .. } => TaskKind::Classification,
            _ => TaskKind::Regression,
        }
    }
}

/// What the log-risk scores for a logistic posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogRiskMode {
    /// Average of per-draw probabilities.
    Mixture,
    /// Probability at the posterior-mean coefficient.
    PlugIn,
}

/// How training samples of different sizes relate within a replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveMode {
    /// Prefixes of one sample of the largest size.
    Nested,
    /// An independent sample per size.
    Fresh,
}

/// Model settings shared by all methods of a risk curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub features: Features,
    pub lasso: LassoHyper,
    pub horseshoe: HorseshoeHyper,
    /// Isotropic logistic prior N(0, scale·I).
    pub prior_scale: f64,
    pub chain: ChainConfig,
    pub log_mode: LogRiskMode,
}

/// Fit `method` and return its point prediction: the predictive mean for
/// regression or P(Y = 1 | x) for classification.
pub fn fit_method(
    method: &Method,
    settings: &MethodSettings,
    train: &Dataset,
    rng: &mut RngHandle,
) -> Result<Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>> {
    let f = settings.features;
    match *method {
        Method::Blasso { eta } => {
            let s = run_blasso(train, f, &settings.lasso, eta, &settings.chain, rng)?;
            Ok(mean_predictor(s))
        }
        Method::Horseshoe => {
            let s = run_horseshoe(train, f, &settings.horseshoe, &settings.chain, rng)?;
            Ok(mean_predictor(s))
        }
        Method::Blogistic { eta } => {
            let prior = LogisticPrior::isotropic(f.dim(train.dim()), settings.prior_scale)?;
            let s = run_blogistic(train, f, &prior, eta, &settings.chain, rng)?;
            match settings.log_mode {
                LogRiskMode::Mixture => Ok(Box::new(move |x: &[f64]| Ok(predict_blogistic(&s, x)?.0))),
                LogRiskMode::PlugIn => {
                    let bar = s.beta_mean();
                    Ok(Box::new(move |x: &[f64]| Ok(logistic(s.expand(x)?.dot(&bar)))))
                }
            }
        }
    }
}

fn mean_predictor(s: PosteriorSamples) -> Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync> {
    let bar = s.beta_mean();
    Box::new(move |x: &[f64]| Ok(s.intercept + s.expand(x)?.dot(&bar)))
}

/// One point of a risk curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub n: usize,
    pub method: String,
    pub risk: RiskEstimate,
}

/// Risk of every method at every training size, replicated. Regression
/// methods are scored by squared error, logistic ones by log loss.
#[allow(clippy::too_many_arguments)]
pub fn risk_curve(
    source: &dyn DataSource,
    methods: &[Method],
    settings: &MethodSettings,
    n_list: &[usize],
    replications: usize,
    points_per_rep: usize,
    mode: CurveMode,
    rng: &RngHandle,
) -> Result<Vec<RiskRow>> {
    if methods.is_empty() || n_list.is_empty() {
        return Err(Error::config("risk curve needs at least one method and one size"));
    }
    if replications == 0 || points_per_rep == 0 {
        return Err(Error::config("replications and test points must be at least 1"));
    }
    if n_list.contains(&0) {
        return Err(Error::config("training sizes must be positive"));
    }
    let kind = methods[0].kind();
    if let Some(m) = methods.iter().find(|m| m.kind() != kind) {
        return Err(Error::TaskMismatch {
            expected: kind.name(),
            found: m.kind().name(),
        });
    }
    settings.chain.validate()?;
    let loss: fn(f64, f64) -> f64 = match kind {
        TaskKind::Regression => squared_error,
        TaskKind::Classification => log_loss,
    };
    let max_n = *n_list.iter().max().expect("non-empty");
    let per_rep: Vec<Result<Vec<f64>>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let rep = rng.derive(r);
            let test = source.simulate(points_per_rep, &mut rep.derive(TEST_STREAM))?;
            test.require(kind)?;
            let nested = match mode {
                CurveMode::Nested => Some(source.simulate(max_n, &mut rep.derive(TRAIN_STREAM))?),
                CurveMode::Fresh => None,
            };
            let mut out = Vec::with_capacity(n_list.len() * methods.len());
            for &n in n_list {
                let train = match &nested {
                    Some(d) => d.prefix(n),
                    None => source.simulate(n, &mut rep.derive(TRAIN_STREAM).derive(n as u64))?,
                };
                for (mi, method) in methods.iter().enumerate() {
                    let mut fit_rng = rep.derive(FIT_STREAM).derive(n as u64).derive(mi as u64);
                    let predictor = fit_method(method, settings, &train, &mut fit_rng)?;
                    out.push(mean_test_loss(&test, &predictor, loss)?);
                }
            }
            Ok(out)
        })
        .collect();
    let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(n_list.len() * methods.len());
    for (ni, &n) in n_list.iter().enumerate() {
        for (mi, method) in methods.iter().enumerate() {
            let idx = ni * methods.len() + mi;
            let values = per_rep.iter().map(|v| v[idx]).collect();
            rows.push(RiskRow {
                n,
                method: method.label(),
                risk: RiskEstimate::from_replications(values)?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Generator;
    use crate::posterior::ChainMeta;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn samples(beta: DMatrix<f64>, sigma2: Vec<f64>, k: usize) -> PosteriorSamples {
        PosteriorSamples {
            draws_beta: beta,
            draws_sigma2: sigma2,
            draws_lambda2: vec![],
            intercept: 0.0,
            features: Features::Fourier { num_functions: k },
            meta: ChainMeta {
                sampler: "t".into(),
                iterations: 1,
                burn_in: 0,
                thin: 1,
                eta: 1.0,
                seed: 0,
                stream_id: 0,
            },
        }
    }

    #[test]
    fn risk_estimate_se() {
        let r = RiskEstimate::from_replications(vec![1.0, 3.0]).unwrap();
        assert_eq!(r.value, 2.0);
        assert_relative_eq!(r.std_error, 1.0);
        let r = RiskEstimate::from_replications(vec![5.0]).unwrap();
        assert_eq!(r.std_error, 0.0);
        assert!(RiskEstimate::from_replications(vec![]).is_err());
    }

    #[test]
    fn zero_predictor_square_risk() {
        let g = Generator::RegressionWrong { sigma: 0.25 };
        let r = square_risk(&g, 1, 200, 1000, &RngHandle::new(51, 0), |_, _| {
            Ok(|_: &[f64]| Ok(0.0))
        })
        .unwrap();
        assert!((r.value - 0.03125).abs() < 4.0 * r.std_error, "{r:?}");

        let g = Generator::RegressionWrong { sigma: 0.0 };
        let r = square_risk(&g, 1, 3, 100, &RngHandle::new(52, 0), |_, _| {
            Ok(|_: &[f64]| Ok(0.0))
        })
        .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn constant_predictor_bias_variance() {
        // Y ~ N(0, v) with v = 2, ŷ ≡ 1.5 → risk v + c² = 4.25
        let src = |n: usize, rng: &mut RngHandle| {
            let y = DVector::from_fn(n, |_, _| 2f64.sqrt() * rng.standard_normal());
            Dataset::new(DMatrix::zeros(n, 1), y, crate::design::TaskKind::Regression)
        };
        let r = square_risk(&src, 1, 100, 1000, &RngHandle::new(53, 0), |_, _| {
            Ok(|_: &[f64]| Ok(1.5))
        })
        .unwrap();
        assert!((r.value - 4.25).abs() < 4.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn log_risk_cases() {
        let g = Generator::ClassificationWrong { p: 2, sigma: 1.0 };
        let r = log_risk(&g, 1, 4, 50, &RngHandle::new(54, 0), |_, _| Ok(|_: &[f64]| Ok(0.5)))
            .unwrap();
        assert_relative_eq!(r.value, 2f64.ln(), max_relative = 1e-12);

        // degenerate truth Z ≡ 0 scored by its own probability
        let g = Generator::ClassificationWrong { p: 2, sigma: 0.0 };
        let r = log_risk(&g, 1, 2, 50, &RngHandle::new(55, 0), |_, _| Ok(|_: &[f64]| Ok(0.5)))
            .unwrap();
        assert_relative_eq!(r.value, 2f64.ln(), max_relative = 1e-12);

        let src = |n: usize, rng: &mut RngHandle| {
            let y = DVector::from_fn(n, |_, _| if rng.bernoulli(0.75) { 1.0 } else { 0.0 });
            Dataset::new(DMatrix::zeros(n, 1), y, crate::design::TaskKind::Classification)
        };
        let r = log_risk(&src, 1, 100, 1000, &RngHandle::new(56, 0), |_, _| {
            Ok(|_: &[f64]| Ok(0.75))
        })
        .unwrap();
        let entropy = -(0.75 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert_relative_eq!(entropy, 0.5623351446188083, max_relative = 1e-12);
        assert!((r.value - entropy).abs() < 4.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn variance_curve_cases() {
        // identical draws: constant σ²
        let beta = DMatrix::from_row_slice(2, 3, &[0.3, -1.0, 2.0, 0.3, -1.0, 2.0]);
        let s = samples(beta, vec![0.7, 0.7], 3);
        let c = predictive_variance_curve(&s, &[-1.0, 0.0, 0.5]).unwrap();
        for v in c {
            assert_relative_eq!(v, 0.7, max_relative = 1e-12);
        }
        // ±v draws with σ² = 0: value a² with a = xᵀv
        let v = [0.2, 0.5, -0.4];
        let beta = DMatrix::from_row_slice(2, 3, &[v[0], v[1], v[2], -v[0], -v[1], -v[2]]);
        let s = samples(beta, vec![0.0, 0.0], 3);
        let x = 0.37;
        let row = crate::design::FourierBasis::new(3).unwrap().row(x);
        let a: f64 = row.iter().zip(v).map(|(r, b)| r * b).sum();
        let c = predictive_variance_curve(&s, &[x]).unwrap();
        assert_relative_eq!(c[0], a * a, max_relative = 1e-12);
        assert!(predictive_variance_curve(&s, &[]).unwrap().is_empty());
    }

    #[test]
    fn default_grid() {
        let g = default_prediction_grid();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], -1.0);
        assert!((g[200] - 1.0).abs() < 1e-12);
        assert!((g[101] - 0.01).abs() < 1e-12);
        assert!(grid(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn central_condition_mc_cases() {
        let r = central_condition_mc(&[0.0; 10], 1.0).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.holds);
        let r = central_condition_mc(&[0.5; 4], 2.0).unwrap();
        assert_relative_eq!(r.value, (-1.0f64).exp(), max_relative = 1e-12);
        assert!(r.holds);
        // huge negative gaps would overflow a naive mean
        let r = central_condition_mc(&[-800.0, -800.0], 1.0).unwrap();
        assert!(r.value.is_infinite() && !r.holds);
        assert!(central_condition_mc(&[], 1.0).is_err());
    }

    #[test]
    fn closed_form_cases() {
        let f = |t: f64| t * t / 2.0;
        let mgf = |l: f64| l * 0.3 + l * l * 4.0 / 2.0;
        for eta in [0.1, 1.0, 5.0] {
            let r = expfam_cc_closed_form(0.3, 0.3, eta, &f, &mgf).unwrap();
            assert_relative_eq!(r.value, 1.0, max_relative = 1e-15);
        }
        let inf = |_: f64| f64::INFINITY;
        let r = expfam_cc_closed_form(1.0, 0.3, 1.0, &f, &inf).unwrap();
        assert!(r.value.is_infinite() && !r.holds);
    }

    #[test]
    fn eta_bar() {
        assert_eq!(gaussian_eta_bar(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(gaussian_eta_bar(1.0, 4.0).unwrap(), 0.25);
        assert_eq!(gaussian_eta_bar(4.0, 1.0).unwrap(), 4.0);
        assert!(gaussian_eta_bar(0.0, 1.0).is_err());
    }

    #[test]
    fn method_parsing() {
        assert_eq!(Method::parse("blasso@0.25").unwrap(), Method::Blasso { eta: 0.25 });
        assert_eq!(Method::parse("horseshoe").unwrap(), Method::Horseshoe);
        assert_eq!(Method::parse("blogistic@0.125").unwrap(), Method::Blogistic { eta: 0.125 });
        assert_eq!(Method::parse("blasso@0.25").unwrap().label(), "blasso@0.25");
        assert!(Method::parse("blasso@0").is_err());
        assert!(Method::parse("horseshoe@1").is_err());
        assert!(Method::parse("ridge").is_err());
    }

    fn small_settings() -> MethodSettings {
        MethodSettings {
            features: Features::Fourier { num_functions: 5 },
            lasso: LassoHyper::default(),
            horseshoe: HorseshoeHyper::default(),
            prior_scale: 10.0,
            chain: ChainConfig::new(60, 20, 1).unwrap(),
            log_mode: LogRiskMode::Mixture,
        }
    }

    #[test]
    fn risk_curve_shape_and_determinism() {
        let g = Generator::RegressionWrong { sigma: 0.25 };
        let methods = [Method::Blasso { eta: 1.0 }, Method::Horseshoe];
        let run = |mode| {
            risk_curve(&g, &methods, &small_settings(), &[10, 20], 3, 50, mode, &RngHandle::new(9, 0))
                .unwrap()
        };
        let a = run(CurveMode::Nested);
        assert_eq!(a.len(), 4);
        assert_eq!((a[1].n, a[1].method.as_str()), (10, "horseshoe"));
        assert_eq!(a, run(CurveMode::Nested));
        assert_ne!(a, run(CurveMode::Fresh));
        assert!(a.iter().all(|r| r.risk.value.is_finite() && r.risk.replications == 3));
    }

    #[test]
    fn risk_curve_rejects_mixed_tasks() {
        let g = Generator::RegressionWrong { sigma: 0.25 };
        let methods = [Method::Blasso { eta: 1.0 }, Method::Blogistic { eta: 1.0 }];
        let r = risk_curve(&g, &methods, &small_settings(), &[10], 1, 5, CurveMode::Nested, &RngHandle::new(0, 0));
        assert!(matches!(r, Err(Error::TaskMismatch { .. })));
        let methods = [Method::Blogistic { eta: 1.0 }];
        let r = risk_curve(&g, &methods, &small_settings(), &[10], 1, 5, CurveMode::Nested, &RngHandle::new(0, 0));
        assert!(matches!(r, Err(Error::TaskMismatch { .. })));
    }
}
