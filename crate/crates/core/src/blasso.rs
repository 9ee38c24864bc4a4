//! Gibbs sampler for the learning-rate-tempered Bayesian lasso.
//!
//! Model: ỹ = Xβ + ε with ε ~ N(0, σ²I), β_j | τ_j², σ² ~ N(0, σ²τ_j²),
//! τ_j² ~ Exp(λ²/2), σ² ~ Inv-Gamma(α, γ). The intercept has a flat prior and
//! is integrated out by centering y; the likelihood enters raised to η.
//!
//! Full conditionals, with M = (η XᵀX + D_τ⁻¹)⁻¹:
//!
//! - β | · ~ N(η M Xᵀỹ, σ² M)
//! - σ² | · ~ Inv-Gamma(η(n−1)/2 + K/2 + α, η‖ỹ − Xβ‖²/2 + βᵀD_τ⁻¹β/2 + γ)
//! - 1/τ_j² | · ~ Inv-Gaussian(√(λ²σ²/β_j²), λ²)
//! - λ² | · ~ Gamma(K + r, Σ τ_j²/2 + δ) under a Gamma(r, δ) prior on λ²
//!
//! The sampler only touches the data through the centered sufficient
//! statistics ([`RegressionStats`]), which lets sequential evaluation add
//! one observation at a time without rebuilding the design.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::{Dataset, Features, TaskKind};
use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::posterior::{ChainConfig, ChainMeta, DrawCollector, PosteriorSamples};
use crate::rng::RngHandle;
use crate::samplers::{sample_gamma, sample_inv_gamma, sample_inv_gaussian, sample_mvn_precision};

/// Lower bound on |β_j| inside the τ² conditional.
pub const BETA_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LambdaPrior {
    /// Point mass at λ.
    Fixed { lambda: f64 },
    /// λ² ~ Gamma(shape r, rate delta).
    GammaOnLambdaSq { r: f64, delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoHyper {
    pub alpha: f64,
    pub gamma: f64,
    pub lambda_prior: LambdaPrior,
}

impl Default for LassoHyper {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma: 1.0,
            lambda_prior: LambdaPrior::GammaOnLambdaSq { r: 1.0, delta: 1.0 },
        }
    }
}

impl LassoHyper {
    /// Near-improper inverse-gamma prior on σ².
    pub fn vague() -> Self {
        Self {
            alpha: 1e-6,
            gamma: 1e-6,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be positive, got {v}")))
            }
        };
        pos("alpha", self.alpha)?;
        pos("gamma", self.gamma)?;
        match self.lambda_prior {
            LambdaPrior::Fixed { lambda } => pos("lambda", lambda),
            LambdaPrior::GammaOnLambdaSq { r, delta } => {
                pos("lambda prior shape r", r)?;
                pos("lambda prior rate delta", delta)
            }
        }
    }

    fn initial_lambda2(&self) -> f64 {
        match self.lambda_prior {
            LambdaPrior::Fixed { lambda } => lambda * lambda,
            LambdaPrior::GammaOnLambdaSq { .. } => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoChainState {
    pub beta: DVector<f64>,
    pub sigma2: f64,
    pub tau2: DVector<f64>,
    pub lambda2: f64,
}

/// Centered sufficient statistics of a regression sample.
///
/// Raw sums are accumulated so observations can be appended one at a
/// time; centered quantities are derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionStats {
    n: usize,
    xtx: DMatrix<f64>,
    xt1: DVector<f64>,
    xty: DVector<f64>,
    sum_y: f64,
    sum_y2: f64,
}

impl RegressionStats {
    pub fn empty(dim: usize) -> Self {
        Self {
            n: 0,
            xtx: DMatrix::zeros(dim, dim),
            xt1: DVector::zeros(dim),
            xty: DVector::zeros(dim),
            sum_y: 0.0,
            sum_y2: 0.0,
        }
    }

    pub fn from_design(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Shape(format!(
                "{} design rows but {} responses",
                x.nrows(),
                y.len()
            )));
        }
        let ones = DVector::from_element(y.len(), 1.0);
        Ok(Self {
            n: y.len(),
            xtx: x.tr_mul(x),
            xt1: x.tr_mul(&ones),
            xty: x.tr_mul(y),
            sum_y: y.sum(),
            sum_y2: y.dot(y),
        })
    }

    pub fn push(&mut self, row: &DVector<f64>, y: f64) {
        self.n += 1;
        self.xtx.ger(1.0, row, row, 1.0);
        self.xt1 += row;
        self.xty.axpy(y, row, 1.0);
        self.sum_y += y;
        self.sum_y2 += y * y;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.xt1.len()
    }

    pub fn y_mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum_y / self.n as f64
        }
    }

    pub fn xtx(&self) -> &DMatrix<f64> {
        &self.xtx
    }

    /// Xᵀỹ with ỹ = y − ȳ.
    pub fn xty_centered(&self) -> DVector<f64> {
        &self.xty - &self.xt1 * self.y_mean()
    }

    /// ỹᵀỹ.
    pub fn yty_centered(&self) -> f64 {
        (self.sum_y2 - self.n as f64 * self.y_mean().powi(2)).max(0.0)
    }

    /// ‖ỹ − Xβ‖² from the statistics, clamped at zero.
    pub fn rss(&self, beta: &DVector<f64>) -> f64 {
        let xtyc = self.xty_centered();
        let quad = beta.dot(&(&self.xtx * beta));
        (self.yty_centered() - 2.0 * beta.dot(&xtyc) + quad).max(0.0)
    }

    /// Sample variance of ỹ, or 1 when it is undefined or zero.
    pub fn initial_sigma2(&self) -> f64 {
        if self.n < 2 {
            return 1.0;
        }
        let v = self.yty_centered() / (self.n - 1) as f64;
        if v > 0.0 && v.is_finite() {
            v
        } else {
            1.0
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("learning rate must be positive, got {eta}")))
    }
}

fn check_finite(what: &str, v: impl IntoIterator<Item = f64>) -> Result<()> {
    if v.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{what} contains NaN or infinity")))
    }
}

/// Mean and covariance of β given (σ², τ²): (η M Xᵀỹ, σ² M).
pub fn beta_conditional(
    x: &DMatrix<f64>,
    y_centered: &DVector<f64>,
    tau2: &DVector<f64>,
    sigma2: f64,
    eta: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_eta(eta)?;
    check_finite("design", x.iter().copied())?;
    check_finite("response", y_centered.iter().copied())?;
    if x.ncols() != tau2.len() || x.nrows() != y_centered.len() {
        return Err(Error::Shape(format!(
            "design {}x{}, response {}, tau2 {}",
            x.nrows(),
            x.ncols(),
            y_centered.len(),
            tau2.len()
        )));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::domain(format!("sigma2 must be positive, got {sigma2}")));
    }
    if tau2.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::domain("tau2 entries must be positive"));
    }
    let precision = beta_precision(&x.tr_mul(x), tau2, eta);
    let chol = Cholesky::factor_owned(precision)?;
    let m = chol.inverse();
    let mean = &m * (x.tr_mul(y_centered) * eta);
    Ok((mean, m * sigma2))
}

fn beta_precision(xtx: &DMatrix<f64>, tau2: &DVector<f64>, eta: f64) -> DMatrix<f64> {
    let mut q = xtx * eta;
    for j in 0..tau2.len() {
        q[(j, j)] += 1.0 / tau2[j];
    }
    q
}

/// Inverse-gamma (shape, scale) of the σ² conditional.
pub fn sigma2_conditional(
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    y_centered: &DVector<f64>,
    tau2: &DVector<f64>,
    hyper: &LassoHyper,
    eta: f64,
) -> Result<(f64, f64)> {
    check_eta(eta)?;
    let resid = y_centered - x * beta;
    check_finite("residual", resid.iter().copied())?;
    let rss = resid.dot(&resid);
    Ok(sigma2_params(y_centered.len(), rss, beta, tau2, hyper, eta))
}

fn sigma2_params(
    n: usize,
    rss: f64,
    beta: &DVector<f64>,
    tau2: &DVector<f64>,
    hyper: &LassoHyper,
    eta: f64,
) -> (f64, f64) {
    let k = beta.len() as f64;
    let dof = n.saturating_sub(1) as f64;
    let quad: f64 = beta.iter().zip(tau2.iter()).map(|(b, t)| b * b / t).sum();
    let shape = eta / 2.0 * dof + k / 2.0 + hyper.alpha;
    let scale = eta / 2.0 * rss + quad / 2.0 + hyper.gamma;
    (shape, scale)
}

/// Inverse-Gaussian (mean, shape) of 1/τ_j², with |β_j| floored at
/// [`BETA_FLOOR`].
pub fn tau2_conditional(beta_j: f64, sigma2: f64, lambda2: f64) -> (f64, f64) {
    let b = beta_j.abs().max(BETA_FLOOR);
    ((lambda2 * sigma2).sqrt() / b, lambda2)
}

/// Gamma (shape, rate) of the λ² conditional under a Gamma(r, δ) prior.
pub fn lambda2_conditional(tau2: &DVector<f64>, r: f64, delta: f64) -> (f64, f64) {
    (tau2.len() as f64 + r, tau2.sum() / 2.0 + delta)
}

pub fn lambda2_update(tau2: &DVector<f64>, prior: &LambdaPrior, rng: &mut RngHandle) -> Result<f64> {
    match *prior {
        LambdaPrior::GammaOnLambdaSq { r, delta } => {
            let (shape, rate) = lambda2_conditional(tau2, r, delta);
            sample_gamma(rng, shape, rate)
        }
        LambdaPrior::Fixed { .. } => Err(Error::config(
            "lambda2 update requested under a fixed lambda",
        )),
    }
}

/// One tempered-lasso Gibbs chain over fixed sufficient statistics.
#[derive(Debug, Clone)]
pub struct LassoSampler {
    stats: RegressionStats,
    hyper: LassoHyper,
    eta: f64,
    state: LassoChainState,
}

impl LassoSampler {
    /// Chain started from β = 0, σ² = var(ỹ), τ² = 1, λ² = 1 (or the fixed λ²).
    pub fn new(stats: RegressionStats, hyper: LassoHyper, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        hyper.validate()?;
        let k = stats.dim();
        let state = LassoChainState {
            beta: DVector::zeros(k),
            sigma2: stats.initial_sigma2(),
            tau2: DVector::from_element(k, 1.0),
            lambda2: hyper.initial_lambda2(),
        };
        Ok(Self {
            stats,
            hyper,
            eta,
            state,
        })
    }

    pub fn state(&self) -> &LassoChainState {
        &self.state
    }

    pub fn set_state(&mut self, state: LassoChainState) -> Result<()> {
        if state.beta.len() != self.stats.dim() || state.tau2.len() != self.stats.dim() {
            return Err(Error::Shape("chain state does not match the design".into()));
        }
        self.state = state;
        Ok(())
    }

    pub fn stats(&self) -> &RegressionStats {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut RegressionStats {
        &mut self.stats
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// β → σ² → τ² → λ².
    pub fn sweep(&mut self, rng: &mut RngHandle) -> Result<()> {
        let eta = self.eta;
        let k = self.stats.dim();
        let st = &mut self.state;

        let precision = beta_precision(self.stats.xtx(), &st.tau2, eta);
        let chol = Cholesky::factor_owned(precision)?;
        let rhs = self.stats.xty_centered() * eta;
        st.beta = sample_mvn_precision(rng, &chol, &rhs, st.sigma2.sqrt());
        check_finite("beta draw", st.beta.iter().copied())?;

        let rss = self.stats.rss(&st.beta);
        let (shape, scale) =
            sigma2_params(self.stats.len(), rss, &st.beta, &st.tau2, &self.hyper, eta);
        st.sigma2 = sample_inv_gamma(rng, shape, scale)?;

        for j in 0..k {
            let (mean, shape) = tau2_conditional(st.beta[j], st.sigma2, st.lambda2);
            let inv = sample_inv_gaussian(rng, mean, shape)?;
            st.tau2[j] = (1.0 / inv).max(f64::MIN_POSITIVE);
        }

        if let LambdaPrior::GammaOnLambdaSq { .. } = self.hyper.lambda_prior {
            st.lambda2 = lambda2_update(&st.tau2, &self.hyper.lambda_prior, rng)?;
        }
        Ok(())
    }
}

/// Run a tempered-lasso chain on `data` and keep the thinned post-burn-in draws.
pub fn run_blasso(
    data: &Dataset,
    features: Features,
    hyper: &LassoHyper,
    eta: f64,
    chain: &ChainConfig,
    rng: &mut RngHandle,
) -> Result<PosteriorSamples> {
    data.require(TaskKind::Regression)?;
    chain.validate()?;
    let x = features.design(&data.x)?;
    let stats = RegressionStats::from_design(&x, &data.y)?;
    let intercept = stats.y_mean();
    let mut sampler = LassoSampler::new(stats, *hyper, eta)?;
    let mut out = DrawCollector::new(*chain, x.ncols());
    let meta = ChainMeta {
        sampler: "blasso".into(),
        iterations: chain.iterations,
        burn_in: chain.burn_in,
        thin: chain.thin,
        eta,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    };
    for s in 1..=chain.iterations {
        sampler.sweep(rng)?;
        let st = sampler.state();
        out.offer(s, &st.beta, Some(st.sigma2), Some(st.lambda2));
    }
    Ok(out.finish(intercept, features, meta))
}

/// Per-draw predictions `intercept + rowᵀβ` and their mean.
pub fn predict_blasso(
    samples: &PosteriorSamples,
    intercept: f64,
    x_new: &[f64],
) -> Result<(f64, DVector<f64>)> {
    samples.check_nonempty()?;
    let row = samples.expand(x_new)?;
    let draws = samples.linear_predictions(&row).add_scalar(intercept);
    Ok((draws.mean(), draws))
}
