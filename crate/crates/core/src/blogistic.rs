//! Tempered Bayesian logistic regression by Pólya–Gamma augmentation.
//!
//! With κ_i = y_i − ½ and a N(b, B) prior, the η-posterior is sampled by
//! alternating
//!
//! - ω_i | β ~ PG(η, x_iᵀβ)
//! - β | ω ~ N(m_ω, V_ω), V_ω = (XᵀΩX + B⁻¹)⁻¹, m_ω = V_ω(η Xᵀκ + B⁻¹b)
//!
//! η appears exactly twice: as the PG shape and as the multiplier of κ.

use nalgebra::{DMatrix, DVector};

use crate::design::{Dataset, Features, TaskKind};
use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::posterior::{ChainConfig, ChainMeta, DrawCollector, PosteriorSamples};
use crate::rng::RngHandle;
use crate::samplers::{sample_mvn_precision, sample_polya_gamma, PgParams, PG_TRUNCATION};

/// Default prior variance per coefficient.
pub const DEFAULT_PRIOR_SCALE: f64 = 10.0;

/// Gaussian prior N(mean, covariance) on the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticPrior {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    precision_mean: DVector<f64>,
}

impl LogisticPrior {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let p = mean.len();
        if covariance.shape() != (p, p) {
            return Err(Error::Shape(format!(
                "prior mean has length {p} but covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > 1e-12 * covariance.amax().max(1.0) {
            return Err(Error::domain("prior covariance is not symmetric"));
        }
        let precision = Cholesky::factor(&covariance)?.inverse();
        let precision_mean = &precision * &mean;
        Ok(Self {
            mean,
            covariance,
            precision,
            precision_mean,
        })
    }

    /// N(0, scale · I).
    pub fn isotropic(p: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!("prior scale must be positive, got {scale}")));
        }
        Self::new(DVector::zeros(p), DMatrix::identity(p, p) * scale)
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticChainState {
    pub beta: DVector<f64>,
    pub omega: DVector<f64>,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("learning rate must be positive, got {eta}")))
    }
}

/// ω_i ~ PG(η, x_iᵀβ) independently.
pub fn omega_conditional(
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    eta: f64,
    rng: &mut RngHandle,
) -> Result<DVector<f64>> {
    omega_conditional_truncated(x, beta, eta, PG_TRUNCATION, rng)
}

pub fn omega_conditional_truncated(
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    eta: f64,
    truncation: usize,
    rng: &mut RngHandle,
) -> Result<DVector<f64>> {
    check_eta(eta)?;
    if x.ncols() != beta.len() {
        return Err(Error::Shape(format!(
            "design has {} columns, beta has {}",
            x.ncols(),
            beta.len()
        )));
    }
    let lin = x * beta;
    let mut omega = DVector::zeros(x.nrows());
    for i in 0..x.nrows() {
        let params = PgParams::with_truncation(eta, lin[i], truncation)?;
        omega[i] = sample_polya_gamma(rng, &params)?;
    }
    Ok(omega)
}

fn precision_and_rhs(
    x: &DMatrix<f64>,
    kappa: &DVector<f64>,
    omega: &DVector<f64>,
    prior: &LogisticPrior,
    eta: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let p = x.ncols();
    let mut q = prior.precision.clone();
    // XᵀΩX accumulated row by row
    for i in 0..x.nrows() {
        let w = omega[i];
        for c in 0..p {
            let xc = x[(i, c)] * w;
            if xc == 0.0 {
                continue;
            }
            for r in c..p {
                q[(r, c)] += x[(i, r)] * xc;
            }
        }
    }
    for c in 0..p {
        for r in c + 1..p {
            q[(c, r)] = q[(r, c)];
        }
    }
    let rhs = x.tr_mul(kappa) * eta + &prior.precision_mean;
    (q, rhs)
}

/// (m_ω, V_ω) of the β conditional.
pub fn beta_conditional_logistic(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    omega: &DVector<f64>,
    prior: &LogisticPrior,
    eta: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_eta(eta)?;
    check_shapes(x, y, prior)?;
    if omega.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} latent variables for {} observations",
            omega.len(),
            y.len()
        )));
    }
    if omega.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::domain("latent variables must be positive"));
    }
    let kappa = y.add_scalar(-0.5);
    let (q, rhs) = precision_and_rhs(x, &kappa, omega, prior, eta);
    let chol = Cholesky::factor_owned(q)?;
    let v = chol.inverse();
    let m = &v * rhs;
    Ok((m, v))
}

fn check_shapes(x: &DMatrix<f64>, y: &DVector<f64>, prior: &LogisticPrior) -> Result<()> {
    if x.nrows() != y.len() || x.ncols() != prior.dim() {
        return Err(Error::Shape(format!(
            "design {}x{}, {} labels, prior dimension {}",
            x.nrows(),
            x.ncols(),
            y.len(),
            prior.dim()
        )));
    }
    Ok(())
}

/// One tempered logistic Gibbs chain.
#[derive(Debug, Clone)]
pub struct LogisticSampler {
    x: DMatrix<f64>,
    kappa: DVector<f64>,
    prior: LogisticPrior,
    eta: f64,
    truncation: usize,
    state: LogisticChainState,
}

impl LogisticSampler {
    /// Chain started at β = 0; ω is drawn first in every sweep.
    pub fn new(x: DMatrix<f64>, y: &DVector<f64>, prior: LogisticPrior, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        check_shapes(&x, y, &prior)?;
        let n = x.nrows();
        let p = x.ncols();
        Ok(Self {
            kappa: y.add_scalar(-0.5),
            x,
            prior,
            eta,
            truncation: PG_TRUNCATION,
            state: LogisticChainState {
                beta: DVector::zeros(p),
                omega: DVector::from_element(n, 0.25),
            },
        })
    }

    pub fn with_truncation(mut self, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::domain("polya-gamma truncation must be at least 1"));
        }
        self.truncation = truncation;
        Ok(self)
    }

    pub fn state(&self) -> &LogisticChainState {
        &self.state
    }

    pub fn set_beta(&mut self, beta: DVector<f64>) -> Result<()> {
        if beta.len() != self.x.ncols() {
            return Err(Error::Shape("beta does not match the design".into()));
        }
        self.state.beta = beta;
        Ok(())
    }

    /// ω → β.
    pub fn sweep(&mut self, rng: &mut RngHandle) -> Result<()> {
        self.state.omega =
            omega_conditional_truncated(&self.x, &self.state.beta, self.eta, self.truncation, rng)?;
        let (q, rhs) =
            precision_and_rhs(&self.x, &self.kappa, &self.state.omega, &self.prior, self.eta);
        let chol = Cholesky::factor_owned(q)?;
        self.state.beta = sample_mvn_precision(rng, &chol, &rhs, 1.0);
        if self.state.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numeric("beta draw".into()));
        }
        Ok(())
    }
}

/// Run a tempered logistic chain and keep thinned post-burn-in β draws.
pub fn run_blogistic(
    data: &Dataset,
    features: Features,
    prior: &LogisticPrior,
    eta: f64,
    chain: &ChainConfig,
    rng: &mut RngHandle,
) -> Result<PosteriorSamples> {
    data.require(TaskKind::Classification)?;
    chain.validate()?;
    let x = features.design(&data.x)?;
    let p = x.ncols();
    let mut sampler = LogisticSampler::new(x, &data.y, prior.clone(), eta)?;
    let mut out = DrawCollector::new(*chain, p);
    let meta = ChainMeta {
        sampler: "blogistic".into(),
        iterations: chain.iterations,
        burn_in: chain.burn_in,
        thin: chain.thin,
        eta,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    };
    for s in 1..=chain.iterations {
        sampler.sweep(rng)?;
        out.offer(s, &sampler.state().beta, None, None);
    }
    Ok(out.finish(0.0, features, meta))
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Posterior predictive P(Y = 1 | x_new) as the average of per-draw
/// logistic probabilities.
pub fn predict_blogistic(samples: &PosteriorSamples, x_new: &[f64]) -> Result<(f64, DVector<f64>)> {
    samples.check_nonempty()?;
    let row = samples.expand(x_new)?;
    let draws = samples.linear_predictions(&row).map(logistic);
    Ok((draws.mean(), draws))
}
