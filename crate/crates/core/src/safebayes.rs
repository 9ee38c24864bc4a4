//! Learning-rate selection by R-log-SafeBayes.
//!
//! For every η on a grid, the cumulative posterior-expected
//! posterior-randomized log-loss
//!
//! s_η = Σ_i E_{θ ~ Π(· | z^{i−1}, η)} [ℓ_θ(z_i)]
//!
//! is computed sequentially, and the minimizing η is returned (largest η on
//! ties). The posterior given each prefix is approximated by a Gibbs chain
//! that is extended observation by observation.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blasso::{LassoHyper, LassoSampler, RegressionStats};
use crate::blogistic::{LogisticPrior, LogisticSampler};
use crate::design::{Dataset, Features, TaskKind};
use crate::error::{Error, Result};
use crate::rng::{eta_key, RngHandle};

/// Descending grid of candidate learning rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaGrid {
    values: Vec<f64>,
}

impl EtaGrid {
    /// {1, 2^-k_step, 2^-2k_step, …, 2^-k_max}.
    pub fn dyadic(k_step: u32, k_max: u32) -> Result<Self> {
        if k_step == 0 {
            return Err(Error::config("grid step exponent must be positive"));
        }
        if k_max < k_step {
            return Err(Error::config(format!(
                "grid max exponent {k_max} is below the step {k_step}"
            )));
        }
        let mut exps: Vec<u32> = (0..).map(|i| i * k_step).take_while(|&e| e < k_max).collect();
        exps.push(k_max);
        Self::explicit(exps.into_iter().map(|e| 0.5f64.powi(e as i32)).collect())
    }

    /// Arbitrary positive values; stored in descending order.
    pub fn explicit(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::config("learning-rate grid is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::config(format!("learning rate {v} is not positive")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("learning-rate grid has duplicate values"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// How the posterior given each prefix is approximated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainMode {
    /// Extend the previous prefix's chain.
    Warm,
    /// Restart from the default initial state for every prefix.
    Cold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafeBayesConfig {
    /// Posterior draws averaged per prediction (M).
    pub draws_per_step: usize,
    /// Sweeps discarded before collecting draws at each step.
    pub burn_per_step: usize,
    /// Number of leading observations whose loss is not accumulated.
    pub skip_initial: usize,
    pub mode: ChainMode,
}

impl Default for SafeBayesConfig {
    fn default() -> Self {
        Self {
            draws_per_step: 100,
            burn_per_step: 200,
            skip_initial: 1,
            mode: ChainMode::Warm,
        }
    }
}

impl SafeBayesConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.draws_per_step == 0 {
            return Err(Error::config("draws per step must be at least 1"));
        }
        if n == 0 {
            return Err(Error::config("sequential loss needs at least one observation"));
        }
        if self.skip_initial >= n {
            return Err(Error::config(format!(
                "skipping {} of {n} observations leaves nothing to score",
                self.skip_initial
            )));
        }
        Ok(())
    }
}

/// Model whose tempered posterior is evaluated prequentially.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Lasso { features: Features, hyper: LassoHyper },
    Logistic { features: Features, prior: LogisticPrior },
}

impl ModelSpec {
    pub fn kind(&self) -> TaskKind {
        match self {
            ModelSpec::Lasso { .. } => TaskKind::Regression,
            ModelSpec::Logistic { .. } => TaskKind::Classification,
        }
    }
}

/// Cumulative loss and its per-observation terms (NaN for skipped steps).
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialLoss {
    pub total: f64,
    pub per_step: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafeBayesResult {
    /// (η, s_η) in grid order.
    pub s: Vec<(f64, f64)>,
    pub eta_hat: f64,
    pub per_step: Option<Vec<Vec<f64>>>,
}

/// A model that can be scored one observation ahead.
pub trait Prequential {
    fn len(&self) -> usize;

    /// Posterior-expected loss of observation `i` given observations `0..i`.
    fn step_loss(&mut self, i: usize, rng: &mut RngHandle) -> Result<f64>;

    /// Add observation `i` to the conditioning set.
    fn observe(&mut self, i: usize) -> Result<()>;
}

/// Accumulate step losses from observation `skip_initial` on.
pub fn prequential_loss(
    model: &mut impl Prequential,
    skip_initial: usize,
    rng: &mut RngHandle,
) -> Result<SequentialLoss> {
    let n = model.len();
    let mut per_step = vec![f64::NAN; n];
    let mut total = 0.0;
    for i in 0..n {
        if i >= skip_initial {
            let r = model.step_loss(i, rng)?;
            per_step[i] = r;
            total += r;
        }
        model.observe(i)?;
    }
    Ok(SequentialLoss { total, per_step })
}

/// Gaussian log-loss −log N(y; mean, σ²).
pub fn gaussian_log_loss(y: f64, mean: f64, sigma2: f64) -> f64 {
    let r = y - mean;
    0.5 * (2.0 * std::f64::consts::PI * sigma2).ln() + 0.5 * r * r / sigma2
}

/// Logistic log-loss −[y z − log(1 + e^z)] for a label in {0, 1}.
pub fn logistic_log_loss(y: f64, z: f64) -> f64 {
    softplus(z) - y * z
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct LassoPrequential<'a> {
    x: nalgebra::DMatrix<f64>,
    data: &'a Dataset,
    hyper: LassoHyper,
    eta: f64,
    cfg: SafeBayesConfig,
    sampler: LassoSampler,
}

impl Prequential for LassoPrequential<'_> {
    fn len(&self) -> usize {
        self.data.len()
    }

    fn step_loss(&mut self, i: usize, rng: &mut RngHandle) -> Result<f64> {
        if self.cfg.mode == ChainMode::Cold {
            self.sampler = LassoSampler::new(self.sampler.stats().clone(), self.hyper, self.eta)?;
        }
        for _ in 0..self.cfg.burn_per_step {
            self.sampler.sweep(rng)?;
        }
        let row = self.x.row(i).transpose();
        let y = self.data.y[i];
        let intercept = self.sampler.stats().y_mean();
        let mut acc = 0.0;
        for _ in 0..self.cfg.draws_per_step {
            self.sampler.sweep(rng)?;
            let st = self.sampler.state();
            acc += gaussian_log_loss(y, intercept + row.dot(&st.beta), st.sigma2);
        }
        Ok(acc / self.cfg.draws_per_step as f64)
    }

    fn observe(&mut self, i: usize) -> Result<()> {
        let row = self.x.row(i).transpose();
        self.sampler.stats_mut().push(&row, self.data.y[i]);
        Ok(())
    }
}

struct LogisticPrequential<'a> {
    x: nalgebra::DMatrix<f64>,
    data: &'a Dataset,
    prior: &'a LogisticPrior,
    eta: f64,
    cfg: SafeBayesConfig,
    beta: DVector<f64>,
    seen: usize,
}

impl Prequential for LogisticPrequential<'_> {
    fn len(&self) -> usize {
        self.data.len()
    }

    fn step_loss(&mut self, i: usize, rng: &mut RngHandle) -> Result<f64> {
        let xs = self.x.rows(0, self.seen).into_owned();
        let ys = self.data.y.rows(0, self.seen).into_owned();
        let mut sampler = LogisticSampler::new(xs, &ys, self.prior.clone(), self.eta)?;
        if self.cfg.mode == ChainMode::Warm {
            sampler.set_beta(self.beta.clone())?;
        }
        for _ in 0..self.cfg.burn_per_step {
            sampler.sweep(rng)?;
        }
        let row = self.x.row(i).transpose();
        let y = self.data.y[i];
        let mut acc = 0.0;
        for _ in 0..self.cfg.draws_per_step {
            sampler.sweep(rng)?;
            acc += logistic_log_loss(y, row.dot(&sampler.state().beta));
        }
        self.beta = sampler.state().beta.clone();
        Ok(acc / self.cfg.draws_per_step as f64)
    }

    fn observe(&mut self, i: usize) -> Result<()> {
        self.seen = i + 1;
        Ok(())
    }
}

/// s_η for the tempered lasso on regression data.
pub fn sequential_loss_regression(
    eta: f64,
    data: &Dataset,
    features: Features,
    hyper: &LassoHyper,
    cfg: &SafeBayesConfig,
    rng: &mut RngHandle,
) -> Result<SequentialLoss> {
    data.require(TaskKind::Regression)?;
    cfg.validate(data.len())?;
    let x = features.design(&data.x)?;
    let sampler = LassoSampler::new(RegressionStats::empty(x.ncols()), *hyper, eta)?;
    let mut model = LassoPrequential {
        x,
        data,
        hyper: *hyper,
        eta,
        cfg: *cfg,
        sampler,
    };
    prequential_loss(&mut model, cfg.skip_initial, rng)
}

/// s_η for tempered logistic regression on classification data.
pub fn sequential_loss_classification(
    eta: f64,
    data: &Dataset,
    features: Features,
    prior: &LogisticPrior,
    cfg: &SafeBayesConfig,
    rng: &mut RngHandle,
) -> Result<SequentialLoss> {
    data.require(TaskKind::Classification)?;
    cfg.validate(data.len())?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!("learning rate must be positive, got {eta}")));
    }
    let x = features.design(&data.x)?;
    let p = x.ncols();
    let mut model = LogisticPrequential {
        x,
        data,
        prior,
        eta,
        cfg: *cfg,
        beta: DVector::zeros(p),
        seen: 0,
    };
    prequential_loss(&mut model, cfg.skip_initial, rng)
}

/// Pick η̂ = argmin s_η, preferring the largest η among ties.
pub fn select_eta(s: &[(f64, f64)]) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &(eta, loss) in s {
        if loss.is_nan() {
            return Err(Error::Numeric(format!("cumulative loss for eta={eta} is NaN")));
        }
        best = match best {
            None => Some((eta, loss)),
            Some((be, bl)) if loss < bl || (loss == bl && eta > be) => Some((eta, loss)),
            keep => keep,
        };
    }
    best.map(|(e, _)| e)
        .ok_or_else(|| Error::config("learning-rate grid is empty"))
}

/// Evaluate `loss_for` at every grid point on a stream keyed by η and
/// select η̂. Grid points are evaluated concurrently.
pub fn safe_bayes_with<F>(grid: &EtaGrid, rng: &RngHandle, loss_for: F) -> Result<SafeBayesResult>
where
    F: Fn(f64, &mut RngHandle) -> Result<SequentialLoss> + Sync,
{
    let losses: Vec<Result<SequentialLoss>> = grid
        .values()
        .par_iter()
        .map(|&eta| {
            let mut stream = rng.derive(eta_key(eta));
            loss_for(eta, &mut stream)
        })
        .collect();
    let mut s = Vec::with_capacity(losses.len());
    let mut per_step = Vec::with_capacity(losses.len());
    for (&eta, l) in grid.values().iter().zip(losses) {
        let l = l?;
        s.push((eta, l.total));
        per_step.push(l.per_step);
    }
    let eta_hat = select_eta(&s)?;
    Ok(SafeBayesResult {
        s,
        eta_hat,
        per_step: Some(per_step),
    })
}

pub fn safe_bayes(
    data: &Dataset,
    grid: &EtaGrid,
    model: &ModelSpec,
    cfg: &SafeBayesConfig,
    rng: &RngHandle,
) -> Result<SafeBayesResult> {
    data.require(model.kind())?;
    match model {
        ModelSpec::Lasso { features, hyper } => safe_bayes_with(grid, rng, |eta, r| {
            sequential_loss_regression(eta, data, *features, hyper, cfg, r)
        }),
        ModelSpec::Logistic { features, prior } => safe_bayes_with(grid, rng, |eta, r| {
            sequential_loss_classification(eta, data, *features, prior, cfg, r)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Posterior pinned at fixed parameter draws.
    struct Pinned {
        ys: Vec<f64>,
        loss: fn(f64) -> f64,
    }

    impl Prequential for Pinned {
        fn len(&self) -> usize {
            self.ys.len()
        }
        fn step_loss(&mut self, i: usize, _: &mut RngHandle) -> Result<f64> {
            Ok((self.loss)(self.ys[i]))
        }
        fn observe(&mut self, _: usize) -> Result<()> {
            Ok(())
        }
    }

    #[test]
    fn grid_construction() {
        assert_eq!(EtaGrid::dyadic(1, 3).unwrap().values(), &[1.0, 0.5, 0.25, 0.125]);
        assert_eq!(EtaGrid::dyadic(1, 1).unwrap().values(), &[1.0, 0.5]);
        assert_eq!(EtaGrid::dyadic(2, 5).unwrap().values(), &[1.0, 0.25, 0.0625, 0.03125]);
        assert!(EtaGrid::dyadic(3, 2).is_err());
        let g = EtaGrid::explicit(vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5]).unwrap();
        assert_eq!(g.values(), &[1.0, 0.9, 0.8, 0.7, 0.6, 0.5]);
        assert!(EtaGrid::explicit(vec![]).is_err());
        assert!(EtaGrid::explicit(vec![1.0, 1.0]).is_err());
        assert!(EtaGrid::explicit(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn pinned_gaussian_losses() {
        let mut m = Pinned {
            ys: vec![0.0],
            loss: |y| gaussian_log_loss(y, 0.0, 1.0),
        };
        let l = prequential_loss(&mut m, 0, &mut RngHandle::new(0, 0)).unwrap();
        let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert_relative_eq!(l.total, half_log_2pi, max_relative = 1e-12);
        m.ys = vec![2.0];
        let l = prequential_loss(&mut m, 0, &mut RngHandle::new(0, 0)).unwrap();
        assert_relative_eq!(l.total, half_log_2pi + 2.0, max_relative = 1e-12);
    }

    #[test]
    fn pinned_logistic_losses() {
        assert_relative_eq!(logistic_log_loss(1.0, 0.0), 2f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(logistic_log_loss(0.0, 0.0), 2f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(
            logistic_log_loss(1.0, 3f64.ln()),
            (4.0f64 / 3.0).ln(),
            max_relative = 1e-12
        );
        assert!(logistic_log_loss(0.0, 800.0).is_finite());
    }

    #[test]
    fn skip_marks_nan() {
        let mut m = Pinned {
            ys: vec![0.0, 0.0, 0.0],
            loss: |_| 1.0,
        };
        let l = prequential_loss(&mut m, 1, &mut RngHandle::new(0, 0)).unwrap();
        assert_eq!(l.total, 2.0);
        assert!(l.per_step[0].is_nan());
    }

    #[test]
    fn selection_rules() {
        let g = EtaGrid::explicit(vec![0.5]).unwrap();
        let r = safe_bayes_with(&g, &RngHandle::new(0, 0), |_, _| {
            Ok(SequentialLoss {
                total: 3.0,
                per_step: vec![],
            })
        })
        .unwrap();
        assert_eq!(r.eta_hat, 0.5);

        let g = EtaGrid::explicit(vec![1.0, 0.5, 0.25]).unwrap();
        let r = safe_bayes_with(&g, &RngHandle::new(0, 0), |eta, _| {
            Ok(SequentialLoss {
                total: if eta == 1.0 { 2.0 } else { 1.0 },
                per_step: vec![],
            })
        })
        .unwrap();
        assert_eq!(r.eta_hat, 0.5);

        assert_eq!(select_eta(&[(0.25, 1.0), (0.5, 1.0), (1.0, 3.0)]).unwrap(), 0.5);
        assert!(select_eta(&[(0.25, f64::NAN)]).is_err());
    }

    #[test]
    fn config_errors() {
        let d = Dataset::new(
            nalgebra::DMatrix::zeros(1, 1),
            DVector::zeros(1),
            TaskKind::Regression,
        )
        .unwrap();
        let cfg = SafeBayesConfig {
            draws_per_step: 0,
            ..Default::default()
        };
        let r = sequential_loss_regression(
            1.0,
            &d,
            Features::Raw,
            &LassoHyper::default(),
            &cfg,
            &mut RngHandle::new(0, 0),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
