//! Chain-length configuration and retained posterior draws.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::Features;
use crate::error::{Error, Result};

/// Sweep schedule shared by all Gibbs samplers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl ChainConfig {
    pub fn new(iterations: usize, burn_in: usize, thin: usize) -> Result<Self> {
        let cfg = Self {
            iterations,
            burn_in,
            thin,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::config("thinning interval must be at least 1"));
        }
        if self.iterations <= self.burn_in {
            return Err(Error::config(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.retained() == 0 {
            return Err(Error::config("chain schedule retains no draws"));
        }
        Ok(())
    }

    /// floor((iterations - burn_in) / thin)
    pub fn retained(&self) -> usize {
        self.iterations.saturating_sub(self.burn_in) / self.thin.max(1)
    }

    /// Whether the 1-based sweep `s` is stored.
    pub fn keeps(&self, s: usize) -> bool {
        s > self.burn_in && (s - self.burn_in) % self.thin == 0
    }
}

/// Echo of how a set of draws was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub sampler: String,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub eta: f64,
    pub seed: u64,
    pub stream_id: u64,
}

/// Retained post-burn-in draws. Rows of `draws_beta` are draws.
///
/// `draws_sigma2` is empty for logistic chains; `draws_lambda2` holds λ²
/// for the lasso and the global scale τ² for the horseshoe.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    pub draws_beta: DMatrix<f64>,
    pub draws_sigma2: Vec<f64>,
    pub draws_lambda2: Vec<f64>,
    /// Added back to every regression prediction (the training mean of y).
    pub intercept: f64,
    pub features: Features,
    pub meta: ChainMeta,
}

impl PosteriorSamples {
    pub fn len(&self) -> usize {
        self.draws_beta.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.draws_beta.ncols()
    }

    pub fn beta_mean(&self) -> DVector<f64> {
        self.draws_beta.row_mean().transpose()
    }

    /// Per-coefficient sample standard deviation (0 for a single draw).
    pub fn beta_sd(&self) -> DVector<f64> {
        let m = self.len();
        let mean = self.beta_mean();
        DVector::from_fn(self.dim(), |j, _| {
            if m < 2 {
                return 0.0;
            }
            let ss: f64 = self
                .draws_beta
                .column(j)
                .iter()
                .map(|b| (b - mean[j]).powi(2))
                .sum();
            (ss / (m - 1) as f64).sqrt()
        })
    }

    pub fn sigma2_mean(&self) -> Option<f64> {
        if self.draws_sigma2.is_empty() {
            None
        } else {
            Some(self.draws_sigma2.iter().sum::<f64>() / self.draws_sigma2.len() as f64)
        }
    }

    pub(crate) fn check_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::config("posterior sample set is empty"))
        } else {
            Ok(())
        }
    }

    /// Feature vector for a raw covariate, checked against the draw width.
    pub(crate) fn expand(&self, x_new: &[f64]) -> Result<DVector<f64>> {
        let row = self.features.expand(x_new)?;
        if row.len() != self.dim() {
            return Err(Error::Shape(format!(
                "covariate expands to {} features but draws have {}",
                row.len(),
                self.dim()
            )));
        }
        Ok(row)
    }

    /// Linear predictor of every draw at `row`.
    pub(crate) fn linear_predictions(&self, row: &DVector<f64>) -> DVector<f64> {
        &self.draws_beta * row
    }
}

/// Collects retained draws while a chain runs.
pub(crate) struct DrawCollector {
    cfg: ChainConfig,
    beta: DMatrix<f64>,
    sigma2: Vec<f64>,
    lambda2: Vec<f64>,
    next: usize,
}

impl DrawCollector {
    pub fn new(cfg: ChainConfig, dim: usize) -> Self {
        let m = cfg.retained();
        Self {
            cfg,
            beta: DMatrix::zeros(m, dim),
            sigma2: Vec::with_capacity(m),
            lambda2: Vec::with_capacity(m),
            next: 0,
        }
    }

    pub fn offer(&mut self, sweep: usize, beta: &DVector<f64>, sigma2: Option<f64>, lambda2: Option<f64>) {
        if !self.cfg.keeps(sweep) || self.next >= self.beta.nrows() {
            return;
        }
        self.beta.set_row(self.next, &beta.transpose());
        if let Some(s) = sigma2 {
            self.sigma2.push(s);
        }
        if let Some(l) = lambda2 {
            self.lambda2.push(l);
        }
        self.next += 1;
    }

    pub fn finish(self, intercept: f64, features: Features, meta: ChainMeta) -> PosteriorSamples {
        PosteriorSamples {
            draws_beta: self.beta,
            draws_sigma2: self.sigma2,
            draws_lambda2: self.lambda2,
            intercept,
            features,
            meta,
        }
    }
}
