//! Horseshoe-prior regression baseline.
//!
//! β_j | λ_j, τ, σ ~ N(0, σ²τ²λ_j²) with half-Cauchy local scales λ_j and
//! global scale τ. Each half-Cauchy is written through an inverse-gamma
//! auxiliary (λ² | ν ~ IG(½, 1/ν), ν ~ IG(½, 1)), which turns every full
//! conditional into a standard draw. σ² carries the same inverse-gamma
//! prior as the lasso and the intercept is removed by centering.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::blasso::RegressionStats;
use crate::design::{Dataset, Features, TaskKind};
use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::posterior::{ChainConfig, ChainMeta, DrawCollector, PosteriorSamples};
use crate::rng::RngHandle;
use crate::samplers::{sample_inv_gamma, sample_mvn_precision};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeHyper {
    /// Inverse-gamma shape of the σ² prior.
    pub alpha: f64,
    /// Inverse-gamma scale of the σ² prior.
    pub gamma: f64,
}

impl Default for HorseshoeHyper {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorseshoeChainState {
    pub beta: DVector<f64>,
    pub sigma2: f64,
    pub local2: DVector<f64>,
    pub global2: f64,
    pub aux_local: DVector<f64>,
    pub aux_global: f64,
}

#[derive(Debug, Clone)]
pub struct HorseshoeSampler {
    stats: RegressionStats,
    hyper: HorseshoeHyper,
    state: HorseshoeChainState,
}

impl HorseshoeSampler {
    pub fn new(stats: RegressionStats, hyper: HorseshoeHyper) -> Result<Self> {
        if !(hyper.alpha > 0.0 && hyper.gamma > 0.0) {
            return Err(Error::domain("sigma2 prior parameters must be positive"));
        }
        let k = stats.dim();
        let state = HorseshoeChainState {
            beta: DVector::zeros(k),
            sigma2: stats.initial_sigma2(),
            local2: DVector::from_element(k, 1.0),
            global2: 1.0,
            aux_local: DVector::from_element(k, 1.0),
            aux_global: 1.0,
        };
        Ok(Self {
            stats,
            hyper,
            state,
        })
    }

    pub fn state(&self) -> &HorseshoeChainState {
        &self.state
    }

    /// β → σ² → λ² → τ² → ν → ξ.
    pub fn sweep(&mut self, rng: &mut RngHandle) -> Result<()> {
        let k = self.stats.dim();
        let st = &mut self.state;

        let mut q = self.stats.xtx().clone();
        for j in 0..k {
            q[(j, j)] += 1.0 / (st.global2 * st.local2[j]);
        }
        let chol = Cholesky::factor_owned(q)?;
        st.beta = sample_mvn_precision(rng, &chol, &self.stats.xty_centered(), st.sigma2.sqrt());
        if st.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numeric("beta draw".into()));
        }

        let scaled: f64 = (0..k)
            .map(|j| st.beta[j] * st.beta[j] / st.local2[j])
            .sum();
        let dof = self.stats.len().saturating_sub(1) as f64;
        let shape = dof / 2.0 + k as f64 / 2.0 + self.hyper.alpha;
        let scale = self.stats.rss(&st.beta) / 2.0 + scaled / st.global2 / 2.0 + self.hyper.gamma;
        st.sigma2 = sample_inv_gamma(rng, shape, scale)?;

        for j in 0..k {
            let b2 = st.beta[j] * st.beta[j];
            let scale = 1.0 / st.aux_local[j] + b2 / (2.0 * st.global2 * st.sigma2);
            st.local2[j] = sample_inv_gamma(rng, 1.0, scale)?;
        }

        let scaled: f64 = (0..k)
            .map(|j| st.beta[j] * st.beta[j] / st.local2[j])
            .sum();
        let scale = 1.0 / st.aux_global + scaled / (2.0 * st.sigma2);
        st.global2 = sample_inv_gamma(rng, (k as f64 + 1.0) / 2.0, scale)?;

        for j in 0..k {
            st.aux_local[j] = sample_inv_gamma(rng, 1.0, 1.0 + 1.0 / st.local2[j])?;
        }
        st.aux_global = sample_inv_gamma(rng, 1.0, 1.0 + 1.0 / st.global2)?;
        Ok(())
    }
}

pub fn run_horseshoe(
    data: &Dataset,
    features: Features,
    hyper: &HorseshoeHyper,
    chain: &ChainConfig,
    rng: &mut RngHandle,
) -> Result<PosteriorSamples> {
    data.require(TaskKind::Regression)?;
    chain.validate()?;
    let x = features.design(&data.x)?;
    let stats = RegressionStats::from_design(&x, &data.y)?;
    let intercept = stats.y_mean();
    let mut sampler = HorseshoeSampler::new(stats, *hyper)?;
    let mut out = DrawCollector::new(*chain, x.ncols());
    let meta = ChainMeta {
        sampler: "horseshoe".into(),
        iterations: chain.iterations,
        burn_in: chain.burn_in,
        thin: chain.thin,
        eta: 1.0,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    };
    for s in 1..=chain.iterations {
        sampler.sweep(rng)?;
        let st = sampler.state();
        out.offer(s, &st.beta, Some(st.sigma2), Some(st.global2));
    }
    Ok(out.finish(intercept, features, meta))
}

/// Same contract as [`crate::blasso::predict_blasso`].
pub fn predict_horseshoe(
    samples: &PosteriorSamples,
    intercept: f64,
    x_new: &[f64],
) -> Result<(f64, DVector<f64>)> {
    crate::blasso::predict_blasso(samples, intercept, x_new)
}
