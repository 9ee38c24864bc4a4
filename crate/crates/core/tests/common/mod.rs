#![allow(dead_code)]
//! Independent oracles shared by the integration tests.

use genbayes::blasso::{LambdaPrior, LassoChainState, LassoHyper, LassoSampler, RegressionStats};
use genbayes::samplers::{
    sample_gamma, sample_inv_gamma, sample_inv_gaussian, sample_polya_gamma, PgParams,
};
use genbayes::RngHandle;
use nalgebra::{DMatrix, DVector};

/// Mean and standard error of iid draws.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Mean and batch-means standard error of a correlated series.
pub fn batch_means(xs: &[f64], batches: usize) -> (f64, f64) {
    let len = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    mean_se(&means)
}

/// PG(b, c) empirical mean against the truncated-series mean: (empirical, target, se).
pub fn pg_mean_check(b: f64, c: f64, draws: usize, seed: u64) -> (f64, f64, f64) {
    let params = PgParams::new(b, c).unwrap();
    let mut rng = RngHandle::new(seed, 0);
    let xs: Vec<f64> = (0..draws)
        .map(|_| sample_polya_gamma(&mut rng, &params).unwrap())
        .collect();
    let (m, se) = mean_se(&xs);
    (m, params.truncated_mean(), se)
}

/// Inverse-gamma mean check: (empirical, exact, se).
pub fn inv_gamma_check(shape: f64, scale: f64, draws: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = RngHandle::new(seed, 0);
    let xs: Vec<f64> = (0..draws)
        .map(|_| sample_inv_gamma(&mut rng, shape, scale).unwrap())
        .collect();
    let (m, se) = mean_se(&xs);
    (m, scale / (shape - 1.0), se)
}

/// Inverse-Gaussian mean and variance: ((emp mean, mean, se), (emp var, var, se)).
pub fn inv_gaussian_check(
    mean: f64,
    shape: f64,
    draws: usize,
    seed: u64,
) -> ((f64, f64, f64), (f64, f64, f64)) {
    let mut rng = RngHandle::new(seed, 0);
    let xs: Vec<f64> = (0..draws)
        .map(|_| sample_inv_gaussian(&mut rng, mean, shape).unwrap())
        .collect();
    let (m, se) = mean_se(&xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let (v, vse) = mean_se(&sq);
    ((m, mean, se), (v, mean.powi(3) / shape, vse))
}

/// Both sides of (e^ψ)^a/(1+e^ψ)^b = 2^{−b} e^{κψ} E[e^{−ωψ²/2}], ω ~ PG(b, 0):
/// (exact lhs, MC rhs, se of rhs, truncation allowance).
pub fn tilting_check(a: f64, b: f64, psi: f64, draws: usize, seed: u64) -> (f64, f64, f64, f64) {
    let lhs = (a * psi).exp() / (1.0 + psi.exp()).powf(b);
    let params = PgParams::new(b, 0.0).unwrap();
    let mut rng = RngHandle::new(seed, 0);
    let kappa = a - b / 2.0;
    let pre = 2f64.powf(-b) * (kappa * psi).exp();
    let xs: Vec<f64> = (0..draws)
        .map(|_| pre * (-sample_polya_gamma(&mut rng, &params).unwrap() * psi * psi / 2.0).exp())
        .collect();
    let (m, se) = mean_se(&xs);
    // dropped series tail shifts ω by its mean; e^{-x} is 1-Lipschitz on x ≥ 0;
    // the second term covers rounding in the sum of `draws` terms
    let tail = b / 4.0 - params.truncated_mean();
    let rounding = draws as f64 * f64::EPSILON * lhs.abs();
    (lhs, m, se, pre * tail * psi * psi / 2.0 + rounding)
}

/// Geweke test statistics for the lasso sampler on a tiny instance.
pub struct GewekeReport {
    pub name: &'static str,
    pub marginal: (f64, f64),
    pub successive: (f64, f64),
}

impl GewekeReport {
    pub fn z(&self) -> f64 {
        (self.marginal.0 - self.successive.0)
            / (self.marginal.1.powi(2) + self.successive.1.powi(2)).sqrt()
    }
}

const GEWEKE_ALPHA: f64 = 8.0;
const GEWEKE_GAMMA: f64 = 7.0;
const GEWEKE_R: f64 = 3.0;
const GEWEKE_DELTA: f64 = 2.0;

fn geweke_design() -> DMatrix<f64> {
    let s = 10f64.sqrt();
    DMatrix::from_column_slice(5, 1, &[-2.0 / s, -1.0 / s, 0.0, 1.0 / s, 2.0 / s])
}

fn prior_draw(rng: &mut RngHandle) -> LassoChainState {
    let lambda2 = sample_gamma(rng, GEWEKE_R, GEWEKE_DELTA).unwrap();
    let sigma2 = sample_inv_gamma(rng, GEWEKE_ALPHA, GEWEKE_GAMMA).unwrap();
    let tau2 = sample_gamma(rng, 1.0, lambda2 / 2.0).unwrap();
    let beta = (sigma2 * tau2).sqrt() * rng.standard_normal();
    LassoChainState {
        beta: DVector::from_element(1, beta),
        sigma2,
        tau2: DVector::from_element(1, tau2),
        lambda2,
    }
}

/// ỹ = Xβ + Pε with P the centering projection, so that the centered
/// likelihood used by the sampler is the exact data density.
fn simulate_centered(x: &DMatrix<f64>, st: &LassoChainState, rng: &mut RngHandle) -> DVector<f64> {
    let n = x.nrows();
    let eps = DVector::from_fn(n, |_, _| st.sigma2.sqrt() * rng.standard_normal());
    let centered = eps.add_scalar(-eps.mean());
    x * &st.beta + centered
}

pub fn geweke_blasso(marginal_draws: usize, successive_sweeps: usize, seed: u64) -> Vec<GewekeReport> {
    let x = geweke_design();
    let hyper = LassoHyper {
        alpha: GEWEKE_ALPHA,
        gamma: GEWEKE_GAMMA,
        lambda_prior: LambdaPrior::GammaOnLambdaSq {
            r: GEWEKE_R,
            delta: GEWEKE_DELTA,
        },
    };
    let mut rng = RngHandle::new(seed, 0);
    let funcs: [(&'static str, fn(&LassoChainState) -> f64); 4] = [
        ("E[beta]", |s| s.beta[0]),
        ("E[beta^2]", |s| s.beta[0].powi(2)),
        ("E[sigma2]", |s| s.sigma2),
        ("E[sigma2^2]", |s| s.sigma2.powi(2)),
    ];

    let prior: Vec<LassoChainState> = (0..marginal_draws).map(|_| prior_draw(&mut rng)).collect();

    let init = prior_draw(&mut rng);
    let y = simulate_centered(&x, &init, &mut rng);
    let mut sampler =
        LassoSampler::new(RegressionStats::from_design(&x, &y).unwrap(), hyper, 1.0).unwrap();
    sampler.set_state(init).unwrap();
    let mut chain = Vec::with_capacity(successive_sweeps);
    for _ in 0..successive_sweeps {
        sampler.sweep(&mut rng).unwrap();
        let y = simulate_centered(&x, sampler.state(), &mut rng);
        *sampler.stats_mut() = RegressionStats::from_design(&x, &y).unwrap();
        chain.push(sampler.state().clone());
    }

    funcs
        .iter()
        .map(|&(name, f)| {
            let a: Vec<f64> = prior.iter().map(f).collect();
            let b: Vec<f64> = chain.iter().map(f).collect();
            GewekeReport {
                name,
                marginal: mean_se(&a),
                successive: batch_means(&b, 100),
            }
        })
        .collect()
}
