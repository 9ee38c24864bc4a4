mod common;

use genbayes::blasso::{run_blasso, LassoHyper};
use genbayes::blogistic::LogisticPrior;
use genbayes::design::{simulate_classification_wrong, simulate_regression_wrong, Dataset, Features};
use genbayes::posterior::ChainConfig;
use genbayes::safebayes::{
    gaussian_log_loss, safe_bayes, sequential_loss_classification, sequential_loss_regression,
    ChainMode, EtaGrid, ModelSpec, SafeBayesConfig,
};
use genbayes::RngHandle;
use nalgebra::{DMatrix, DVector};

fn lasso_model(k: usize) -> ModelSpec {
    ModelSpec::Lasso {
        features: Features::Fourier { num_functions: k },
        hyper: LassoHyper::default(),
    }
}

#[test]
fn step_matches_fresh_chain_on_prefix() {
    let data = simulate_regression_wrong(12, 0.25, &mut RngHandle::new(1, 0)).unwrap();
    let features = Features::Fourier { num_functions: 5 };
    let hyper = LassoHyper::default();
    let cfg = SafeBayesConfig {
        draws_per_step: 20_000,
        burn_per_step: 500,
        skip_initial: 1,
        mode: ChainMode::Warm,
    };
    let seq = sequential_loss_regression(0.5, &data, features, &hyper, &cfg, &mut RngHandle::new(2, 0))
        .unwrap();
    let i = 9;
    let prefix = data.prefix(i);
    let chain = ChainConfig::new(21_000, 1000, 1).unwrap();
    let s = run_blasso(&prefix, features, &hyper, 0.5, &chain, &mut RngHandle::new(3, 0)).unwrap();
    let row = features.expand(&data.row(i)).unwrap();
    let losses: Vec<f64> = (0..s.len())
        .map(|k| {
            let mean = s.intercept + row.dot(&s.draws_beta.row(k).transpose());
            gaussian_log_loss(data.y[i], mean, s.draws_sigma2[k])
        })
        .collect();
    let (fresh, se) = common::batch_means(&losses, 40);
    let warm = seq.per_step[i];
    assert!(
        (warm - fresh).abs() < 5.0 * 2f64.sqrt() * se,
        "step {i}: warm {warm} vs fresh {fresh} (se {se})"
    );
    assert!(seq.per_step[0].is_nan());
    let total: f64 = seq.per_step.iter().filter(|v| !v.is_nan()).sum();
    assert_eq!(total, seq.total);
}

#[test]
fn losses_are_keyed_by_eta_not_position() {
    let data = simulate_regression_wrong(15, 0.25, &mut RngHandle::new(4, 0)).unwrap();
    let cfg = SafeBayesConfig {
        draws_per_step: 20,
        burn_per_step: 20,
        ..SafeBayesConfig::default()
    };
    let rng = RngHandle::new(5, 0);
    let full = safe_bayes(&data, &EtaGrid::dyadic(1, 2).unwrap(), &lasso_model(5), &cfg, &rng).unwrap();
    let single = safe_bayes(&data, &EtaGrid::explicit(vec![0.5]).unwrap(), &lasso_model(5), &cfg, &rng)
        .unwrap();
    assert_eq!(single.eta_hat, 0.5);
    let s_half = full.s.iter().find(|(e, _)| *e == 0.5).unwrap().1;
    assert_eq!(single.s[0].1, s_half);
    let reordered = safe_bayes(
        &data,
        &EtaGrid::explicit(vec![0.25, 1.0, 0.5]).unwrap(),
        &lasso_model(5),
        &cfg,
        &rng,
    )
    .unwrap();
    assert_eq!(reordered.s, full.s);
    assert_eq!(reordered.eta_hat, full.eta_hat);
}

#[test]
fn duplicating_classification_data_never_lowers_loss() {
    let data = simulate_classification_wrong(15, 3, 1.0, &mut RngHandle::new(6, 0)).unwrap();
    let n = data.len();
    let doubled = Dataset::new(
        DMatrix::from_fn(2 * n, data.dim(), |i, j| data.x[(i % n, j)]),
        DVector::from_fn(2 * n, |i, _| data.y[i % n]),
        data.kind,
    )
    .unwrap();
    let prior = LogisticPrior::isotropic(3, 10.0).unwrap();
    let cfg = SafeBayesConfig {
        draws_per_step: 10,
        burn_per_step: 10,
        ..SafeBayesConfig::default()
    };
    for eta in [1.0, 0.25] {
        let run = |d: &Dataset| {
            sequential_loss_classification(eta, d, Features::Raw, &prior, &cfg, &mut RngHandle::new(7, 0))
                .unwrap()
                .total
        };
        assert!(run(&doubled) >= run(&data));
    }
}

#[test]
fn cold_and_warm_modes_run() {
    let data = simulate_regression_wrong(8, 0.25, &mut RngHandle::new(8, 0)).unwrap();
    for mode in [ChainMode::Warm, ChainMode::Cold] {
        let cfg = SafeBayesConfig {
            draws_per_step: 5,
            burn_per_step: 5,
            skip_initial: 0,
            mode,
        };
        let r = sequential_loss_regression(
            1.0,
            &data,
            Features::Fourier { num_functions: 3 },
            &LassoHyper::default(),
            &cfg,
            &mut RngHandle::new(9, 0),
        )
        .unwrap();
        assert!(r.total.is_finite());
        assert!(r.per_step.iter().all(|v| v.is_finite()));
    }
}
