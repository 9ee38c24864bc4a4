//! Generalized (learning-rate tempered) Bayesian inference for linear and
//! logistic regression.
//!
//! The η-posterior raises the likelihood to a learning rate η before
//! combining it with the prior. This crate provides Gibbs samplers for the
//! tempered Bayesian lasso and tempered logistic regression (Pólya–Gamma
//! augmentation), a horseshoe baseline, the SafeBayes procedure for
//! choosing η from data, risk estimators and numerical central-condition
//! checks, plus the synthetic generators used to exercise them.

pub mod blasso;
pub mod blogistic;
pub mod cli;
pub mod design;
pub mod error;
pub mod eval;
pub mod horseshoe;
pub mod io;
pub mod linalg;
pub mod posterior;
pub mod rng;
pub mod safebayes;
pub mod samplers;

pub use error::{Error, Result};
pub use rng::RngHandle;
