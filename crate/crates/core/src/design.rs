//! Datasets, Fourier features and the synthetic data generators.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngHandle;

/// Default number of raw features in the misspecified classification data.
pub const DEFAULT_CLASSIFICATION_DIM: usize = 25;

/// Default noise level of the misspecified regression generator.
pub const DEFAULT_REGRESSION_SIGMA: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Regression,
    Classification,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Regression => "regression",
            TaskKind::Classification => "classification",
        }
    }
}

/// Covariates (one row per observation) and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub kind: TaskKind,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, kind: TaskKind) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Shape(format!(
                "{} covariate rows but {} responses",
                x.nrows(),
                y.len()
            )));
        }
        if kind == TaskKind::Classification {
            if let Some(i) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::domain(format!(
                    "classification label at index {i} is {}, expected 0 or 1",
                    y[i]
                )));
            }
        }
        Ok(Self { x, y, kind })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// First `n` observations.
    pub fn prefix(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            x: self.x.rows(0, n).into_owned(),
            y: self.y.rows(0, n).into_owned(),
            kind: self.kind,
        }
    }

    /// Covariate row `i` as a plain vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    pub fn require(&self, kind: TaskKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::TaskMismatch {
                expected: kind.name(),
                found: self.kind.name(),
            })
        }
    }
}

/// Trigonometric basis with `num_functions = 2p + 1` functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierBasis {
    num_functions: usize,
}

impl FourierBasis {
    pub fn new(num_functions: usize) -> Result<Self> {
        if num_functions % 2 == 0 {
            return Err(Error::config(format!(
                "Fourier basis size must be odd, got {num_functions}"
            )));
        }
        Ok(Self { num_functions })
    }

    pub fn num_functions(&self) -> usize {
        self.num_functions
    }

    /// Trigonometric order p.
    pub fn order(&self) -> usize {
        self.num_functions / 2
    }

    pub fn row(&self, x: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.num_functions);
        self.fill_row(x, out.as_mut_slice());
        out
    }

    fn fill_row(&self, x: f64, out: &mut [f64]) {
        out[0] = FRAC_1_SQRT_2 / PI;
        for k in 1..=self.order() {
            let (s, c) = (k as f64 * x).sin_cos();
            out[2 * k - 1] = c / PI;
            out[2 * k] = s / PI;
        }
    }
}

/// (1/π)(2^{-1/2}, cos x, sin x, …, cos px, sin px).
pub fn fourier_row(x: f64, basis: &FourierBasis) -> DVector<f64> {
    basis.row(x)
}

pub fn design_matrix(xs: &[f64], basis: &FourierBasis) -> DMatrix<f64> {
    let k = basis.num_functions();
    let mut m = DMatrix::zeros(xs.len(), k);
    let mut buf = vec![0.0; k];
    for (i, &x) in xs.iter().enumerate() {
        basis.fill_row(x, &mut buf);
        for (j, v) in buf.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

/// How raw covariates are turned into model features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Features {
    /// Expand a scalar covariate through a Fourier basis.
    Fourier { num_functions: usize },
    /// Use the covariates as they are.
    Raw,
}

impl Features {
    pub fn fourier(basis: FourierBasis) -> Self {
        Features::Fourier {
            num_functions: basis.num_functions(),
        }
    }

    fn basis(&self) -> Result<Option<FourierBasis>> {
        match *self {
            Features::Fourier { num_functions } => FourierBasis::new(num_functions).map(Some),
            Features::Raw => Ok(None),
        }
    }

    /// Number of features produced from `raw_dim` covariates.
    pub fn dim(&self, raw_dim: usize) -> usize {
        match *self {
            Features::Fourier { num_functions } => num_functions,
            Features::Raw => raw_dim,
        }
    }

    pub fn design(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self.basis()? {
            None => Ok(x.clone()),
            Some(basis) => {
                if x.ncols() != 1 {
                    return Err(Error::Shape(format!(
                        "Fourier features need one covariate column, got {}",
                        x.ncols()
                    )));
                }
                let xs: Vec<f64> = x.column(0).iter().copied().collect();
                Ok(design_matrix(&xs, &basis))
            }
        }
    }

    pub fn expand(&self, x_new: &[f64]) -> Result<DVector<f64>> {
        match self.basis()? {
            None => Ok(DVector::from_column_slice(x_new)),
            Some(basis) => {
                if x_new.len() != 1 {
                    return Err(Error::Shape(format!(
                        "Fourier features need a scalar covariate, got {} values",
                        x_new.len()
                    )));
                }
                Ok(basis.row(x_new[0]))
            }
        }
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Heteroscedastic "wrong model" regression data: each point is
/// (X', ε) with X' ~ U[-1, 1], ε ~ N(0, σ²), replaced by (0, 0) on a fair
/// coin flip. Draw order per point: X', ε, coin.
pub fn simulate_regression_wrong(n: usize, sigma: f64, rng: &mut RngHandle) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::config("sample size must be at least 1"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be non-negative, got {sigma}")));
    }
    let mut x = DMatrix::zeros(n, 1);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let xp = 2.0 * rng.uniform() - 1.0;
        let yp = sigma * rng.standard_normal();
        if rng.bernoulli(0.5) {
            x[(i, 0)] = xp;
            y[i] = yp;
        }
    }
    Dataset::new(x, y, TaskKind::Regression)
}

/// Misspecified classification data: X is n×p standard normal; per row a
/// latent Z ~ N(0, σ²), with probability ½ both Z and X_{i,1} are zeroed;
/// Y ~ Bernoulli(logistic(Z)). Draw order per row: X row, Z, coin, label.
pub fn simulate_classification_wrong(
    n: usize,
    p: usize,
    sigma: f64,
    rng: &mut RngHandle,
) -> Result<Dataset> {
    if n == 0 || p == 0 {
        return Err(Error::config(format!(
            "sample size and dimension must be positive, got n={n}, p={p}"
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be non-negative, got {sigma}")));
    }
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = rng.standard_normal();
        }
        let mut z = sigma * rng.standard_normal();
        if rng.bernoulli(0.5) {
            z = 0.0;
            x[(i, 0)] = 0.0;
        }
        y[i] = if rng.bernoulli(logistic(z)) { 1.0 } else { 0.0 };
    }
    Dataset::new(x, y, TaskKind::Classification)
}

/// Well-specified logistic data with standard normal covariates.
pub fn simulate_logistic_well(n: usize, beta: &[f64], rng: &mut RngHandle) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::config("sample size must be at least 1"));
    }
    if beta.is_empty() {
        return Err(Error::config("coefficient vector must be non-empty"));
    }
    let p = beta.len();
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let mut eta = 0.0;
        for j in 0..p {
            let v = rng.standard_normal();
            x[(i, j)] = v;
            eta += v * beta[j];
        }
        y[i] = if rng.bernoulli(logistic(eta)) { 1.0 } else { 0.0 };
    }
    Dataset::new(x, y, TaskKind::Classification)
}

/// One of the synthetic data-generating processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Generator {
    RegressionWrong { sigma: f64 },
    ClassificationWrong { p: usize, sigma: f64 },
    LogisticWell { beta: Vec<f64> },
}

impl Generator {
    pub fn simulate(&self, n: usize, rng: &mut RngHandle) -> Result<Dataset> {
        match self {
            Generator::RegressionWrong { sigma } => simulate_regression_wrong(n, *sigma, rng),
            Generator::ClassificationWrong { p, sigma } => {
                simulate_classification_wrong(n, *p, *sigma, rng)
            }
            Generator::LogisticWell { beta } => simulate_logistic_well(n, beta, rng),
        }
    }

    pub fn kind(&self) -> TaskKind {
        match self {
            Generator::RegressionWrong { .. } => TaskKind::Regression,
            _ => TaskKind::Classification,
        }
    }
}
