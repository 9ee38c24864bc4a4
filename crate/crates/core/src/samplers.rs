//! Random variate generators used by the Gibbs schemes.
//!
//! All samplers are pure functions of an explicit [`RngHandle`] and their
//! parameters.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::rng::RngHandle;

/// Default number of series terms kept in the Pólya–Gamma approximation.
pub const PG_TRUNCATION: usize = 300;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Gamma(shape, rate) draw.
pub fn sample_gamma(rng: &mut RngHandle, shape: f64, rate: f64) -> Result<f64> {
    check_positive("gamma shape", shape)?;
    check_positive("gamma rate", rate)?;
    let g = Gamma::new(shape, 1.0).map_err(|e| Error::domain(e.to_string()))?;
    Ok(g.sample(rng) / rate)
}

/// Inverse-Gamma draw with density ∝ x^{-shape-1} e^{-scale/x}.
pub fn sample_inv_gamma(rng: &mut RngHandle, shape: f64, scale: f64) -> Result<f64> {
    check_positive("inverse-gamma shape", shape)?;
    check_positive("inverse-gamma scale", scale)?;
    let g = Gamma::new(shape, 1.0).map_err(|e| Error::domain(e.to_string()))?;
    let mut x = g.sample(rng);
    if x == 0.0 {
        // tiny shapes can underflow the gamma draw
        x = f64::MIN_POSITIVE;
    }
    Ok(scale / x)
}

/// Inverse-Gaussian(mean, shape) draw by the transformation-with-root-selection
/// method (Michael, Schucany & Haas).
pub fn sample_inv_gaussian(rng: &mut RngHandle, mean: f64, shape: f64) -> Result<f64> {
    check_positive("inverse-gaussian mean", mean)?;
    check_positive("inverse-gaussian shape", shape)?;
    let v = rng.standard_normal();
    let y = mean * v * v;
    // smaller root of the quadratic, in a cancellation-free form:
    // mean + mean/(2 shape) (y - sqrt(4 shape y + y^2)) = 4 mean shape y / (y + s)^2
    let x = if y == 0.0 {
        mean
    } else {
        let s = (y * y + 4.0 * shape * y).sqrt();
        let t = y + s;
        mean * (4.0 * shape * y / t) / t
    };
    let u = rng.uniform();
    let draw = if u <= mean / (mean + x) { x } else { mean * (mean / x) };
    Ok(draw.max(f64::MIN_POSITIVE))
}

/// Parameters of the truncated Pólya–Gamma series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgParams {
    pub b: f64,
    pub c: f64,
    pub truncation: usize,
}

impl PgParams {
    pub fn new(b: f64, c: f64) -> Result<Self> {
        Self::with_truncation(b, c, PG_TRUNCATION)
    }

    pub fn with_truncation(b: f64, c: f64, truncation: usize) -> Result<Self> {
        check_positive("polya-gamma b", b)?;
        if !c.is_finite() {
            return Err(Error::domain(format!("polya-gamma c must be finite, got {c}")));
        }
        if truncation == 0 {
            return Err(Error::domain("polya-gamma truncation must be at least 1"));
        }
        Ok(Self { b, c, truncation })
    }

    /// Denominator of series term `n`: 2π²(n + ½)² + c²/2.
    pub fn denominator(&self, n: usize) -> f64 {
        let h = n as f64 + 0.5;
        2.0 * PI * PI * h * h + 0.5 * self.c * self.c
    }

    /// Exact expectation of the truncated sum, `b Σ_{n<N} 1/d_n`.
    pub fn truncated_mean(&self) -> f64 {
        self.b * (0..self.truncation).map(|n| 1.0 / self.denominator(n)).sum::<f64>()
    }

    /// Exact variance of the truncated sum, `b Σ_{n<N} 1/d_n²`.
    pub fn truncated_variance(&self) -> f64 {
        self.b
            * (0..self.truncation)
                .map(|n| self.denominator(n).powi(-2))
                .sum::<f64>()
    }
}

/// Mean of the untruncated PG(b, c) law: (b / 2c) tanh(c / 2), b/4 at c = 0.
pub fn pg_mean(b: f64, c: f64) -> f64 {
    if c.abs() < 1e-8 {
        b / 4.0 * (1.0 - c * c / 12.0)
    } else {
        b / (2.0 * c) * (c / 2.0).tanh()
    }
}

/// Draw Σ_{n<N} g_n / d_n with g_n i.i.d. Gamma(b, 1).
pub fn sample_polya_gamma(rng: &mut RngHandle, params: &PgParams) -> Result<f64> {
    check_positive("polya-gamma b", params.b)?;
    let g = Gamma::new(params.b, 1.0).map_err(|e| Error::domain(e.to_string()))?;
    let half_c2 = 0.5 * params.c * params.c;
    let two_pi2 = 2.0 * PI * PI;
    let mut sum = 0.0;
    for n in 0..params.truncation {
        let h = n as f64 + 0.5;
        sum += g.sample(rng) / (two_pi2 * h * h + half_c2);
    }
    Ok(if sum > 0.0 { sum } else { f64::MIN_POSITIVE })
}

/// Multivariate normal draw `mean + L z` with `L` the lower Cholesky factor.
/// Positive-semidefinite covariances with exactly-zero directions (such as
/// the zero matrix) are accepted and sampled exactly.
pub fn sample_mvn(
    rng: &mut RngHandle,
    mean: &DVector<f64>,
    covariance: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let d = mean.len();
    if covariance.nrows() != d || covariance.ncols() != d {
        return Err(Error::Shape(format!(
            "mean has length {d} but covariance is {}x{}",
            covariance.nrows(),
            covariance.ncols()
        )));
    }
    let chol = Cholesky::factor_semidefinite(covariance)?;
    let z = DVector::from_fn(d, |_, _| rng.standard_normal());
    Ok(mean + chol.l() * z)
}

/// Draw from N(Q⁻¹ r, s² Q⁻¹) given the Cholesky factor of the precision `Q`.
pub fn sample_mvn_precision(
    rng: &mut RngHandle,
    precision: &Cholesky,
    rhs: &DVector<f64>,
    scale: f64,
) -> DVector<f64> {
    let d = precision.dim();
    let mean = precision.solve(rhs);
    let mut z = DVector::from_fn(d, |_, _| rng.standard_normal());
    precision.solve_upper_in_place(&mut z);
    mean + z * scale
}
