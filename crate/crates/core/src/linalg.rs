//! Dense Cholesky factorization with pivot-level error reporting.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

impl Cholesky {
    /// Factor a symmetric positive-definite matrix. Only the lower triangle
    /// of `a` is read.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        Self::factor_impl(a.clone(), false)
    }

    /// Same as [`Cholesky::factor`] but consumes the input buffer.
    pub fn factor_owned(a: DMatrix<f64>) -> Result<Self> {
        Self::factor_impl(a, false)
    }

    /// Factor a positive-semidefinite matrix whose singular directions are
    /// exactly zero columns (e.g. a zero covariance). A zero pivot is
    /// accepted when the rest of its column is exactly zero too.
    pub fn factor_semidefinite(a: &DMatrix<f64>) -> Result<Self> {
        Self::factor_impl(a.clone(), true)
    }

    fn factor_impl(mut a: DMatrix<f64>, allow_zero: bool) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Shape(format!(
                "cholesky of non-square {}x{} matrix",
                n,
                a.ncols()
            )));
        }
        // right-looking, column oriented; touches only the lower triangle
        for j in 0..n {
            let d = a[(j, j)];
            if !d.is_finite() {
                return Err(Error::Numeric(format!("cholesky pivot {j} is {d}")));
            }
            if d <= 0.0 {
                let column_zero = (j + 1..n).all(|i| a[(i, j)] == 0.0);
                if allow_zero && d == 0.0 && column_zero {
                    continue;
                }
                return Err(Error::LinearAlgebra { pivot: j, value: d });
            }
            let ljj = d.sqrt();
            a[(j, j)] = ljj;
            {
                let mut col = a.view_mut((j + 1, j), (n - j - 1, 1));
                col /= ljj;
            }
            for k in j + 1..n {
                let lkj = a[(k, j)];
                if lkj == 0.0 {
                    continue;
                }
                for i in k..n {
                    let lij = a[(i, j)];
                    a[(i, k)] -= lij * lkj;
                }
            }
        }
        for j in 0..n {
            for i in 0..j {
                a[(i, j)] = 0.0;
            }
        }
        Ok(Self { l: a })
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solve `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut DVector<f64>) {
        let n = self.dim();
        for j in 0..n {
            let ljj = self.l[(j, j)];
            if ljj == 0.0 {
                b[j] = 0.0;
                continue;
            }
            b[j] /= ljj;
            let yj = b[j];
            for i in j + 1..n {
                b[i] -= self.l[(i, j)] * yj;
            }
        }
    }

    /// Solve `Lᵀ x = y` in place.
    pub fn solve_upper_in_place(&self, y: &mut DVector<f64>) {
        let n = self.dim();
        for j in (0..n).rev() {
            let ljj = self.l[(j, j)];
            if ljj == 0.0 {
                y[j] = 0.0;
                continue;
            }
            let mut s = y[j];
            for i in j + 1..n {
                s -= self.l[(i, j)] * y[i];
            }
            y[j] = s / ljj;
        }
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut inv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let col = self.solve(&e);
            inv.set_column(j, &col);
        }
        // symmetrize rounding noise
        let t = inv.transpose();
        (inv + t) * 0.5
    }
}

/// `Xᵀ X` for a row-major view of the design.
pub fn gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.tr_mul(x)
}
