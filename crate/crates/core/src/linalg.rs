//! Symmetric positive-definite helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
#[allow(unused_imports)] // f64 methods when `std` is absent
use num_traits::Float;

use crate::error::{domain, Error, Result};

/// A validated symmetric positive-definite matrix with its Cholesky factor.
#[derive(Debug, Clone)]
pub(crate) struct Spd {
    pub matrix: DMatrix<f64>,
    pub chol: Cholesky<f64, Dyn>,
}

impl Spd {
    pub fn new(matrix: DMatrix<f64>, what: &str) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(domain(alloc::format!("{what} has non-finite entries")));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(domain(alloc::format!("{what} is not symmetric")));
                }
            }
        }
        let chol = Cholesky::new(matrix.clone())
            .ok_or_else(|| domain(alloc::format!("{what} is not positive definite")))?;
        Ok(Self { matrix, chol })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let inv = self.chol.inverse();
        // symmetrize against round-off
        (&inv + inv.transpose()) * 0.5
    }

    pub fn log_det(&self) -> f64 {
        let l = self.chol.l_dirty();
        2.0 * (0..self.dim()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    /// `v' A^{-1} v`
    pub fn inv_quad(&self, v: &DVector<f64>) -> f64 {
        let w = self.chol.solve(v);
        v.dot(&w)
    }

    pub fn lower(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}

pub(crate) fn check_len(v: &DVector<f64>, d: usize) -> Result<()> {
    if v.len() == d {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: d,
            found: v.len(),
        })
    }
}
