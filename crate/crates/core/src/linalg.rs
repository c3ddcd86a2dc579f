//! Small dense SPD helpers.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Cholesky factorization of a symmetric positive definite matrix.
pub struct Spd {
    chol: Cholesky<f64, Dyn>,
}

impl Spd {
    pub fn factor(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Geometry(format!(
                "metric matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("metric matrix has non-finite entries".into()));
        }
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * (1.0 + m.amax()) {
            return Err(Error::Geometry(format!(
                "metric matrix is not symmetric (deviation {asym:e})"
            )));
        }
        Cholesky::new(m)
            .map(|chol| Self { chol })
            .ok_or_else(|| Error::Geometry("metric matrix is not positive definite".into()))
    }

    pub fn l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn sqrt_det(&self) -> f64 {
        self.chol.l_dirty().diagonal().iter().product()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let v = self.chol.solve(&DVector::from_column_slice(b));
        v.iter().copied().collect()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    /// Columns form an orthonormal frame for the factored metric: `L^{-T}`.
    pub fn orthonormal_frame(&self) -> DMatrix<f64> {
        let l = self.chol.l();
        let n = l.nrows();
        let linv = l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("Cholesky factor has a positive diagonal");
        linv.transpose()
    }
}

pub fn is_spd(m: &DMatrix<f64>) -> bool {
    Spd::factor(m.clone()).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_frame() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let s = Spd::factor(m.clone()).unwrap();
        assert!((s.sqrt_det() - libm::sqrt(11.0)).abs() < 1e-14);
        let e = s.orthonormal_frame();
        let gram = e.transpose() * &m * &e;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(Spd::factor(m), Err(Error::Geometry(_))));
    }
}
