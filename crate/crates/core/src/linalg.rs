//! Small dense SPD helpers shared by the classifier builders.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetry tolerance, scaled by the largest absolute entry when that exceeds one.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest admissible Cholesky pivot relative to the largest diagonal entry.
pub const PIVOT_TOL: f64 = 1e-10;

/// Cholesky factor `A = L Lᵀ` of a validated symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    lower: DMatrix<f64>,
}

impl SpdFactor {
    /// Factors `mat`, naming it in the error when it is not SPD.
    pub fn new(mat: &DMatrix<f64>, name: &str) -> Result<Self> {
        let n = mat.nrows();
        if n == 0 || mat.ncols() != n {
            return Err(Error::NotSpd { name: name.into() });
        }
        if !is_symmetric(mat) {
            return Err(Error::NotSpd { name: name.into() });
        }
        let sym = (mat + mat.transpose()) * 0.5;
        let max_diag = sym.diagonal().iter().cloned().fold(f64::MIN, f64::max);
        if !(max_diag > 0.0) || !max_diag.is_finite() {
            return Err(Error::NotSpd { name: name.into() });
        }
        let chol = sym.cholesky().ok_or_else(|| Error::NotSpd { name: name.into() })?;
        let lower = chol.l();
        let floor = PIVOT_TOL * max_diag;
        if lower.diagonal().iter().any(|l| !(l * l > floor)) {
            return Err(Error::NotSpd { name: name.into() });
        }
        Ok(SpdFactor { lower })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    /// `A⁻¹ b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let y = self.forward(b);
        self.lower
            .tr_solve_lower_triangular(&y)
            .expect("nonzero pivots checked at construction")
    }

    /// `vᵀ A⁻¹ v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        self.forward(v).norm_squared()
    }

    /// Explicit inverse; only for verification paths.
    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut inv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            inv.set_column(j, &self.solve(&e));
        }
        inv
    }

    fn forward(&self, b: &DVector<f64>) -> DVector<f64> {
        self.lower
            .solve_lower_triangular(b)
            .expect("nonzero pivots checked at construction")
    }
}

pub fn is_symmetric(mat: &DMatrix<f64>) -> bool {
    if mat.nrows() != mat.ncols() {
        return false;
    }
    let scale = mat.amax().max(1.0);
    let n = mat.nrows();
    (0..n).all(|i| (0..i).all(|j| (mat[(i, j)] - mat[(j, i)]).abs() <= SYMMETRY_TOL * scale))
}

/// Symmetric rank-one accumulation `acc += w · v vᵀ`.
pub fn add_outer(acc: &mut DMatrix<f64>, v: &DVector<f64>, w: f64) {
    acc.ger(w, v, v, 1.0);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_quadratic_forms_agree_with_explicit_inverse() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let f = SpdFactor::new(&a, "a").unwrap();
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let inv = a.clone().try_inverse().unwrap();
        assert!((f.solve(&v) - &inv * &v).norm() < 1e-12);
        assert!((f.quad_form(&v) - v.dot(&(&inv * &v))).abs() < 1e-12);
        assert!((f.inverse() - inv).norm() < 1e-12);
    }

    #[test]
    fn rejects_singular_and_asymmetric() {
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            SpdFactor::new(&singular, "R̄"),
            Err(Error::NotSpd { name }) if name == "R̄"
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 2.0]);
        assert!(SpdFactor::new(&asym, "x").is_err());
        let nearly = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-12]);
        assert!(SpdFactor::new(&nearly, "x").is_err());
    }
}
