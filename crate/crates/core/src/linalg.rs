//! Small dense symmetric-matrix helpers.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Matrices with a larger eigenvalue spread are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// Tr[M⁻¹] of a symmetric positive-definite matrix, via its spectrum.
pub fn trace_inverse(m: &DMatrix<f64>) -> Result<f64> {
    let eig = symmetric_eigenvalues(m);
    let max = eig.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let min = eig.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    if !(min > 0.0) || max / min > MAX_CONDITION {
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(Error::Singular { condition });
    }
    Ok(eig.iter().map(|x| 1.0 / x).sum())
}

pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}
