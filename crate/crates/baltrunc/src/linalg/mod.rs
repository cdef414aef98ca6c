//! Dense numerical linear algebra kernels.
//!
//! Everything downstream (state-space transforms, gramian solvers, balancing)
//! is built on the routines in this module: LU solves, QR, guarded Cholesky,
//! Jacobi SVD, real Schur form, and the matrix exponential.

mod cholesky;
mod complex;
mod eig;
mod expm;
mod lu;
mod matrix;
mod qr;
mod svd;

pub use cholesky::{cholesky, cholesky_psd, cholesky_solve, CholeskyFactor, PsdFactor};
pub use complex::ComplexMatrix;
pub use eig::{eigenvalues, real_schur, RealSchur};
pub use expm::expm;
pub use lu::{inverse, solve};
pub use matrix::Matrix;
pub use qr::{complete_basis, qr_full};
pub use svd::{svd, Svd};

pub(crate) use eig::eigenvalues_of_quasi_triangular;

use crate::error::Result;

/// Default relative threshold for rank decisions: max(rows, cols) * eps,
/// scaled by the largest singular value at the point of use.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Number of singular values exceeding `rel_tol` times the largest one.
/// A zero matrix has rank zero regardless of the tolerance.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> Result<usize> {
    let values = svd(m)?.s;
    let largest = values.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(values.iter().filter(|&&s| s > rel_tol * largest).count())
}
