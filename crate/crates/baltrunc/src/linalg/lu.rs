//! Linear solves via LU factorization with partial pivoting.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Solve `a * X = b` for possibly multiple right-hand sides.
///
/// Uses row-pivoted Gaussian elimination. A pivot column whose largest
/// magnitude falls below `n * eps * max|a|` marks the matrix as singular to
/// working precision; the error carries that magnitude.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::ShapeMismatch {
            op: "solve",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, b.cols()));
    }

    let tol = n as f64 * f64::EPSILON * a.max_abs();
    let mut lu = a.clone();
    let mut x = b.clone();
    let nrhs = x.cols();
    let mut factors = vec![0.0; n];

    for k in 0..n {
        // Partial pivoting: bring the largest remaining entry of column k up.
        let mut pivot_row = k;
        let mut pivot_mag = lu[(k, k)].abs();
        for i in (k + 1)..n {
            let mag = lu[(i, k)].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag <= tol {
            return Err(Error::SingularMatrix { pivot: pivot_mag });
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
            for j in 0..nrhs {
                let tmp = x[(k, j)];
                x[(k, j)] = x[(pivot_row, j)];
                x[(pivot_row, j)] = tmp;
            }
        }

        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            factors[i] = lu[(i, k)] / pivot;
            lu[(i, k)] = 0.0;
        }
        // Eliminate the trailing block row by row; rows are contiguous, so
        // the inner updates run over plain slices.
        {
            let data = lu.data_mut();
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let row_k = &head[k * n + k + 1..(k + 1) * n];
            for i in (k + 1)..n {
                let f = factors[i];
                if f == 0.0 {
                    continue;
                }
                let offset = (i - k - 1) * n;
                let row_i = &mut tail[offset + k + 1..offset + n];
                for (xi, xk) in row_i.iter_mut().zip(row_k) {
                    *xi -= f * xk;
                }
            }
        }
        if nrhs > 0 {
            let data = x.data_mut();
            let (head, tail) = data.split_at_mut((k + 1) * nrhs);
            let row_k = &head[k * nrhs..(k + 1) * nrhs];
            for i in (k + 1)..n {
                let f = factors[i];
                if f == 0.0 {
                    continue;
                }
                let offset = (i - k - 1) * nrhs;
                let row_i = &mut tail[offset..offset + nrhs];
                for (xi, xk) in row_i.iter_mut().zip(row_k) {
                    *xi -= f * xk;
                }
            }
        }
    }

    // Back substitution on the upper-triangular factor.
    for k in (0..n).rev() {
        let data = x.data_mut();
        let (head, tail) = data.split_at_mut((k + 1) * nrhs);
        let row_k = &mut head[k * nrhs..(k + 1) * nrhs];
        for i in (k + 1)..n {
            let coeff = lu[(k, i)];
            if coeff == 0.0 {
                continue;
            }
            let offset = (i - k - 1) * nrhs;
            let row_i = &tail[offset..offset + nrhs];
            for (xk, xi) in row_k.iter_mut().zip(row_i) {
                *xk -= coeff * xi;
            }
        }
        let pivot = lu[(k, k)];
        for value in row_k.iter_mut() {
            *value /= pivot;
        }
    }
    Ok(x)
}

/// Convenience inverse via `solve(a, I)`.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    solve(a, &Matrix::identity(a.rows()))
}
