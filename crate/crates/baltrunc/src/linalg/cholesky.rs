//! Cholesky factorization with a guarded pivot clamp for nearly
//! positive-semidefinite inputs such as computed gramians.

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Result of a guarded Cholesky factorization: `l` is lower triangular with
/// `l * l^T` equal to the (possibly nudged) input, and `clamped` counts how
/// many pivots had to be lifted off the floor.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub l: Matrix,
    pub clamped: usize,
}

/// A pivot this far below zero, relative to `||s||_F`, cannot be a rounding
/// shadow of a semidefinite matrix: the input is genuinely indefinite.
const INDEFINITE_REL: f64 = 1e-6;

/// Factor a symmetric matrix `s` as `l * l^T`.
///
/// With `shift_tol = 0` the factorization is strict: any nonpositive pivot
/// yields `NotPositiveDefinite`.
///
/// With `shift_tol > 0` it is guarded, for inputs that are semidefinite up
/// to roundoff (computed gramians above all): every pivot below the floor
/// `shift_tol * ||s||_F` — tiny positive ones included, since dividing by
/// them would poison all later columns — is lifted to the floor, and
/// `clamped` counts the lifts. Only a pivot below `-1e-6 * ||s||_F`, far
/// beyond anything roundoff can produce, is reported as indefinite.
pub fn cholesky(s: &Matrix, shift_tol: f64) -> Result<CholeskyFactor> {
    if !s.is_square() {
        return Err(Error::ShapeMismatch {
            op: "cholesky",
            left: s.shape(),
            right: s.shape(),
        });
    }
    let asym = s.asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric { deviation: asym });
    }
    let n = s.rows();
    let scale = s.fro_norm();
    let floor = shift_tol * scale;
    let reject_below = if shift_tol > 0.0 {
        -INDEFINITE_REL * scale
    } else {
        0.0
    };
    let mut l = Matrix::zeros(n, n);
    let mut clamped = 0usize;

    for k in 0..n {
        let mut diag = s[(k, k)];
        for j in 0..k {
            diag -= l[(k, j)] * l[(k, j)];
        }
        if diag <= reject_below {
            return Err(Error::NotPositiveDefinite { value: diag });
        }
        if diag < floor || diag <= 0.0 {
            diag = floor;
            clamped += 1;
        }
        let pivot = diag.sqrt();
        l[(k, k)] = pivot;
        for i in (k + 1)..n {
            let mut acc = s[(i, k)];
            for j in 0..k {
                acc -= l[(i, j)] * l[(k, j)];
            }
            l[(i, k)] = acc / pivot;
        }
    }
    Ok(CholeskyFactor { l, clamped })
}

/// A square factor of a positive-semidefinite matrix from the pivoted
/// factorization below: `f * f^T` reconstructs the input up to the noise
/// floor. The leading `rank` columns (in pivot order) carry the genuinely
/// positive directions; the rest are `sqrt(floor)` times unit vectors —
/// orthogonal padding that keeps `f` invertible without amplifying noise.
#[derive(Debug, Clone)]
pub struct PsdFactor {
    pub f: Matrix,
    pub rank: usize,
    /// True when padding was needed, i.e. the matrix was rank-deficient (or
    /// indefinite within roundoff) at the requested floor.
    pub clamped: bool,
}

/// Rank-revealing factorization of a matrix that is positive semidefinite
/// up to roundoff, such as a computed gramian.
///
/// Diagonal-pivoted Cholesky: each step eliminates the direction with the
/// largest remaining updated diagonal, and the factorization stops once that
/// maximum falls to `rel_floor` times the largest initial diagonal. Stopping
/// instead of dividing by a tiny (or slightly negative) pivot is what keeps
/// the factor's entries bounded: one near-zero pivot would otherwise scale
/// an entire column of noise up by `1/sqrt(pivot)` and poison every later
/// step. The permutation is folded back into the returned factor.
///
/// Rejects inputs whose diagonal is negative beyond roundoff — no genuinely
/// positive-semidefinite matrix has one.
pub fn cholesky_psd(s: &Matrix, rel_floor: f64) -> Result<PsdFactor> {
    if !s.is_square() {
        return Err(Error::ShapeMismatch {
            op: "cholesky_psd",
            left: s.shape(),
            right: s.shape(),
        });
    }
    let asym = s.asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric { deviation: asym });
    }
    let n = s.rows();
    let scale = s.fro_norm();
    let mut d: Vec<f64> = (0..n).map(|i| s[(i, i)]).collect();
    if let Some(&bad) = d.iter().find(|&&v| v < -INDEFINITE_REL * scale) {
        return Err(Error::NotPositiveDefinite { value: bad });
    }
    let anchor = d.iter().fold(0.0f64, |a, &b| a.max(b));
    let floor = rel_floor * anchor;

    // Left-looking elimination in pivot order; `perm[i]` is the original
    // index living at position `i`, and `s` is only ever read through it.
    let mut l = Matrix::zeros(n, n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rank = n;
    for k in 0..n {
        let (offset, &dmax) = d[k..]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty tail");
        if dmax <= floor || dmax <= 0.0 {
            rank = k;
            break;
        }
        let jmax = k + offset;
        if jmax != k {
            perm.swap(k, jmax);
            d.swap(k, jmax);
            for j in 0..k {
                let tmp = l[(k, j)];
                l[(k, j)] = l[(jmax, j)];
                l[(jmax, j)] = tmp;
            }
        }
        let pivot = d[k].sqrt();
        l[(k, k)] = pivot;
        for i in (k + 1)..n {
            let mut acc = s[(perm[i], perm[k])];
            for j in 0..k {
                acc -= l[(i, j)] * l[(k, j)];
            }
            let v = acc / pivot;
            l[(i, k)] = v;
            d[i] -= v * v;
        }
    }

    let clamped = rank < n;
    let pad = floor.max(0.0).sqrt();
    for k in rank..n {
        l[(k, k)] = pad;
    }
    // Undo the row permutation: row `i` of `l` belongs to original index
    // `perm[i]`, so f * f^T lands back in the original ordering.
    let mut f = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            f[(perm[i], j)] = l[(i, j)];
        }
    }
    Ok(PsdFactor { f, rank, clamped })
}

/// Solve `s * x = b` given the Cholesky factor `l` of `s` (forward then
/// backward substitution).
pub fn cholesky_solve(l: &Matrix, b: &Matrix) -> Matrix {
    let n = l.rows();
    let nrhs = b.cols();
    let mut x = b.clone();
    // l y = b
    for k in 0..n {
        for j in 0..nrhs {
            let mut acc = x[(k, j)];
            for i in 0..k {
                acc -= l[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = acc / l[(k, k)];
        }
    }
    // l^T x = y
    for k in (0..n).rev() {
        for j in 0..nrhs {
            let mut acc = x[(k, j)];
            for i in (k + 1)..n {
                acc -= l[(i, k)] * x[(i, j)];
            }
            x[(k, j)] = acc / l[(k, k)];
        }
    }
    x
}
