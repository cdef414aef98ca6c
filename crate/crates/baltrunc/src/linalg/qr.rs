//! Householder QR factorization, used for orthonormal basis completion.

use super::matrix::Matrix;

/// Factor `a` (m x n) as `q * r` with `q` m x m orthogonal and `r` m x n
/// upper trapezoidal.
pub fn qr_full(a: &Matrix) -> (Matrix, Matrix) {
    let m = a.rows();
    let n = a.cols();
    let mut r = a.clone();
    let mut q = Matrix::identity(m);
    if m == 0 || n == 0 {
        return (q, r);
    }

    let steps = n.min(m.saturating_sub(1));
    let mut v = vec![0.0; m];
    for k in 0..steps {
        // Build the Householder vector that clears column k below the diagonal.
        let mut scale = 0.0f64;
        for i in k..m {
            scale = scale.max(r[(i, k)].abs());
        }
        if scale == 0.0 {
            continue;
        }
        let mut norm_sq = 0.0;
        for i in k..m {
            let val = r[(i, k)] / scale;
            v[i] = val;
            norm_sq += val * val;
        }
        let norm = norm_sq.sqrt();
        let alpha = if v[k] >= 0.0 { -norm } else { norm };
        v[k] -= alpha;
        let vtv: f64 = (k..m).map(|i| v[i] * v[i]).sum();
        if vtv == 0.0 {
            continue;
        }
        let beta = 2.0 / vtv;

        // Apply H = I - beta v v^T to the remaining columns of r.
        for j in k..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i] * r[(i, j)];
            }
            let coeff = beta * dot;
            for i in k..m {
                r[(i, j)] -= coeff * v[i];
            }
        }
        // Accumulate q <- q * H.
        for row in 0..m {
            let mut dot = 0.0;
            for i in k..m {
                dot += q[(row, i)] * v[i];
            }
            let coeff = beta * dot;
            for i in k..m {
                q[(row, i)] -= coeff * v[i];
            }
        }
        // The annihilated entries are exact zeros by construction.
        r[(k, k)] = alpha * scale;
        for i in (k + 1)..m {
            r[(i, k)] = 0.0;
        }
    }
    (q, r)
}

/// Extend a set of orthonormal columns `u` (m x r) to a full orthogonal
/// m x m basis whose first r columns are exactly `u`.
pub fn complete_basis(u: &Matrix) -> Matrix {
    let m = u.rows();
    let r = u.cols();
    if r == 0 {
        return Matrix::identity(m);
    }
    if r >= m {
        return u.clone();
    }
    let (q, _) = qr_full(u);
    // QR may flip the sign of the leading columns; keep the caller's columns
    // verbatim and take only the orthogonal complement from q.
    let tail = q.block(0, m, r, m);
    u.hcat(&tail)
}
