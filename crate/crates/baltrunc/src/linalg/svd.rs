//! Singular value decomposition via one-sided Jacobi rotations.
//!
//! The one-sided scheme keeps a working copy `g` of the input and applies
//! plane rotations on the right until all column pairs are mutually
//! orthogonal; column norms are then the singular values. It is slower than
//! bidiagonalization on large inputs but computes small singular values to
//! high relative accuracy, which is what rank decisions downstream lean on.

use super::matrix::Matrix;
use super::qr::complete_basis;
use crate::error::{Error, Result};

/// Economy-size decomposition `a = u * diag(s) * v^T` with `u` (m x k) and
/// `v` (n x k) having orthonormal columns and `s` sorted descending,
/// k = min(m, n).
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

const MAX_SWEEPS: usize = 100;
/// Two columns count as numerically orthogonal when their inner product is
/// below this multiple of the product of their norms.
const ORTHO_TOL: f64 = 1e-15;

pub fn svd(a: &Matrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    if m >= n {
        svd_tall(a)
    } else {
        // a = (v s u^T)^T for the tall decomposition of a^T.
        let t = svd_tall(&a.transpose())?;
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        })
    }
}

/// One-sided Jacobi on a matrix with rows >= cols.
fn svd_tall(a: &Matrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    if n == 0 {
        return Ok(Svd {
            u: Matrix::zeros(m, 0),
            s: Vec::new(),
            v: Matrix::zeros(0, 0),
        });
    }

    // Work on a scaled copy so column norms cannot overflow.
    let alpha = a.max_abs();
    if alpha == 0.0 {
        return Ok(Svd {
            u: Matrix::identity(m).block(0, m, 0, n),
            s: vec![0.0; n],
            v: Matrix::identity(n),
        });
    }
    let mut g = a.scale(1.0 / alpha);
    let mut v = Matrix::identity(n);

    // Severely graded matrices (Krylov blocks, rank-deficient tails) can
    // ping-pong forever on the pair-relative test alone: every rotation
    // against a large column re-pollutes a noise-scale column right at the
    // threshold. Couplings below the matrix's own rounding scale carry no
    // information, so they also count as converged.
    let fro_sq: f64 = g.data().iter().map(|x| x * x).sum();
    let noise_floor = (m as f64) * f64::EPSILON * f64::EPSILON * fro_sq;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = 0usize;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)];
                    app += gp * gp;
                    aqq += gq * gq;
                    apq += gp * gq;
                }
                if app == 0.0 || aqq == 0.0 {
                    continue;
                }
                if apq.abs() <= ORTHO_TOL * (app * aqq).sqrt() || apq.abs() <= noise_floor {
                    continue;
                }
                rotated += 1;
                // Jacobi rotation zeroing the (p, q) coupling of g^T g.
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..m {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)];
                    g[(i, p)] = cs * gp - sn * gq;
                    g[(i, q)] = sn * gp + cs * gq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = cs * vp - sn * vq;
                    v[(i, q)] = sn * vp + cs * vq;
                }
            }
        }
        if rotated == 0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical(
            "svd: Jacobi sweeps exceeded iteration cap",
        ));
    }

    // Column norms are the singular values (undo the scaling).
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| g[(i, j)] * g[(i, j)]).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let mut s = Vec::with_capacity(n);
    let mut u = Matrix::zeros(m, n);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut rank = 0usize;
    for (slot, &j) in order.iter().enumerate() {
        let norm = norms[j];
        s.push(norm * alpha);
        for i in 0..n {
            v_sorted[(i, slot)] = v[(i, j)];
        }
        if norm > 0.0 {
            for i in 0..m {
                u[(i, slot)] = g[(i, j)] / norm;
            }
            rank = slot + 1;
        }
    }
    if rank < n {
        // Zero columns leave gaps in u; fill them with any orthonormal
        // complement so u always has orthonormal columns.
        let leading = u.block(0, m, 0, rank);
        let full = complete_basis(&leading);
        for slot in rank..n {
            for i in 0..m {
                u[(i, slot)] = full[(i, slot)];
            }
        }
    }

    Ok(Svd { u, s, v: v_sorted })
}
