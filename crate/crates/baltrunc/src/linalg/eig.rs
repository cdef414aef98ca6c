//! Real Schur decomposition and eigenvalues of general square matrices.
//!
//! Pipeline: Householder reduction to upper Hessenberg form, then Francis
//! double-shift QR iteration with exceptional shifts, accumulating the
//! orthogonal transformation. Real eigenvalue pairs are rotated into
//! triangular form, so the final `t` is block upper triangular with 1x1
//! blocks for real eigenvalues and 2x2 blocks only for complex pairs.

use super::matrix::Matrix;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Orthogonal `q` and quasi upper-triangular `t` with `a = q * t * q^T`.
#[derive(Debug, Clone)]
pub struct RealSchur {
    pub q: Matrix,
    pub t: Matrix,
}

/// Iterations allowed per eigenvalue before giving up; exceptional shifts
/// fire at 10 and 30, so convergence failures past this point are genuine.
const MAX_ITER_PER_EIGENVALUE: usize = 100;

pub fn real_schur(a: &Matrix) -> Result<RealSchur> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch {
            op: "real_schur",
            left: a.shape(),
            right: a.shape(),
        });
    }
    let (mut q, mut h) = hessenberg(a);
    francis_qr(&mut h, &mut q)?;
    Ok(RealSchur { q, t: h })
}

/// Eigenvalues of `a` in no particular order.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    let schur = real_schur(a)?;
    Ok(eigenvalues_of_quasi_triangular(&schur.t))
}

/// Read eigenvalues off a quasi upper-triangular matrix (exact zero
/// subdiagonals mark the 1x1 block boundaries).
pub(crate) fn eigenvalues_of_quasi_triangular(t: &Matrix) -> Vec<Complex64> {
    let n = t.rows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let a = t[(i, i)];
            let b = t[(i, i + 1)];
            let c = t[(i + 1, i)];
            let d = t[(i + 1, i + 1)];
            let mean = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc >= 0.0 {
                let root = disc.sqrt();
                out.push(Complex64::new(mean + root, 0.0));
                out.push(Complex64::new(mean - root, 0.0));
            } else {
                let imag = (-disc).sqrt();
                out.push(Complex64::new(mean, imag));
                out.push(Complex64::new(mean, -imag));
            }
            i += 2;
        } else {
            out.push(Complex64::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// Householder reduction `a = q * h * q^T` with `h` upper Hessenberg.
fn hessenberg(a: &Matrix) -> (Matrix, Matrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    if n <= 2 {
        return (q, h);
    }
    let mut u = vec![0.0; n];
    for m in 1..(n - 1) {
        let mut scale = 0.0;
        for i in m..n {
            scale += h[(i, m - 1)].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut sum = 0.0;
        for i in (m..n).rev() {
            u[i] = h[(i, m - 1)] / scale;
            sum += u[i] * u[i];
        }
        let mut g = sum.sqrt();
        if u[m] > 0.0 {
            g = -g;
        }
        sum -= u[m] * g;
        u[m] -= g;
        // Apply P = I - u u^T / sum from the left ...
        for j in m..n {
            let mut f = 0.0;
            for i in (m..n).rev() {
                f += u[i] * h[(i, j)];
            }
            f /= sum;
            for i in m..n {
                h[(i, j)] -= f * u[i];
            }
        }
        // ... and from the right.
        for i in 0..n {
            let mut f = 0.0;
            for j in (m..n).rev() {
                f += u[j] * h[(i, j)];
            }
            f /= sum;
            for j in m..n {
                h[(i, j)] -= f * u[j];
            }
        }
        // Accumulate q <- q * P.
        for i in 0..n {
            let mut f = 0.0;
            for j in (m..n).rev() {
                f += u[j] * q[(i, j)];
            }
            f /= sum;
            for j in m..n {
                q[(i, j)] -= f * u[j];
            }
        }
        // The reflector annihilates column m-1 below the subdiagonal exactly.
        h[(m, m - 1)] = scale * g;
        for i in (m + 1)..n {
            h[(i, m - 1)] = 0.0;
        }
    }
    (q, h)
}

/// Francis double-shift QR on an upper Hessenberg matrix, accumulating the
/// orthogonal similarity into `v`. On return `h` is quasi upper-triangular
/// with exact zeros below its block structure.
fn francis_qr(h: &mut Matrix, v: &mut Matrix) -> Result<()> {
    let nn = h.rows() as i64;
    if nn == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let low: i64 = 0;
    let high: i64 = nn - 1;

    // Scale fallback for deflation tests on zero diagonals.
    let mut norm = 0.0;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += h[(i as usize, j as usize)].abs();
        }
    }

    let mut n = high;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let (mut p, mut q, mut r, mut s, mut z, mut w, mut x, mut y);
    p = 0.0;
    q = 0.0;
    r = 0.0;

    while n >= low {
        // Look for a single small subdiagonal element.
        let mut l = n;
        while l > low {
            s = h[((l - 1) as usize, (l - 1) as usize)].abs() + h[(l as usize, l as usize)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l as usize, (l - 1) as usize)].abs() < eps * s {
                h[(l as usize, (l - 1) as usize)] = 0.0;
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root found.
            h[(n as usize, n as usize)] += exshift;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots found.
            w = h[(n as usize, (n - 1) as usize)] * h[((n - 1) as usize, n as usize)];
            p = (h[((n - 1) as usize, (n - 1) as usize)] - h[(n as usize, n as usize)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(n as usize, n as usize)] += exshift;
            h[((n - 1) as usize, (n - 1) as usize)] += exshift;

            if q >= 0.0 {
                // Real pair: rotate the 2x2 block to upper triangular form.
                z = if p >= 0.0 { p + z } else { p - z };
                x = h[(n as usize, (n - 1) as usize)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (n - 1)..nn {
                    z = h[((n - 1) as usize, j as usize)];
                    h[((n - 1) as usize, j as usize)] = q * z + p * h[(n as usize, j as usize)];
                    h[(n as usize, j as usize)] = q * h[(n as usize, j as usize)] - p * z;
                }
                for i in 0..=n {
                    z = h[(i as usize, (n - 1) as usize)];
                    h[(i as usize, (n - 1) as usize)] = q * z + p * h[(i as usize, n as usize)];
                    h[(i as usize, n as usize)] = q * h[(i as usize, n as usize)] - p * z;
                }
                for i in low..=high {
                    z = v[(i as usize, (n - 1) as usize)];
                    v[(i as usize, (n - 1) as usize)] = q * z + p * v[(i as usize, n as usize)];
                    v[(i as usize, n as usize)] = q * v[(i as usize, n as usize)] - p * z;
                }
                h[(n as usize, (n - 1) as usize)] = 0.0;
            }
            // Complex pair: leave the 2x2 block in place.
            n -= 2;
            iter = 0;
        } else {
            // No convergence yet: form a shift.
            x = h[(n as usize, n as usize)];
            y = h[((n - 1) as usize, (n - 1) as usize)];
            w = h[(n as usize, (n - 1) as usize)] * h[((n - 1) as usize, n as usize)];

            if iter == 10 {
                // Exceptional shift.
                exshift += x;
                for i in low..=n {
                    h[(i as usize, i as usize)] -= x;
                }
                s = h[(n as usize, (n - 1) as usize)].abs()
                    + h[((n - 1) as usize, (n - 2) as usize)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                // Second exceptional shift (ad hoc Wilkinson value).
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        h[(i as usize, i as usize)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = 0.964;
                    w = 0.964;
                }
            }

            iter += 1;
            if iter > MAX_ITER_PER_EIGENVALUE {
                return Err(Error::numerical("eigenvalue iteration failed to converge"));
            }

            // Look for two consecutive small subdiagonal elements.
            let mut m = n - 2;
            while m >= l {
                z = h[(m as usize, m as usize)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[((m + 1) as usize, m as usize)]
                    + h[(m as usize, (m + 1) as usize)];
                q = h[((m + 1) as usize, (m + 1) as usize)] - z - r - s;
                r = h[((m + 2) as usize, (m + 1) as usize)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m as usize, (m - 1) as usize)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (h[((m - 1) as usize, (m - 1) as usize)].abs()
                                + z.abs()
                                + h[((m + 1) as usize, (m + 1) as usize)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                h[(i as usize, (i - 2) as usize)] = 0.0;
                if i > m + 2 {
                    h[(i as usize, (i - 3) as usize)] = 0.0;
                }
            }

            // Double QR step on rows l..=n and columns m..=n.
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = h[(k as usize, (k - 1) as usize)];
                    q = h[((k + 1) as usize, (k - 1) as usize)];
                    r = if notlast {
                        h[((k + 2) as usize, (k - 1) as usize)]
                    } else {
                        0.0
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k as usize, (k - 1) as usize)] = -s * x;
                    } else if l != m {
                        h[(k as usize, (k - 1) as usize)] = -h[(k as usize, (k - 1) as usize)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    // Row modification.
                    for j in k..nn {
                        let mut pp =
                            h[(k as usize, j as usize)] + q * h[((k + 1) as usize, j as usize)];
                        if notlast {
                            pp += r * h[((k + 2) as usize, j as usize)];
                            h[((k + 2) as usize, j as usize)] -= pp * z;
                        }
                        h[(k as usize, j as usize)] -= pp * x;
                        h[((k + 1) as usize, j as usize)] -= pp * y;
                    }
                    // Column modification.
                    for i in 0..=n.min(k + 3) {
                        let mut pp =
                            x * h[(i as usize, k as usize)] + y * h[(i as usize, (k + 1) as usize)];
                        if notlast {
                            pp += z * h[(i as usize, (k + 2) as usize)];
                            h[(i as usize, (k + 2) as usize)] -= pp * r;
                        }
                        h[(i as usize, k as usize)] -= pp;
                        h[(i as usize, (k + 1) as usize)] -= pp * q;
                    }
                    // Accumulate transformations.
                    for i in low..=high {
                        let mut pp =
                            x * v[(i as usize, k as usize)] + y * v[(i as usize, (k + 1) as usize)];
                        if notlast {
                            pp += z * v[(i as usize, (k + 2) as usize)];
                            v[(i as usize, (k + 2) as usize)] -= pp * r;
                        }
                        v[(i as usize, k as usize)] -= pp;
                        v[(i as usize, (k + 1) as usize)] -= pp * q;
                    }
                }
            }
        }
    }

    // The chase only ever writes transient values within the bulge; clear any
    // strict lower residue so callers can rely on exact block structure.
    let nn = nn as usize;
    for i in 2..nn {
        for j in 0..(i - 1) {
            h[(i, j)] = 0.0;
        }
    }
    Ok(())
}
