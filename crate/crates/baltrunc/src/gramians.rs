//! Controllability and observability gramians and the energy quadratic
//! forms they induce.
//!
//! Infinite-horizon gramians of a stable system solve Lyapunov equations;
//! small systems use a direct solve on the symmetric-packed Kronecker
//! operator, larger ones a Schur-form back-substitution. Finite-horizon
//! gramians integrate the defining integral exactly through an augmented
//! matrix exponential, so they exist for unstable systems too.

use crate::error::{Error, Result, Shape};
use crate::linalg::{
    cholesky, cholesky_solve, eigenvalues, eigenvalues_of_quasi_triangular, expm, real_schur,
    solve, Matrix,
};
use crate::statespace::StateSpaceModel;

/// Time horizon a gramian pair was computed over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

/// Controllability gramian `xc` and observability gramian `yo` of one model
/// over a common horizon. Both are symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct GramianPair {
    pub xc: Matrix,
    pub yo: Matrix,
    pub horizon: Horizon,
}

/// Below this order the Lyapunov equation is solved directly on the packed
/// Kronecker system; above it via the Schur form.
const DIRECT_SOLVE_LIMIT: usize = 60;

/// Solve `a X + X a^T + q = 0` for stable `a` and symmetric `q`.
///
/// The result is explicitly symmetrized. Instability is reported with the
/// spectral abscissa; a Lyapunov operator that is singular to working
/// precision (eigenvalues of `a` nearly mirrored across the imaginary axis)
/// surfaces as a numerical failure.
pub fn lyapunov_solve(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    if !a.is_square() || a.shape() != q.shape() {
        return Err(Error::ShapeMismatch {
            op: "lyapunov_solve",
            left: a.shape(),
            right: q.shape(),
        });
    }
    let asym = q.asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric { deviation: asym });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    if n <= DIRECT_SOLVE_LIMIT {
        let abscissa = spectral_abscissa(&eigenvalues(a)?);
        if abscissa >= 0.0 {
            return Err(Error::UnstableSystem { abscissa });
        }
        lyapunov_direct(a, q)
    } else {
        lyapunov_schur(a, q)
    }
}

fn spectral_abscissa(eigs: &[num_complex::Complex64]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Direct solve: the Lyapunov operator restricted to symmetric matrices,
/// acting on the packed upper triangle (n(n+1)/2 unknowns). Nonsingular
/// under exactly the same condition as the full Kronecker form.
fn lyapunov_direct(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let dim = n * (n + 1) / 2;
    // Packed index of the entry (i, j) with i <= j, row-major upper triangle.
    let pack = |i: usize, j: usize| i * n - i * (i + 1) / 2 + j;

    let mut op = Matrix::zeros(dim, dim);
    let mut rhs = Matrix::zeros(dim, 1);
    for i in 0..n {
        for j in i..n {
            let row = pack(i, j);
            rhs[(row, 0)] = -q[(i, j)];
            for k in 0..n {
                // (A X)_{ij} contributes a_ik x_{kj}; (X A^T)_{ij} adds a_jk x_{ik}.
                let col_left = pack(k.min(j), k.max(j));
                op[(row, col_left)] += a[(i, k)];
                let col_right = pack(i.min(k), i.max(k));
                op[(row, col_right)] += a[(j, k)];
            }
        }
    }
    let packed = solve(&op, &rhs).map_err(|err| match err {
        Error::SingularMatrix { .. } => {
            Error::numerical("lyapunov operator is singular to working precision")
        }
        other => other,
    })?;
    let x = Matrix::from_fn(n, n, |i, j| packed[(pack(i.min(j), i.max(j)), 0)]);
    Ok(x.symmetrize())
}

/// Schur-form solve: with `a = U T U^T` (T quasi upper-triangular), the
/// transformed equation `T Y + Y T^T = -U^T q U` is solved by block
/// back-substitution over the 1x1/2x2 diagonal blocks, from the trailing
/// block pair upward.
fn lyapunov_schur(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let schur = real_schur(a)?;
    let abscissa = spectral_abscissa(&eigenvalues_of_quasi_triangular(&schur.t));
    if abscissa >= 0.0 {
        return Err(Error::UnstableSystem { abscissa });
    }
    let t = &schur.t;
    let qt = schur.q.transpose().dot(q).dot(&schur.q);

    // Diagonal block layout of the quasi-triangular factor.
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        let size = if i + 1 < n && t[(i + 1, i)] != 0.0 {
            2
        } else {
            1
        };
        blocks.push((i, size));
        i += size;
    }

    let mut y = Matrix::zeros(n, n);
    for &(i0, si) in blocks.iter().rev() {
        for &(j0, sj) in blocks.iter().rev() {
            // Right-hand side for this block, folding in already-solved parts.
            let mut rhs = Matrix::zeros(si, sj);
            for ai in 0..si {
                for bj in 0..sj {
                    let mut acc = -qt[(i0 + ai, j0 + bj)];
                    for c in (i0 + si)..n {
                        acc -= t[(i0 + ai, c)] * y[(c, j0 + bj)];
                    }
                    for c in (j0 + sj)..n {
                        acc -= y[(i0 + ai, c)] * t[(j0 + bj, c)];
                    }
                    rhs[(ai, bj)] = acc;
                }
            }
            // Small Sylvester block T_ii Y + Y T_jj^T = rhs via its Kronecker
            // form (at most 4x4).
            let k = si * sj;
            let mut small = Matrix::zeros(k, k);
            for ai in 0..si {
                for bj in 0..sj {
                    let row = ai * sj + bj;
                    for c in 0..si {
                        small[(row, c * sj + bj)] += t[(i0 + ai, i0 + c)];
                    }
                    for d in 0..sj {
                        small[(row, ai * sj + d)] += t[(j0 + bj, j0 + d)];
                    }
                }
            }
            let vec_rhs = Matrix::from_fn(k, 1, |r, _| rhs[(r / sj, r % sj)]);
            let sol = solve(&small, &vec_rhs).map_err(|err| match err {
                Error::SingularMatrix { .. } => {
                    Error::numerical("lyapunov operator is singular to working precision")
                }
                other => other,
            })?;
            for ai in 0..si {
                for bj in 0..sj {
                    y[(i0 + ai, j0 + bj)] = sol[(ai * sj + bj, 0)];
                }
            }
        }
    }
    Ok(schur.q.dot(&y).dot(&schur.q.transpose()).symmetrize())
}

/// Infinite-horizon gramians of a stable model:
/// `A xc + xc A^T + B B^T = 0` and `A^T yo + yo A + C^T C = 0`.
pub fn infinite_gramians(model: &StateSpaceModel) -> Result<GramianPair> {
    let eigs = eigenvalues(&model.a)?;
    let abscissa = spectral_abscissa(&eigs);
    if model.n > 0 && abscissa >= 0.0 {
        return Err(Error::UnstableSystem { abscissa });
    }
    let xc = lyapunov_solve(&model.a, &model.b.dot(&model.b.transpose()))?;
    let yo = lyapunov_solve(&model.a.transpose(), &model.c.transpose().dot(&model.c))?;
    Ok(GramianPair {
        xc,
        yo,
        horizon: Horizon::Infinite,
    })
}

/// Finite-horizon gramians over `[0, tau]`, valid for unstable models too.
pub fn finite_gramians(model: &StateSpaceModel, tau: f64) -> Result<GramianPair> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "finite gramian horizon must be positive and finite, got {tau}"
        )));
    }
    let xc = finite_gramian_one_sided(&model.a, &model.b.dot(&model.b.transpose()), tau)?;
    let yo = finite_gramian_one_sided(
        &model.a.transpose(),
        &model.c.transpose().dot(&model.c),
        tau,
    )?;
    Ok(GramianPair {
        xc,
        yo,
        horizon: Horizon::Finite(tau),
    })
}

/// Integral of `e^{A t} Q e^{A^T t}` over `[0, tau]` via the augmented
/// exponential of `[[A, Q], [0, -A^T]]`: its top blocks give
/// `X(t) = F12 F11^T`. Evaluated at a horizon short enough to avoid
/// overflow in the off-diagonal block, then extended by the exact doubling
/// `X(2t) = X(t) + E X(t) E^T`, `E = e^{A t}`.
fn finite_gramian_one_sided(a: &Matrix, q: &Matrix, tau: f64) -> Result<Matrix> {
    let n = a.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let scale = (a.one_norm() + q.one_norm()) * tau;
    let doublings = if scale > 2.0 {
        ((scale / 2.0).log2().ceil() as u32).min(200)
    } else {
        0
    };
    let step = tau / 2f64.powi(doublings as i32);

    let mut aug = Matrix::zeros(2 * n, 2 * n);
    aug.set_block(0, 0, &a.scale(step));
    aug.set_block(0, n, &q.scale(step));
    aug.set_block(n, n, &a.transpose().scale(-step));
    let f = expm(&aug)?;
    let f11 = f.block(0, n, 0, n);
    let f12 = f.block(0, n, n, 2 * n);

    let mut x = f12.dot(&f11.transpose()).symmetrize();
    let mut propagator = f11;
    for round in 0..doublings {
        x = (&x + &propagator.dot(&x).dot(&propagator.transpose())).symmetrize();
        if round + 1 < doublings {
            propagator = propagator.dot(&propagator);
        }
    }
    if !x.all_finite() {
        return Err(Error::numerical(
            "finite-horizon gramian overflowed (unstable dynamics over a long horizon)",
        ));
    }
    Ok(x)
}

/// Output energy released from the initial state `x0` with zero input:
/// `x0^T yo x0`.
pub fn output_energy(gramians: &GramianPair, x0: &[f64]) -> Result<f64> {
    quadratic_form(&gramians.yo, x0, "output_energy")
}

/// Minimum input energy needed to steer the system from rest to `x0`:
/// `x0^T xc^{-1} x0`, via a Cholesky solve. Requires `xc` strictly positive
/// definite — its smallest eigenvalue must exceed `1e-12 * trace(xc)` —
/// because for unreachable directions the energy is infinite.
pub fn min_input_energy(gramians: &GramianPair, x0: &[f64]) -> Result<f64> {
    let xc = &gramians.xc;
    let n = xc.rows();
    if x0.len() != n {
        return Err(Error::ShapeMismatch {
            op: "min_input_energy",
            left: Shape(n, n),
            right: Shape(x0.len(), 1),
        });
    }
    let trace: f64 = xc.diag().iter().sum();
    let min_eig = eigenvalues(xc)?
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min);
    if min_eig <= 1e-12 * trace {
        return Err(Error::NotPositiveDefinite { value: min_eig });
    }
    let factor = cholesky(xc, 0.0)?;
    let rhs = Matrix::from_fn(n, 1, |i, _| x0[i]);
    let solved = cholesky_solve(&factor.l, &rhs);
    Ok((0..n).map(|i| x0[i] * solved[(i, 0)]).sum())
}

fn quadratic_form(s: &Matrix, x0: &[f64], op: &'static str) -> Result<f64> {
    let n = s.rows();
    if x0.len() != n {
        return Err(Error::ShapeMismatch {
            op,
            left: Shape(n, n),
            right: Shape(x0.len(), 1),
        });
    }
    let sx = s.mul_vec(x0);
    Ok(x0.iter().zip(sx.iter()).map(|(a, b)| a * b).sum())
}
