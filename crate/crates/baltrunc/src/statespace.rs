//! Continuous-time linear time-invariant state-space models
//! `x' = A x + B u`, `y = C x + D u`, and coordinate changes on them.

use crate::error::{Error, Result, Violation};
use crate::linalg::{eigenvalues, solve, svd, ComplexMatrix, Matrix};

/// A state-space model with `n` states, `m` inputs, and `p` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

impl StateSpaceModel {
    /// Build a model, rejecting dimensionally inconsistent matrices.
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let model = Self {
            n: a.rows(),
            m: b.cols(),
            p: c.rows(),
            a,
            b,
            c,
            d,
        };
        let violations = model.validate();
        if violations.is_empty() {
            Ok(model)
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    /// Check every structural invariant, returning one entry per violation.
    /// An empty result means the model is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |ok: bool, field: &str, rule: String| {
            if !ok {
                out.push(Violation {
                    field: field.to_string(),
                    rule,
                });
            }
        };
        check(
            self.a.is_square(),
            "a",
            format!("must be square, got {}", self.a.shape()),
        );
        check(
            self.a.rows() == self.n,
            "n",
            format!("must equal the state dimension {}", self.a.rows()),
        );
        check(
            self.b.rows() == self.n,
            "b",
            format!("must have {} rows, got {}", self.n, self.b.rows()),
        );
        check(
            self.b.cols() == self.m,
            "m",
            format!("must equal the input count {}", self.b.cols()),
        );
        check(
            self.c.cols() == self.n,
            "c",
            format!("must have {} columns, got {}", self.n, self.c.cols()),
        );
        check(
            self.c.rows() == self.p,
            "p",
            format!("must equal the output count {}", self.c.rows()),
        );
        check(
            self.d.rows() == self.p && self.d.cols() == self.m,
            "d",
            format!("must be {}x{}, got {}", self.p, self.m, self.d.shape()),
        );
        for (name, m) in [
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("d", &self.d),
        ] {
            check(m.all_finite(), name, "entries must be finite".to_string());
        }
        out
    }
}

/// An invertible change of state coordinates `z = T x`. The inverse is
/// stored, never recomputed, so applying the transform involves no solves.
#[derive(Debug, Clone)]
pub struct SimilarityTransform {
    pub t: Matrix,
    pub t_inv: Matrix,
    /// Product of the largest singular values of `t` and `t_inv`; an upper
    /// estimate of the spectral condition number, always at least 1.
    pub condition_estimate: f64,
}

/// Construction rejects pairs whose product strays from the identity by more
/// than this times the dimension (Frobenius norm).
const INVERSE_DEFECT_TOL: f64 = 1e-8;

impl SimilarityTransform {
    pub fn new(t: Matrix, t_inv: Matrix) -> Result<Self> {
        if !t.is_square() || t.shape() != t_inv.shape() {
            return Err(Error::ShapeMismatch {
                op: "similarity transform",
                left: t.shape(),
                right: t_inv.shape(),
            });
        }
        let n = t.rows();
        let defect = (&t.dot(&t_inv) - &Matrix::identity(n)).fro_norm();
        if defect > INVERSE_DEFECT_TOL * n as f64 {
            return Err(Error::InvalidArgument(format!(
                "similarity transform: t * t_inv deviates from identity by {defect:.3e}"
            )));
        }
        let sigma_t = svd(&t)?.s.first().copied().unwrap_or(0.0);
        let sigma_inv = svd(&t_inv)?.s.first().copied().unwrap_or(0.0);
        Ok(Self {
            t,
            t_inv,
            condition_estimate: (sigma_t * sigma_inv).max(1.0),
        })
    }

    /// For pairs that are exact functional inverses by construction (for
    /// example the square-root balancing factors) but too ill-conditioned to
    /// pass the floating-point identity check above: trust the caller, only
    /// estimate the conditioning.
    pub(crate) fn new_unchecked(t: Matrix, t_inv: Matrix) -> Result<Self> {
        let sigma_t = svd(&t)?.s.first().copied().unwrap_or(0.0);
        let sigma_inv = svd(&t_inv)?.s.first().copied().unwrap_or(0.0);
        Ok(Self {
            t,
            t_inv,
            condition_estimate: (sigma_t * sigma_inv).max(1.0),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            t: Matrix::identity(n),
            t_inv: Matrix::identity(n),
            condition_estimate: 1.0,
        }
    }

    /// Compose two transforms: first `self`, then `other` (z = other.t * self.t * x).
    pub fn then(&self, other: &SimilarityTransform) -> Result<Self> {
        Self::new(other.t.dot(&self.t), self.t_inv.dot(&other.t_inv))
    }
}

/// Change coordinates: `(A, B, C, D) -> (T A T^-1, T B, C T^-1, D)`.
/// `D` is carried over without any arithmetic. An exact identity transform
/// returns a copy of the input.
pub fn apply_similarity(
    model: &StateSpaceModel,
    tf: &SimilarityTransform,
) -> Result<StateSpaceModel> {
    if tf.t.rows() != model.n {
        return Err(Error::ShapeMismatch {
            op: "apply_similarity",
            left: tf.t.shape(),
            right: model.a.shape(),
        });
    }
    if tf.t == Matrix::identity(model.n) && tf.t_inv == tf.t {
        return Ok(model.clone());
    }
    StateSpaceModel::new(
        tf.t.dot(&model.a).dot(&tf.t_inv),
        tf.t.dot(&model.b),
        model.c.dot(&tf.t_inv),
        model.d.clone(),
    )
}

/// Whether every eigenvalue of `A` lies strictly left of `-margin`, along
/// with the spectral abscissa (largest real part; `-inf` for empty models).
pub fn is_stable(model: &StateSpaceModel, margin: f64) -> Result<(bool, f64)> {
    let eigs = eigenvalues(&model.a)?;
    let abscissa = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok((abscissa < -margin, abscissa))
}

/// Evaluate the transfer function `H(i w) = C (i w I - A)^{-1} B + D`.
///
/// The complex resolvent solve is carried out as one real system of twice
/// the size. A singular resolvent (w matches an undamped natural frequency)
/// is reported as a resonance at that frequency.
pub fn transfer_at(model: &StateSpaceModel, omega: f64) -> Result<ComplexMatrix> {
    let n = model.n;
    // [[-A, -wI], [wI, -A]] [xr; xi] = [B; 0]  encodes  (iwI - A)(xr + i xi) = B.
    let mut lhs = Matrix::zeros(2 * n, 2 * n);
    lhs.set_block(0, 0, &model.a.scale(-1.0));
    lhs.set_block(n, n, &model.a.scale(-1.0));
    for k in 0..n {
        lhs[(k, n + k)] = -omega;
        lhs[(n + k, k)] = omega;
    }
    let rhs = model.b.vcat(&Matrix::zeros(n, model.m));
    let x = solve(&lhs, &rhs).map_err(|err| match err {
        Error::SingularMatrix { .. } => Error::Resonance { omega },
        other => other,
    })?;
    let xr = x.block(0, n, 0, model.m);
    let xi = x.block(n, 2 * n, 0, model.m);
    let re = &model.c.dot(&xr) + &model.d;
    let im = model.c.dot(&xi);
    ComplexMatrix::from_parts(&re, &im)
}
