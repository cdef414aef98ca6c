//! Matrix exponential via Pade approximation with scaling and squaring.

use super::lu;
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Degree-13 Pade numerator coefficients (denominator uses alternating signs).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// One-norm threshold below which the degree-13 approximant is accurate to
/// machine precision without scaling.
const THETA13: f64 = 5.371920351148152;

/// Hard ceiling on squaring steps; anything beyond this cannot produce a
/// finite result in f64 anyway.
const MAX_SQUARINGS: u32 = 1100;

/// Compute `exp(a)` for square `a`.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch {
            op: "expm",
            left: a.shape(),
            right: a.shape(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }

    let norm = a.one_norm();
    if !norm.is_finite() {
        return Err(Error::numerical("expm: input norm overflowed"));
    }
    let squarings = if norm > THETA13 {
        let s = (norm / THETA13).log2().ceil() as i64;
        if s as u32 > MAX_SQUARINGS {
            return Err(Error::numerical("expm: input norm too large to scale"));
        }
        s as u32
    } else {
        0
    };
    let scaled = a.scale(0.5f64.powi(squarings as i32));

    // Evaluate the order-13 Pade approximant p(A)/q(A) with
    // p(A) = U + V and q(A) = -U + V split by parity.
    let ident = Matrix::identity(n);
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let u_inner = &(&a6.scale(PADE13[13]) + &a4.scale(PADE13[11])) + &a2.scale(PADE13[9]);
    let u_poly = &(&(&a6.dot(&u_inner) + &a6.scale(PADE13[7])) + &a4.scale(PADE13[5]))
        + &(&a2.scale(PADE13[3]) + &ident.scale(PADE13[1]));
    let u = scaled.dot(&u_poly);

    let v_inner = &(&a6.scale(PADE13[12]) + &a4.scale(PADE13[10])) + &a2.scale(PADE13[8]);
    let v = &(&(&a6.dot(&v_inner) + &a6.scale(PADE13[6])) + &a4.scale(PADE13[4]))
        + &(&a2.scale(PADE13[2]) + &ident.scale(PADE13[0]));

    let mut result = lu::solve(&(&v - &u), &(&v + &u))
        .map_err(|_| Error::numerical("expm: Pade denominator is singular"))?;
    for _ in 0..squarings {
        result = result.dot(&result);
        if !result.all_finite() {
            return Err(Error::numerical("expm: result overflowed during squaring"));
        }
    }
    if !result.all_finite() {
        return Err(Error::numerical("expm: result is not finite"));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_gives_identity() {
        let e = expm(&Matrix::zeros(4, 4)).unwrap();
        assert!(e.max_abs_diff(&Matrix::identity(4)) < 1e-15);
    }

    #[test]
    fn diagonal_exponential_matches_scalar_exp() {
        let a = Matrix::from_diag(&[1.0, -2.0, 0.5]);
        let e = expm(&a).unwrap();
        let want = Matrix::from_diag(&[1.0f64.exp(), (-2.0f64).exp(), 0.5f64.exp()]);
        assert!(e.max_abs_diff(&want) <= 1e-14 * want.max_abs());
    }

    #[test]
    fn nilpotent_exponential_is_exact_polynomial() {
        // exp([[0, t], [0, 0]]) = [[1, t], [0, 1]]
        let a = Matrix::from_rows(&[vec![0.0, 3.0], vec![0.0, 0.0]]).unwrap();
        let e = expm(&a).unwrap();
        let want = Matrix::from_rows(&[vec![1.0, 3.0], vec![0.0, 1.0]]).unwrap();
        assert!(e.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn rotation_generator_gives_cosine_sine() {
        let theta = 1.3;
        let a = Matrix::from_rows(&[vec![0.0, -theta], vec![theta, 0.0]]).unwrap();
        let e = expm(&a).unwrap();
        let want = Matrix::from_rows(&[
            vec![theta.cos(), -theta.sin()],
            vec![theta.sin(), theta.cos()],
        ])
        .unwrap();
        assert!(e.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn semigroup_property_holds() {
        let mut state = 17u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let a = Matrix::from_fn(6, 6, |_, _| next() * 2.0);
        let whole = expm(&a).unwrap();
        let half = expm(&a.scale(0.5)).unwrap();
        let composed = half.dot(&half);
        assert!(composed.max_abs_diff(&whole) <= 1e-12 * whole.max_abs().max(1.0));
    }

    #[test]
    fn large_norm_still_accurate() {
        // Scaling kicks in well above the Pade threshold.
        let a = Matrix::from_diag(&[200.0, -300.0]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - 200.0f64.exp()).abs() <= 1e-10 * 200.0f64.exp());
        assert!(e[(1, 1)].abs() < 1e-100);
    }

    #[test]
    fn overflowing_exponential_is_reported() {
        let a = Matrix::from_diag(&[1e4, 1e4]);
        assert!(matches!(expm(&a), Err(Error::NumericalFailure { .. })));
    }
}
