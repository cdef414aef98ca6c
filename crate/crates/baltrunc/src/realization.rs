//! Reachability/observability analysis and minimal realizations.
//!
//! Rank decisions never touch the raw controllability matrix (its columns
//! blow up or collapse exponentially with the state dimension); instead the
//! staircase forms below deflate one reached subspace at a time using SVDs
//! of small coupling blocks, which keeps every rank test on a well-scaled
//! matrix. The four-block decomposition then intersects the controllable
//! subspace with the unobservable one, and a minimal realization keeps only
//! the controllable-and-observable block.

use crate::error::{Error, Result};
use crate::linalg::{complete_basis, inverse, numerical_rank, qr_full, svd, Matrix};
use crate::statespace::{apply_similarity, SimilarityTransform, StateSpaceModel};

/// `[B, AB, A^2 B, ..., A^{n-1} B]`. For analysis and small-scale tests
/// only; see the module docs for why rank decisions avoid this matrix.
pub fn controllability_matrix(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.rows();
    let m = b.cols();
    let mut out = Matrix::zeros(n, n * m);
    let mut power = b.clone();
    for k in 0..n {
        out.set_block(0, k * m, &power);
        if k + 1 < n {
            power = a.dot(&power);
        }
    }
    out
}

/// `[C; CA; CA^2; ...; CA^{n-1}]` stacked by rows.
pub fn observability_matrix(a: &Matrix, c: &Matrix) -> Matrix {
    controllability_matrix(&a.transpose(), &c.transpose()).transpose()
}

/// Whether `(A, B)` is controllable to within the relative rank tolerance.
pub fn is_controllable_pair(a: &Matrix, b: &Matrix, rel_tol: f64) -> Result<bool> {
    Ok(numerical_rank(&controllability_matrix(a, b), rel_tol)? == a.rows())
}

/// Whether `(A, C)` is observable; by duality this is exactly
/// controllability of the transposed pair.
pub fn is_observable_pair(a: &Matrix, c: &Matrix, rel_tol: f64) -> Result<bool> {
    is_controllable_pair(&a.transpose(), &c.transpose(), rel_tol)
}

/// Controllable staircase form: `a = t a0 t^T`, `b = t b0` with orthogonal
/// `t`, the reachable part occupying the leading `rank` coordinates. Below
/// them `b` is zero and `a` has (numerically) zero coupling from the leading
/// block, i.e. `a[rank.., ..rank] ~ 0`.
#[derive(Debug, Clone)]
pub struct ControllableStaircase {
    pub a: Matrix,
    pub b: Matrix,
    pub t: Matrix,
    pub rank: usize,
}

/// Observable staircase form: `a = t a0 t^T`, `c = c0 t^T` with orthogonal
/// `t`, the observable part leading. `c` is zero beyond the first `rank`
/// columns and `a[..rank, rank..] ~ 0` (block lower triangular).
#[derive(Debug, Clone)]
pub struct ObservableStaircase {
    pub a: Matrix,
    pub c: Matrix,
    pub t: Matrix,
    pub rank: usize,
}

pub fn controllable_staircase(
    a: &Matrix,
    b: &Matrix,
    rel_tol: f64,
) -> Result<ControllableStaircase> {
    let (a, b, t, rank) = staircase(a, b, rel_tol)?;
    Ok(ControllableStaircase { a, b, t, rank })
}

pub fn observable_staircase(a: &Matrix, c: &Matrix, rel_tol: f64) -> Result<ObservableStaircase> {
    let (ad, cd, t, rank) = staircase(&a.transpose(), &c.transpose(), rel_tol)?;
    Ok(ObservableStaircase {
        a: ad.transpose(),
        c: cd.transpose(),
        t,
        rank,
    })
}

/// Iterated range deflation. Each stage takes the coupling block from the
/// newest reached stair into the unreached states, measures its rank by SVD,
/// and rotates the unreached block so the newly reached directions come
/// first. Stops when the coupling vanishes or every state is reached.
fn staircase(a0: &Matrix, b0: &Matrix, rel_tol: f64) -> Result<(Matrix, Matrix, Matrix, usize)> {
    let n = a0.rows();
    if b0.rows() != n || !a0.is_square() {
        return Err(Error::ShapeMismatch {
            op: "staircase",
            left: a0.shape(),
            right: b0.shape(),
        });
    }
    let mut a = a0.clone();
    let mut b = b0.clone();
    let mut t = Matrix::identity(n);
    let mut processed = 0usize;
    let mut prev_stair = 0usize;

    // One absolute cutoff for every stage, anchored to the system scale.
    // Anchoring to each coupling block's own largest singular value would
    // make the test scale-free per stage: a block of pure rounding noise
    // (for example after a similarity that should have zeroed it) would
    // then count as full rank and the staircase could never deflate.
    let cutoff = rel_tol * a0.fro_norm().max(b0.fro_norm());

    while processed < n {
        let coupling = if processed == 0 {
            b.clone()
        } else {
            a.block(processed, n, processed - prev_stair, processed)
        };
        let sv = svd(&coupling)?;
        let rank = sv.s.iter().filter(|&&s| s > cutoff).count();
        if rank == 0 {
            break;
        }
        let q = n - processed;
        // q x q rotation of the unreached block: reached directions first.
        let w = complete_basis(&sv.u.block(0, q, 0, rank));
        rotate_rows(&mut a, &w, processed);
        rotate_cols(&mut a, &w, processed);
        rotate_rows(&mut b, &w, processed);
        rotate_rows(&mut t, &w, processed);
        processed += rank;
        prev_stair = rank;
    }
    Ok((a, b, t, processed))
}

/// `m[from.., :] = w^T m[from.., :]` for a square `w` matching the tail size.
fn rotate_rows(m: &mut Matrix, w: &Matrix, from: usize) {
    let tail = m.block(from, m.rows(), 0, m.cols());
    m.set_block(from, 0, &w.transpose().dot(&tail));
}

/// `m[:, from..] = m[:, from..] w`.
fn rotate_cols(m: &mut Matrix, w: &Matrix, from: usize) {
    let tail = m.block(0, m.rows(), from, m.cols());
    m.set_block(0, from, &tail.dot(w));
}

/// The four-block reachability/observability decomposition. In the
/// transformed coordinates the state splits, in order, into
///
/// 1. controllable and observable (`dim_co`),
/// 2. controllable but unobservable (`dim_cno`),
/// 3. uncontrollable but observable (`dim_nco`),
/// 4. uncontrollable and unobservable (`dim_ncno`),
///
/// so `b` is zero in blocks 3-4, `c` is zero on blocks 2 and 4, and `a` has
/// zero blocks wherever a trajectory would otherwise leak between them
/// (rows 3-4 of columns 1-2, and rows 1 and 3 of columns 2 and 4).
#[derive(Debug, Clone)]
pub struct KalmanDecomposition {
    pub transformed: StateSpaceModel,
    pub transform: SimilarityTransform,
    pub dim_co: usize,
    pub dim_cno: usize,
    pub dim_nco: usize,
    pub dim_ncno: usize,
}

/// A principal direction counts as shared between the controllable and
/// unobservable subspaces when the cosine of its angle reaches this value.
const INTERSECTION_COS: f64 = 1.0 - 1e-8;

pub fn kalman_decompose(model: &StateSpaceModel, rel_tol: f64) -> Result<KalmanDecomposition> {
    let n = model.n;
    let cs = controllable_staircase(&model.a, &model.b, rel_tol)?;
    let os = observable_staircase(&model.a, &model.c, rel_tol)?;
    let rc = cs.rank;
    let ro = os.rank;

    // Orthonormal bases in the original coordinates: columns of t^T.
    let ctrb_basis = cs.t.transpose().block(0, n, 0, rc); // controllable subspace
    let unobs_basis = os.t.transpose().block(0, n, ro, n); // unobservable subspace
    let unobs_dim = n - ro;

    // Principal directions between the two subspaces; cosines near one mark
    // the intersection (controllable AND unobservable).
    let angles = svd(&ctrb_basis.transpose().dot(&unobs_basis))?;
    let mut dim_cno = angles.s.iter().filter(|&&s| s >= INTERSECTION_COS).count();
    // Dimension counting forces the intersection to be at least
    // dim(ctrb) + dim(unobs) - n; keep the partition consistent even if a
    // borderline cosine fell just under the threshold.
    dim_cno = dim_cno.max((rc + unobs_dim).saturating_sub(n));

    let u_full = complete_basis(&angles.u); // rc x rc
    let v_full = complete_basis(&angles.v); // unobs_dim x unobs_dim
    let v2 = ctrb_basis.dot(&u_full.block(0, rc, 0, dim_cno));
    let v1 = ctrb_basis.dot(&u_full.block(0, rc, dim_cno, rc));
    let v4 = unobs_basis.dot(&v_full.block(0, unobs_dim, dim_cno, unobs_dim));

    let dim_co = rc - dim_cno;
    let dim_ncno = unobs_dim - dim_cno;
    let dim_nco = n - dim_co - dim_cno - dim_ncno;

    // Complete the remaining (uncontrollable, observable) block against the
    // span of everything placed so far.
    let placed = v1.hcat(&v2).hcat(&v4);
    let v3 = if dim_nco > 0 {
        qr_full(&placed).0.block(0, n, placed.cols(), n)
    } else {
        Matrix::zeros(n, 0)
    };

    let t_inv = v1.hcat(&v2).hcat(&v3).hcat(&v4);
    let t = inverse(&t_inv)?;
    let transform = SimilarityTransform::new(t, t_inv)?;
    let transformed = apply_similarity(model, &transform)?;
    Ok(KalmanDecomposition {
        transformed,
        transform,
        dim_co,
        dim_cno,
        dim_nco,
        dim_ncno,
    })
}

/// Strip unreachable and unobservable dynamics: keep the leading
/// controllable-and-observable block of the decomposition. The feedthrough
/// is carried over bit for bit; a system with no such block comes back with
/// order zero and only its feedthrough intact.
pub fn minimal_realization(
    model: &StateSpaceModel,
    rel_tol: f64,
) -> Result<(StateSpaceModel, KalmanDecomposition)> {
    let dec = kalman_decompose(model, rel_tol)?;
    let r = dec.dim_co;
    let tm = &dec.transformed;
    let reduced = StateSpaceModel::new(
        tm.a.block(0, r, 0, r),
        tm.b.block(0, r, 0, tm.m),
        tm.c.block(0, tm.p, 0, r),
        tm.d.clone(),
    )?;
    Ok((reduced, dec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::default_rank_tol;
    use crate::statespace::transfer_at;

    fn tol(n: usize) -> f64 {
        default_rank_tol(n, n)
    }

    fn zero_tol(model: &StateSpaceModel) -> f64 {
        1e-8 * model
            .a
            .fro_norm()
            .max(model.b.fro_norm())
            .max(model.c.fro_norm())
    }

    #[test]
    fn controllability_matrix_by_hand() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        // [b, a b] = [[1, 3], [1, 1]]
        let want = Matrix::from_rows(&[vec![1.0, 3.0], vec![1.0, 1.0]]).unwrap();
        assert!(controllability_matrix(&a, &b).max_abs_diff(&want) == 0.0);
    }

    #[test]
    fn observability_matrix_by_hand() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let c = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        // [c; c a] = [[1, 0], [1, 2]]
        let want = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert!(observability_matrix(&a, &c).max_abs_diff(&want) == 0.0);
    }

    #[test]
    fn diagonal_system_with_unreached_mode() {
        let a = Matrix::from_diag(&[-1.0, -2.0]);
        let b = Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        assert!(!is_controllable_pair(&a, &b, tol(2)).unwrap());
        let full_b = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        assert!(is_controllable_pair(&a, &full_b, tol(2)).unwrap());
    }

    #[test]
    fn staircase_separates_unreachable_mode() {
        let a = Matrix::from_diag(&[-1.0, -2.0, -3.0]);
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![0.0]]).unwrap();
        let st = controllable_staircase(&a, &b, tol(3)).unwrap();
        assert_eq!(st.rank, 2);
        // t is orthogonal.
        let defect = (&st.t.transpose().dot(&st.t) - &Matrix::identity(3)).fro_norm();
        assert!(defect <= 1e-10 * 3.0);
        // b vanishes below the reached block, and a has no feedback into it.
        let scale = 1e-8 * a.fro_norm().max(b.fro_norm());
        assert!(st.b.block(2, 3, 0, 1).max_abs() <= scale);
        assert!(st.a.block(2, 3, 0, 2).max_abs() <= scale);
        // Similarity is exact: a = t a0 t^T.
        let back = st.t.transpose().dot(&st.a).dot(&st.t);
        assert!(back.max_abs_diff(&a) <= 1e-12 * a.fro_norm());
    }

    #[test]
    fn observable_staircase_is_dual() {
        let a = Matrix::from_diag(&[-1.0, -2.0, -3.0]);
        let c = Matrix::from_rows(&[vec![1.0, 0.0, 1.0]]).unwrap();
        let st = observable_staircase(&a, &c, tol(3)).unwrap();
        assert_eq!(st.rank, 2);
        // c supported on the leading block only.
        let scale = 1e-8 * a.fro_norm().max(c.fro_norm());
        assert!(st.c.block(0, 1, 2, 3).max_abs() <= scale);
        // Block lower triangular: no coupling from the trailing block into
        // what the output sees.
        assert!(st.a.block(0, 2, 2, 3).max_abs() <= scale);
        let rank_direct = numerical_rank(&observability_matrix(&a, &c), tol(3)).unwrap();
        assert_eq!(st.rank, rank_direct);
    }

    #[test]
    fn coupled_system_keeps_globally_observable_modes() {
        // The uncontrollable mode x3 feeds the output directly, and the
        // uncontrollable mode x2 feeds x1 which is observed: both are
        // globally observable even though the (a, c) pair restricted to the
        // uncontrollable block alone would not see x2's coupling path.
        let a = Matrix::from_rows(&[
            vec![-1.0, 1.0, 0.0],
            vec![0.0, -2.0, 0.0],
            vec![0.0, 0.0, -3.0],
        ])
        .unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![0.0], vec![0.0]]).unwrap();
        let c = Matrix::from_rows(&[vec![1.0, 0.0, 1.0]]).unwrap();
        let d = Matrix::zeros(1, 1);
        let model = StateSpaceModel::new(a, b, c, d).unwrap();

        let dec = kalman_decompose(&model, tol(3)).unwrap();
        assert_eq!(
            (dec.dim_co, dec.dim_cno, dec.dim_nco, dec.dim_ncno),
            (1, 0, 2, 0)
        );
        assert_structural_zeros(&dec);

        // The minimal realization is the scalar system 1/(s + 1).
        let (minimal, _) = minimal_realization(&model, tol(3)).unwrap();
        assert_eq!(minimal.n, 1);
        for &omega in &[0.0, 0.3, 1.0, 10.0] {
            let h0 = transfer_at(&model, omega).unwrap();
            let h1 = transfer_at(&minimal, omega).unwrap();
            assert!(h0.max_abs_diff(&h1) < 1e-9, "transfer mismatch at {omega}");
        }
    }

    fn assert_structural_zeros(dec: &KalmanDecomposition) {
        let tm = &dec.transformed;
        let tol = zero_tol(tm).max(1e-12);
        let (d1, d2, d3) = (dec.dim_co, dec.dim_cno, dec.dim_nco);
        let n = tm.n;
        let (e1, e2, e3) = (d1, d1 + d2, d1 + d2 + d3);
        let zero_blocks = [
            // rows of a that must not see the controllable blocks
            (e2, n, 0, e2),
            // rows of a that must not see the unobservable blocks
            (0, d1, e1, e2),
            (0, d1, e3, n),
            (e2, e3, e1, e2),
            (e2, e3, e3, n),
        ];
        for &(r0, r1, c0, c1) in &zero_blocks {
            if r0 < r1 && c0 < c1 {
                assert!(
                    tm.a.block(r0, r1, c0, c1).max_abs() <= tol,
                    "a block ({r0}..{r1}, {c0}..{c1}) not zero"
                );
            }
        }
        if e2 < n {
            assert!(
                tm.b.block(e2, n, 0, tm.m).max_abs() <= tol,
                "b tail not zero"
            );
        }
        if d1 < e2 {
            assert!(
                tm.c.block(0, tm.p, e1, e2).max_abs() <= tol,
                "c block 2 not zero"
            );
        }
        if e3 < n {
            assert!(
                tm.c.block(0, tm.p, e3, n).max_abs() <= tol,
                "c block 4 not zero"
            );
        }
    }

    #[test]
    fn planted_four_block_dims_are_recovered() {
        // Diagonal system where each state is exactly one of the four kinds.
        let a = Matrix::from_diag(&[-1.0, -2.0, -3.0, -4.0]);
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![0.0], vec![0.0]]).unwrap();
        let c = Matrix::from_rows(&[vec![1.0, 0.0, 1.0, 0.0]]).unwrap();
        let model = StateSpaceModel::new(a, b, c, Matrix::zeros(1, 1)).unwrap();
        let dec = kalman_decompose(&model, tol(4)).unwrap();
        assert_eq!(
            (dec.dim_co, dec.dim_cno, dec.dim_nco, dec.dim_ncno),
            (1, 1, 1, 1)
        );
        assert_structural_zeros(&dec);
    }

    #[test]
    fn minimal_realization_is_idempotent() {
        let a = Matrix::from_diag(&[-1.0, -2.0, -3.0, -4.0]);
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![0.0], vec![0.0]]).unwrap();
        let c = Matrix::from_rows(&[vec![1.0, 0.0, 1.0, 0.0]]).unwrap();
        let model = StateSpaceModel::new(a, b, c, Matrix::zeros(1, 1)).unwrap();
        let (first, _) = minimal_realization(&model, tol(4)).unwrap();
        assert_eq!(first.n, 1);
        let (second, dec) = minimal_realization(&first, tol(1)).unwrap();
        assert_eq!(second.n, 1);
        assert_eq!(dec.dim_co, 1);
    }

    #[test]
    fn unconnected_system_reduces_to_feedthrough() {
        let model = StateSpaceModel::new(
            Matrix::from_diag(&[-1.0, -2.0]),
            Matrix::zeros(2, 1),
            Matrix::zeros(1, 2),
            Matrix::from_rows(&[vec![7.5]]).unwrap(),
        )
        .unwrap();
        let (minimal, dec) = minimal_realization(&model, tol(2)).unwrap();
        assert_eq!(minimal.n, 0);
        assert_eq!(dec.dim_ncno, 2);
        assert_eq!(minimal.d[(0, 0)], 7.5);
    }

    #[test]
    fn fully_minimal_system_is_untouched_in_order() {
        let a = Matrix::from_rows(&[vec![-1.0, 0.5], vec![0.0, -2.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let c = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let model = StateSpaceModel::new(a, b, c, Matrix::zeros(1, 1)).unwrap();
        let (minimal, dec) = minimal_realization(&model, tol(2)).unwrap();
        assert_eq!(minimal.n, 2);
        assert_eq!(dec.dim_co, 2);
        for &omega in &[0.0, 1.0, 5.0] {
            let h0 = transfer_at(&model, omega).unwrap();
            let h1 = transfer_at(&minimal, omega).unwrap();
            assert!(h0.max_abs_diff(&h1) < 1e-10);
        }
    }
}
