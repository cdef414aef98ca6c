//! Balancing, Hankel singular values, order selection, truncation, and the
//! truncation error bounds.
//!
//! In balanced coordinates both infinite gramians equal the same diagonal
//! matrix of Hankel singular values; states with small values are both hard
//! to reach and hard to observe, so dropping them perturbs the input-output
//! map by a bounded amount: the worst-case frequency-domain error of a
//! truncation lies between the largest truncated value and twice the sum of
//! the distinct truncated values.

use crate::error::{Error, Result};
use crate::gramians::infinite_gramians;
use crate::linalg::{cholesky_psd, svd, Matrix};
use crate::realization::{minimal_realization, KalmanDecomposition};
use crate::statespace::{apply_similarity, is_stable, SimilarityTransform, StateSpaceModel};

/// A model in balanced coordinates together with the transform that got it
/// there and its Hankel singular values (strictly positive, descending).
#[derive(Debug, Clone)]
pub struct BalancedRealization {
    pub model: StateSpaceModel,
    pub transform: SimilarityTransform,
    pub hsv: Vec<f64>,
    /// True when a gramian pivot or singular value had to be clamped to stay
    /// positive: the model is non-minimal (or numerically close to it) and
    /// the trailing balanced states are not trustworthy. Truncating them away
    /// is fine; keeping them is not.
    pub clamped: bool,
}

/// What a truncation kept, what it dropped, and the error bounds that
/// dropping implies.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub original_order: usize,
    pub minimal_order: usize,
    pub reduced_order: usize,
    pub hsv_kept: Vec<f64>,
    pub hsv_truncated: Vec<f64>,
    /// Truncated values deduplicated (relative tolerance 1e-6, keeping the
    /// largest of each cluster); the upper bound sums over these.
    pub distinct_truncated: Vec<f64>,
    /// Largest distinct truncated value: no approximation of this order can
    /// do better in the worst case.
    pub lower_bound: f64,
    /// Twice the sum of distinct truncated values: the truncated model is
    /// guaranteed at least this close.
    pub upper_bound: f64,
    /// `h_r / h_{r+1}`; infinite when nothing was truncated.
    pub gap_ratio: f64,
}

/// How to pick the reduced order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderCriterion {
    /// Keep exactly this many states (capped at the model order).
    ExplicitOrder(usize),
    /// Keep as few states as possible while the guaranteed error bound
    /// (twice the sum of distinct truncated values) stays within the budget.
    ErrorBudget(f64),
    /// Keep every state whose value is at least this fraction of the largest.
    RelativeFloor(f64),
}

/// Options for the end-to-end pipeline.
#[derive(Debug, Clone, Default)]
pub struct ReductionOptions {
    /// Relative rank tolerance for the minimal-realization step; default is
    /// the state dimension times machine epsilon.
    pub rank_tol: Option<f64>,
}

/// Truncation boundaries must separate values by at least this relative gap;
/// splitting a tied cluster would forfeit the stability guarantee.
const GAP_TOL: f64 = 1e-8;
/// Relative noise floor for factoring gramians. Gramians of models with
/// deeply decaying singular values are numerically semidefinite even when
/// the model is minimal — trailing pivots round to tiny negatives — so they
/// are factored with the rank-revealing pivoted routine, which stops at this
/// floor and reports the deficiency as a flag instead of failing.
const GRAMIAN_PIVOT_GUARD: f64 = 1e-12;
/// Values below this fraction of the largest are clamped up (with a warning
/// flag) so that inverse square roots stay finite.
const HSV_FLOOR: f64 = 1e-14;
/// Relative tolerance under which two truncated values merge into one
/// distinct value for the upper-bound sum.
const DEDUP_TOL: f64 = 1e-6;

/// Hankel singular values of a stable model, descending. The boolean flags
/// whether any value had to be clamped to the floor `1e-14 * h_1` — a sign
/// the model is nearly non-minimal and a minimal realization is in order.
pub fn hankel_singular_values(model: &StateSpaceModel) -> Result<(Vec<f64>, bool)> {
    let gramians = infinite_gramians(model)?;
    let lc = cholesky_psd(&gramians.xc, GRAMIAN_PIVOT_GUARD)?;
    let lo = cholesky_psd(&gramians.yo, GRAMIAN_PIVOT_GUARD)?;
    let sigma = svd(&lo.f.transpose().dot(&lc.f))?.s;
    let (values, floored) = clamp_floor(sigma);
    Ok((values, floored || lc.clamped || lo.clamped))
}

fn clamp_floor(mut values: Vec<f64>) -> (Vec<f64>, bool) {
    let floor = values.first().copied().unwrap_or(0.0) * HSV_FLOOR;
    let mut clamped = false;
    for v in values.iter_mut() {
        if *v < floor {
            *v = floor;
            clamped = true;
        }
    }
    (values, clamped)
}

/// Square-root balancing of a stable model.
///
/// With gramian factors `X_C = L_c L_c^T` and `Y_O = L_o L_o^T` and the SVD
/// `L_o^T L_c = U S V^T`, the transform pair `T^{-1} = L_c V S^{-1/2}`,
/// `T = S^{-1/2} U^T L_o^T` maps both gramians onto `diag(S)`. The product
/// of gramians is never formed.
///
/// Non-minimal (or numerically near-non-minimal) models do not fail here:
/// their gramians are factored with the rank-revealing pivoted routine and
/// the singular values floored, which the `clamped` flag reports. The
/// trailing balanced states are then meaningless — truncate them, or run a
/// minimal realization first.
pub fn balance(model: &StateSpaceModel) -> Result<BalancedRealization> {
    let gramians = infinite_gramians(model)?;
    let lc = cholesky_psd(&gramians.xc, GRAMIAN_PIVOT_GUARD)?;
    let lo = cholesky_psd(&gramians.yo, GRAMIAN_PIVOT_GUARD)?;
    let product = svd(&lo.f.transpose().dot(&lc.f))?;
    let (hsv, floored) = clamp_floor(product.s.clone());
    let clamped = floored || lc.clamped || lo.clamped;

    let inv_sqrt = Matrix::from_diag(&hsv.iter().map(|h| h.powf(-0.5)).collect::<Vec<_>>());
    let t_inv = lc.f.dot(&product.v).dot(&inv_sqrt);
    let t = inv_sqrt.dot(&product.u.transpose()).dot(&lo.f.transpose());
    // Exact inverses by construction (t * t_inv telescopes to the identity
    // through the SVD), but with deep singular-value decay the floating-point
    // product strays too far for the checked constructor.
    let transform = SimilarityTransform::new_unchecked(t, t_inv)?;
    let balanced = apply_similarity(model, &transform)?;
    Ok(BalancedRealization {
        model: balanced,
        transform,
        hsv,
        clamped,
    })
}

/// Pick a reduced order per the criterion, then walk it down to the nearest
/// index with a genuine spectral gap (`h_r / h_{r+1} > 1 + 1e-8`). Keeping
/// at least one state is enforced; keeping all of them needs no gap. If no
/// boundary at or below the requested order separates cleanly, the tied
/// cluster is reported instead.
pub fn select_order(hsv: &[f64], criterion: OrderCriterion) -> Result<usize> {
    let n = hsv.len();
    if n == 0 {
        return Ok(0);
    }
    if hsv.iter().any(|&h| h <= 0.0 || !h.is_finite()) {
        return Err(Error::InvalidArgument(
            "singular values must be positive and finite".into(),
        ));
    }
    if hsv.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument(
            "singular values must be sorted descending".into(),
        ));
    }

    let requested = match criterion {
        OrderCriterion::ExplicitOrder(r) => r.min(n),
        OrderCriterion::ErrorBudget(budget) => {
            if !(budget >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "error budget must be nonnegative, got {budget}"
                )));
            }
            // Smallest r whose guaranteed bound fits the budget.
            let mut r = n;
            while r > 0 {
                let (distinct, _) = dedup_descending(&hsv[r - 1..]);
                if 2.0 * distinct.iter().sum::<f64>() <= budget {
                    r -= 1;
                } else {
                    break;
                }
            }
            r
        }
        OrderCriterion::RelativeFloor(rho) => {
            if !(rho > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "relative floor must be positive, got {rho}"
                )));
            }
            hsv.iter().filter(|&&h| h >= rho * hsv[0]).count()
        }
    };

    let mut r = requested.max(1).min(n);
    while r < n && r > 0 && hsv[r - 1] / hsv[r] <= 1.0 + GAP_TOL {
        r -= 1;
    }
    if r == 0 {
        let cluster: Vec<f64> = hsv[..=requested.min(n - 1)].to_vec();
        return Err(Error::NoValidGap { cluster });
    }
    Ok(r)
}

/// Merge a descending slice into its distinct values (relative tolerance
/// `1e-6`, keeping the largest of each cluster). Returns the distinct values
/// and their sum.
fn dedup_descending(values: &[f64]) -> (Vec<f64>, f64) {
    let mut distinct: Vec<f64> = Vec::new();
    for &v in values {
        match distinct.last() {
            Some(&anchor) if v >= anchor - DEDUP_TOL * anchor.abs() => {}
            _ => distinct.push(v),
        }
    }
    // fold from +0.0: `Iterator::sum` seeds with -0.0, which would leak a
    // negative zero into reports when nothing was truncated.
    let sum = distinct.iter().fold(0.0, |acc, v| acc + v);
    (distinct, sum)
}

/// Keep the leading `r` states of a balanced realization and report the
/// implied error bounds. `r = n` returns the balanced model unchanged with
/// zero bounds. The feedthrough is carried over bit for bit.
pub fn truncate(
    balanced: &BalancedRealization,
    r: usize,
) -> Result<(StateSpaceModel, ReductionReport)> {
    let n = balanced.model.n;
    let hsv = &balanced.hsv;
    if (r == 0 && n > 0) || r > n {
        return Err(Error::InvalidArgument(format!(
            "reduced order must be in 1..={n}, got {r}"
        )));
    }
    if r < n && hsv[r - 1] / hsv[r] <= 1.0 + GAP_TOL {
        let (cluster_lo, cluster_hi) = cluster_around(hsv, r);
        return Err(Error::NoValidGap {
            cluster: hsv[cluster_lo..cluster_hi].to_vec(),
        });
    }

    let tm = &balanced.model;
    let reduced = StateSpaceModel::new(
        tm.a.block(0, r, 0, r),
        tm.b.block(0, r, 0, tm.m),
        tm.c.block(0, tm.p, 0, r),
        tm.d.clone(),
    )?;

    let hsv_kept = hsv[..r].to_vec();
    let hsv_truncated = hsv[r..].to_vec();
    let (distinct_truncated, distinct_sum) = dedup_descending(&hsv_truncated);
    let lower_bound = distinct_truncated.first().copied().unwrap_or(0.0);
    let upper_bound = 2.0 * distinct_sum;
    let gap_ratio = if r < n {
        hsv[r - 1] / hsv[r]
    } else {
        f64::INFINITY
    };
    let report = ReductionReport {
        original_order: n,
        minimal_order: n,
        reduced_order: r,
        hsv_kept,
        hsv_truncated,
        distinct_truncated,
        lower_bound,
        upper_bound,
        gap_ratio,
    };
    Ok((reduced, report))
}

/// Index range of the tied run that contains the boundary at `r`.
fn cluster_around(hsv: &[f64], r: usize) -> (usize, usize) {
    let n = hsv.len();
    let mut lo = r.saturating_sub(1);
    while lo > 0 && hsv[lo - 1] / hsv[lo] <= 1.0 + GAP_TOL {
        lo -= 1;
    }
    let mut hi = r + 1;
    while hi < n && hsv[hi - 1] / hsv[hi] <= 1.0 + GAP_TOL {
        hi += 1;
    }
    (lo, hi)
}

/// The full pipeline: minimal realization, stability check, balancing,
/// order selection, truncation. The report records the original order, the
/// minimal order, and the final order; the decomposition from the minimal-
/// realization step rides along for inspection.
pub fn balanced_truncation(
    model: &StateSpaceModel,
    criterion: OrderCriterion,
    options: &ReductionOptions,
) -> Result<(StateSpaceModel, ReductionReport, KalmanDecomposition)> {
    let rank_tol = options
        .rank_tol
        .unwrap_or_else(|| crate::linalg::default_rank_tol(model.n, model.n));
    let (minimal, decomposition) = minimal_realization(model, rank_tol)?;
    let (stable, abscissa) = is_stable(&minimal, 0.0)?;
    if minimal.n > 0 && !stable {
        return Err(Error::UnstableSystem { abscissa });
    }

    if minimal.n == 0 {
        let report = ReductionReport {
            original_order: model.n,
            minimal_order: 0,
            reduced_order: 0,
            hsv_kept: Vec::new(),
            hsv_truncated: Vec::new(),
            distinct_truncated: Vec::new(),
            lower_bound: 0.0,
            upper_bound: 0.0,
            gap_ratio: f64::INFINITY,
        };
        return Ok((minimal, report, decomposition));
    }

    let balanced = balance(&minimal)?;
    let r = select_order(&balanced.hsv, criterion)?;
    let (reduced, mut report) = truncate(&balanced, r)?;
    report.original_order = model.n;
    report.minimal_order = minimal.n;
    Ok((reduced, report, decomposition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::transfer_at;

    fn scalar_model(a: f64, b: f64, c: f64) -> StateSpaceModel {
        StateSpaceModel::new(
            Matrix::from_rows(&[vec![a]]).unwrap(),
            Matrix::from_rows(&[vec![b]]).unwrap(),
            Matrix::from_rows(&[vec![c]]).unwrap(),
            Matrix::zeros(1, 1),
        )
        .unwrap()
    }

    /// Decoupled system with prescribed singular values: mode `-lambda_i`
    /// couples to its own input and output channel with gain
    /// `sqrt(2 lambda_i h_i)`, making both gramians exactly `diag(h)`.
    fn planted_system(lambdas: &[f64], hsv: &[f64]) -> StateSpaceModel {
        let k = lambdas.len();
        let a = Matrix::from_diag(&lambdas.iter().map(|l| -l).collect::<Vec<_>>());
        let gains: Vec<f64> = lambdas
            .iter()
            .zip(hsv)
            .map(|(l, h)| (2.0 * l * h).sqrt())
            .collect();
        let b = Matrix::from_diag(&gains);
        let c = Matrix::from_diag(&gains);
        StateSpaceModel::new(a, b, c, Matrix::zeros(k, k)).unwrap()
    }

    #[test]
    fn scalar_hankel_value() {
        let (hsv, clamped) = hankel_singular_values(&scalar_model(-1.0, 1.0, 1.0)).unwrap();
        assert_eq!(hsv.len(), 1);
        assert!((hsv[0] - 0.5).abs() < 1e-14);
        assert!(!clamped);
    }

    #[test]
    fn decoupled_two_state_values() {
        let model = StateSpaceModel::new(
            Matrix::from_diag(&[-1.0, -2.0]),
            Matrix::identity(2),
            Matrix::identity(2),
            Matrix::zeros(2, 2),
        )
        .unwrap();
        let (hsv, _) = hankel_singular_values(&model).unwrap();
        assert!((hsv[0] - 0.5).abs() < 1e-12);
        assert!((hsv[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn near_nonminimal_values_are_clamped_with_warning() {
        // Second state couples at 1e-9: its value is far below the floor.
        let model = StateSpaceModel::new(
            Matrix::from_diag(&[-1.0, -2.0]),
            Matrix::from_rows(&[vec![1.0], vec![1e-9]]).unwrap(),
            Matrix::from_rows(&[vec![1.0, 1e-9]]).unwrap(),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let (hsv, clamped) = hankel_singular_values(&model).unwrap();
        assert!(clamped);
        assert!(hsv[1] >= 1e-14 * hsv[0] * 0.999);
    }

    #[test]
    fn balance_scalar_by_hand() {
        // X_C = 2, Y_O = 1/2, hsv = [1]; balanced gramians both [[1]].
        let balanced = balance(&scalar_model(-1.0, 2.0, 1.0)).unwrap();
        assert!((balanced.hsv[0] - 1.0).abs() < 1e-12);
        let g = infinite_gramians(&balanced.model).unwrap();
        assert!((g.xc[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((g.yo[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn balanced_gramians_are_diagonal() {
        let model = planted_system(&[1.0, 2.0, 3.0], &[1.0, 0.4, 0.07]);
        let balanced = balance(&model).unwrap();
        let g = infinite_gramians(&balanced.model).unwrap();
        let want = Matrix::from_diag(&balanced.hsv);
        assert!(g.xc.max_abs_diff(&want) <= 1e-7 * balanced.hsv[0]);
        assert!(g.yo.max_abs_diff(&want) <= 1e-7 * balanced.hsv[0]);
    }

    #[test]
    fn balancing_a_balanced_system_is_a_fixed_point() {
        let model = planted_system(&[1.0, 2.0], &[0.5, 0.25]);
        let first = balance(&model).unwrap();
        let second = balance(&first.model).unwrap();
        for (a, b) in first.hsv.iter().zip(second.hsv.iter()) {
            assert!((a - b).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn nonminimal_input_is_flagged_and_floored() {
        // The second state is unreachable, so the controllability gramian is
        // singular: balancing must survive, flag the clamp, and still get the
        // reachable part right (its value is 1/2 from the scalar section).
        let model = StateSpaceModel::new(
            Matrix::from_diag(&[-1.0, -2.0]),
            Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let balanced = balance(&model).unwrap();
        assert!(balanced.clamped);
        assert!((balanced.hsv[0] - 0.5).abs() <= 1e-9);
        assert!(balanced.hsv[1] <= balanced.hsv[0] * 1e-6);
        assert!(balanced.model.a.all_finite());
    }

    #[test]
    fn select_order_spec_cases() {
        assert_eq!(
            select_order(&[1.0, 0.1, 0.01], OrderCriterion::ExplicitOrder(2)).unwrap(),
            2
        );
        // A tied pair cannot be split: the boundary moves down.
        assert_eq!(
            select_order(&[1.0, 0.5, 0.5, 0.01], OrderCriterion::ExplicitOrder(2)).unwrap(),
            1
        );
        assert_eq!(
            select_order(&[1.0, 0.1, 0.01], OrderCriterion::ErrorBudget(0.05)).unwrap(),
            2
        );
    }

    #[test]
    fn relative_floor_counts_values() {
        assert_eq!(
            select_order(&[1.0, 0.5, 1e-4], OrderCriterion::RelativeFloor(1e-2)).unwrap(),
            2
        );
        // Keeping everything needs no gap.
        assert_eq!(
            select_order(&[1.0, 0.5, 1e-4], OrderCriterion::RelativeFloor(1e-9)).unwrap(),
            3
        );
    }

    #[test]
    fn fully_tied_values_have_no_valid_gap() {
        match select_order(&[1.0, 1.0, 1.0], OrderCriterion::ExplicitOrder(2)) {
            Err(Error::NoValidGap { cluster }) => assert!(cluster.len() >= 2),
            other => panic!("expected NoValidGap, got {other:?}"),
        }
    }

    #[test]
    fn at_least_one_state_is_kept() {
        assert_eq!(
            select_order(&[1.0, 1e-9], OrderCriterion::RelativeFloor(0.5)).unwrap(),
            1
        );
    }

    #[test]
    fn truncate_keeps_leading_blocks_and_bounds() {
        let model = planted_system(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.2, 0.2, 0.05]);
        let balanced = balance(&model).unwrap();
        let (reduced, report) = truncate(&balanced, 1).unwrap();
        assert_eq!(reduced.n, 1);
        assert_eq!(report.reduced_order, 1);
        assert_eq!(report.hsv_kept.len(), 1);
        assert_eq!(report.hsv_truncated.len(), 3);
        // {0.2, 0.2, 0.05} dedups to {0.2, 0.05}: lower 0.2, upper 0.5.
        assert_eq!(report.distinct_truncated.len(), 2);
        assert!((report.lower_bound - 0.2).abs() < 1e-9);
        assert!((report.upper_bound - 0.5).abs() < 1e-9);
        assert!(report.gap_ratio > 1.0 + GAP_TOL);
        assert!(report.lower_bound <= report.upper_bound);
        // Feedthrough is bit-identical.
        assert_eq!(reduced.d.data(), model.d.data());
    }

    #[test]
    fn truncate_to_full_order_is_identity() {
        let model = planted_system(&[1.0, 2.0], &[0.5, 0.25]);
        let balanced = balance(&model).unwrap();
        let (same, report) = truncate(&balanced, 2).unwrap();
        assert_eq!(same, balanced.model);
        assert_eq!(report.lower_bound, 0.0);
        assert_eq!(report.upper_bound, 0.0);
        assert!(report.gap_ratio.is_infinite());
        assert!(report.hsv_truncated.is_empty());
    }

    #[test]
    fn truncate_refuses_to_split_cluster() {
        let model = planted_system(&[1.0, 2.0, 3.0], &[1.0, 0.2, 0.2]);
        let balanced = balance(&model).unwrap();
        match truncate(&balanced, 2) {
            Err(Error::NoValidGap { cluster }) => {
                assert_eq!(cluster.len(), 2);
                assert!((cluster[0] - 0.2).abs() < 1e-6);
            }
            other => panic!("expected NoValidGap, got {other:?}"),
        }
    }

    #[test]
    fn pipeline_on_planted_nonminimal_model() {
        // Three coupled-and-observed modes with values {1, 0.3, 1e-6},
        // padded with two unreachable states.
        let minimal_part = planted_system(&[1.0, 2.0, 3.0], &[1.0, 0.3, 1e-6]);
        let mut a = Matrix::zeros(5, 5);
        a.set_block(0, 0, &minimal_part.a);
        a[(3, 3)] = -4.0;
        a[(4, 4)] = -5.0;
        let b = minimal_part.b.vcat(&Matrix::zeros(2, 3));
        let c = minimal_part.c.hcat(&Matrix::from_fn(3, 2, |_, _| 1.0));
        let model = StateSpaceModel::new(a, b, c, Matrix::zeros(3, 3)).unwrap();

        let (reduced, report, dec) = balanced_truncation(
            &model,
            OrderCriterion::ErrorBudget(1e-4),
            &ReductionOptions::default(),
        )
        .unwrap();
        assert_eq!(report.original_order, 5);
        assert_eq!(report.minimal_order, 3);
        assert_eq!(report.reduced_order, 2);
        assert_eq!(reduced.n, 2);
        assert_eq!(dec.dim_co, 3);
        assert!(report.upper_bound <= 1e-4);
    }

    #[test]
    fn pipeline_identity_preserves_transfer() {
        let model = planted_system(&[1.0, 2.0, 3.0], &[1.0, 0.4, 0.1]);
        let (reduced, _, _) = balanced_truncation(
            &model,
            OrderCriterion::ExplicitOrder(3),
            &ReductionOptions::default(),
        )
        .unwrap();
        assert_eq!(reduced.n, 3);
        for &omega in &[0.0, 0.5, 2.0, 20.0] {
            let h0 = transfer_at(&model, omega).unwrap();
            let h1 = transfer_at(&reduced, omega).unwrap();
            assert!(h0.max_abs_diff(&h1) < 1e-8, "transfer drift at {omega}");
        }
    }

    #[test]
    fn pipeline_rejects_unstable_models() {
        let model = scalar_model(1.0, 1.0, 1.0);
        match balanced_truncation(
            &model,
            OrderCriterion::ExplicitOrder(1),
            &ReductionOptions::default(),
        ) {
            Err(Error::UnstableSystem { abscissa }) => assert!((abscissa - 1.0).abs() < 1e-12),
            other => panic!("expected UnstableSystem, got {other:?}"),
        }
    }

    #[test]
    fn pipeline_handles_pure_feedthrough() {
        let model = StateSpaceModel::new(
            Matrix::from_diag(&[-1.0]),
            Matrix::zeros(1, 1),
            Matrix::zeros(1, 1),
            Matrix::from_rows(&[vec![4.5]]).unwrap(),
        )
        .unwrap();
        let (reduced, report, _) = balanced_truncation(
            &model,
            OrderCriterion::ExplicitOrder(1),
            &ReductionOptions::default(),
        )
        .unwrap();
        assert_eq!(reduced.n, 0);
        assert_eq!(report.minimal_order, 0);
        assert_eq!(reduced.d[(0, 0)], 4.5);
    }

    #[test]
    fn truncated_model_is_balanced_with_kept_values() {
        let model = planted_system(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.5, 0.2, 0.08]);
        let balanced = balance(&model).unwrap();
        let (reduced, report) = truncate(&balanced, 2).unwrap();
        let g = infinite_gramians(&reduced).unwrap();
        let want = Matrix::from_diag(&report.hsv_kept);
        assert!(g.xc.max_abs_diff(&want) <= 1e-7 * report.hsv_kept[0]);
        assert!(g.yo.max_abs_diff(&want) <= 1e-7 * report.hsv_kept[0]);
    }
}
