mod common;

use std::sync::Arc;

use abba_core::arnoldi::{
    solve_projected_ls, solve_projected_tikhonov, svd_of_hessenberg, ArnoldiState, StepOutcome,
};
use abba_core::ct::{add_noise, ray, trace_ray, ImageGrid, ParallelGeometry};
use abba_core::linalg::{self, Mat};
use abba_core::metrics::{rre, ssim};
use abba_core::operator::transpose_of;
use abba_core::regparam::{tikhonov_curve_points, LambdaGrid, ProjectedSpectrum};
use abba_core::stopping::{dp_should_stop, ncp_distance, rns_should_stop};
use abba_core::{compose, DenseMatrix, LinearOperator};
use common::*;
use proptest::prelude::*;

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn mat_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Mat> {
    vec_strategy(rows * cols).prop_map(move |d| Mat::from_row_major(rows, cols, d))
}

fn hessenberg_strategy(k: usize) -> impl Strategy<Value = Mat> {
    any::<u64>().prop_map(move |s| random_hessenberg(&mut rng(s), k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_identity(m in mat_strategy(6, 4), u in vec_strategy(4), v in vec_strategy(6)) {
        let a = Arc::new(DenseMatrix::new(m).unwrap());
        let at = transpose_of(&a);
        let lhs = linalg::dot(&a.apply(&u), &v);
        let rhs = linalg::dot(&u, &at.apply(&v));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn composite_is_linear(a in mat_strategy(5, 4), b in mat_strategy(4, 3), u in vec_strategy(3), v in vec_strategy(3), s in -3.0f64..3.0) {
        let op = compose(&DenseMatrix::new(a).unwrap().into_handle(), &DenseMatrix::new(b).unwrap().into_handle()).unwrap();
        let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| s * x + y).collect();
        let mut lhs = op.apply(&combo);
        linalg::axpy(-s, &op.apply(&u), &mut lhs);
        linalg::axpy(-1.0, &op.apply(&v), &mut lhs);
        prop_assert!(norm(&lhs) <= 1e-12 * (1.0 + s.abs()) * 10.0);
    }

    #[test]
    fn arnoldi_basis_and_relation(seed in any::<u64>(), steps in 1usize..10) {
        let mut r = rng(seed);
        let op = DenseMatrix::new(random_mat(&mut r, 10, 10)).unwrap().into_handle();
        let mut st = ArnoldiState::new(&random_vec(&mut r, 10)).unwrap();
        for _ in 0..steps {
            if let StepOutcome::Breakdown(_) = st.step(&*op, true).unwrap() {
                break;
            }
        }
        prop_assert!(st.orthonormality_defect() <= 1e-12);
        prop_assert!(st.factorization_defect(&*op) <= 1e-11);
        let h = st.hessenberg();
        for j in 0..h.cols() {
            for i in j + 2..h.rows() {
                prop_assert_eq!(h[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn tikhonov_monotone(h in hessenberg_strategy(6), l1 in 1e-4f64..10.0, l2 in 1e-4f64..10.0) {
        let (lo, hi) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        let a = solve_projected_tikhonov(&h, 1.0, lo).unwrap();
        let b = solve_projected_tikhonov(&h, 1.0, hi).unwrap();
        prop_assert!(norm(&b.y) <= norm(&a.y) * (1.0 + 1e-10) + 1e-14);
        prop_assert!(b.proj_residual_norm >= a.proj_residual_norm * (1.0 - 1e-10) - 1e-14);
    }

    #[test]
    fn projected_residual_matches_direct(h in hessenberg_strategy(5), lambda in 0.0f64..2.0) {
        let s = solve_projected_tikhonov(&h, 1.3, lambda).unwrap();
        let mut r = h.matvec(&s.y);
        r[0] -= 1.3;
        prop_assert!((norm(&r) - s.proj_residual_norm).abs() <= 1e-12 * (1.0 + norm(&r)));
    }

    #[test]
    fn least_squares_residual_shrinks_with_k(h in hessenberg_strategy(7)) {
        let mut prev = f64::INFINITY;
        for k in 1..=7 {
            let mut sub = Mat::zeros(k + 1, k);
            for i in 0..=k {
                for j in 0..k {
                    sub[(i, j)] = h[(i, j)];
                }
            }
            let res = solve_projected_ls(&sub, 1.0).unwrap().proj_residual_norm;
            prop_assert!(res <= prev * (1.0 + 1e-12) + 1e-15);
            prev = res;
        }
    }

    #[test]
    fn singular_values_sorted_nonnegative(h in hessenberg_strategy(6)) {
        let s = svd_of_hessenberg(&h).unwrap();
        prop_assert!(s.sigma.iter().all(|&v| v >= 0.0));
        prop_assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((s.sigma[0] - symmetric_eigenvalues(&h.transpose().matmul(&h))[0].sqrt()).abs() <= 1e-9 * s.sigma[0]);
    }

    #[test]
    fn lcurve_is_monotone_and_gcv_trace_positive(h in hessenberg_strategy(6), beta in 0.1f64..10.0) {
        let spec = ProjectedSpectrum::from_hessenberg(&h, beta).unwrap();
        let grid = LambdaGrid::for_singular_values(&spec.sigma, 50).unwrap();
        let pts = tikhonov_curve_points(&spec, &grid).unwrap();
        for w in pts.windows(2) {
            prop_assert!(w[1].log_solution <= w[0].log_solution + 1e-12);
            prop_assert!(w[1].log_residual >= w[0].log_residual - 1e-12);
        }
        for &l in grid.values() {
            let (_, _, filt) = spec.evaluate(l);
            prop_assert!(7.0 - filt >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn dp_monotone_in_tau(res in 0.0f64..10.0, noise in 0.0f64..10.0, t1 in 1.0f64..3.0, extra in 0.0f64..3.0) {
        if dp_should_stop(res, noise, t1) {
            prop_assert!(dp_should_stop(res, noise, t1 + extra));
        }
    }

    #[test]
    fn ncp_scale_invariant(r in vec_strategy(64), c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0]) {
        prop_assume!(norm(&r) > 1e-6);
        let scaled: Vec<f64> = r.iter().map(|v| c * v).collect();
        let (d, ds) = (ncp_distance(&r, 0).unwrap(), ncp_distance(&scaled, 0).unwrap());
        prop_assert!((d - ds).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn rns_fires_no_later_with_larger_epsilon(history in prop::collection::vec(0.01f64..10.0, 2..40), e1 in 1e-6f64..1.0, e2 in 1e-6f64..1.0) {
        let (small, large) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let first = |eps: f64| (2..=history.len()).find(|&k| rns_should_stop(&history[..k], eps));
        match (first(small), first(large)) {
            (Some(a), Some(b)) => prop_assert!(b <= a),
            (Some(_), None) => prop_assert!(false, "larger epsilon never fired"),
            _ => {}
        }
    }

    #[test]
    fn rre_zero_only_for_identical(t in vec_strategy(12), x in vec_strategy(12)) {
        prop_assume!(norm(&t) > 1e-3);
        prop_assert_eq!(rre(&t, &t).unwrap(), 0.0);
        let e = rre(&x, &t).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!((e == 0.0) == (x == t));
    }

    #[test]
    fn ssim_bounded(t in vec_strategy(100), x in vec_strategy(100)) {
        let grid = ImageGrid::square(10).unwrap();
        let s = ssim(&x, &t, &grid).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s));
        prop_assert!((ssim(&t, &t, &grid).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_has_exact_relative_level(b in vec_strategy(50), level in 0.001f64..0.2, seed in any::<u64>()) {
        prop_assume!(norm(&b) > 1e-3);
        let (noisy, e) = add_noise(&b, level, seed);
        let diff = linalg::sub(&noisy, &b);
        prop_assert!((norm(&diff) - e).abs() <= 1e-12 * e);
        prop_assert!((e - level * norm(&b)).abs() <= 1e-12 * e);
    }

    #[test]
    fn ray_sums_of_ones_are_chord_lengths(theta in 0.0f64..std::f64::consts::PI, offset in -9.0f64..9.0) {
        let grid = ImageGrid::square(12).unwrap();
        let geom = ParallelGeometry::new(vec![theta], 1, 1.0).unwrap();
        let (p0, d) = ray(&geom, 0, 0);
        let p = (p0.0 + offset * -d.1, p0.1 + offset * d.0);
        let mut total = 0.0;
        trace_ray(&grid, p, d, |_, len| total += len);
        let chord = chord_in_box(p, d, -6.0, 6.0, -6.0, 6.0);
        prop_assert!((total - chord).abs() <= 1e-10, "{} vs {}", total, chord);
    }
}
