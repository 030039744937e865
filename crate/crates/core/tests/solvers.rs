mod common;

use std::sync::Arc;

use abba_core::ct::{build_test_problem, TestProblem};
use abba_core::gk::{run_gk, run_lsmr, run_lsqr};
use abba_core::gmres::{run_ab_gmres, run_ba_gmres, run_gmres, run_with_restarts};
use abba_core::linalg::Mat;
use abba_core::operator::transpose_of;
use abba_core::stopping::DEFAULT_DP_TAU;
use abba_core::{
    DenseMatrix, LambdaStrategy, Method, OperatorHandle, SolveResult, SolverConfig, StopReason,
    StoppingRule,
};
use common::*;

struct Dense {
    m: Mat,
    a: OperatorHandle,
    at: OperatorHandle,
    b: Vec<f64>,
}

fn dense_problem(seed: u64, rows: usize, cols: usize) -> Dense {
    let mut r = rng(seed);
    let m = random_mat(&mut r, rows, cols);
    let a = Arc::new(DenseMatrix::new(m.clone()).unwrap());
    let at = transpose_of(&a);
    let b = random_vec(&mut r, rows);
    Dense { m, a, at, b }
}

fn iterates(res: &SolveResult) -> &[Vec<f64>] {
    &res.iterates
}

fn assert_iterates_match(x: &SolveResult, y: &SolveResult, steps: usize, tol: f64) {
    assert!(x.iterates.len() >= steps && y.iterates.len() >= steps);
    for k in 0..steps {
        let e = rel_err(&iterates(x)[k], &iterates(y)[k]);
        assert!(e < tol, "k={} rel err {e:e}", k + 1);
    }
}

#[test]
fn identity_systems_converge_in_one_step() {
    let i4 = DenseMatrix::identity(4).into_handle();
    let b = [0.3, -1.0, 2.0, 0.0];
    for method in [Method::Ab, Method::Ba, Method::Lsqr, Method::Lsmr] {
        let cfg = SolverConfig::new(method, 10);
        let res = if method.is_gmres() {
            run_gmres(&i4, &i4, &b, &cfg)
        } else {
            run_gk(&i4, &i4, &b, &cfg)
        }
        .unwrap();
        assert_eq!(res.records.len(), 1, "{method}");
        assert!(rel_err(&res.x, &b) < 1e-15, "{method}");
        assert!(res.final_record().data_residual < 1e-15);
    }
}

#[test]
fn ab_gmres_matches_lsqr() {
    let p = dense_problem(51, 10, 10);
    let ab = run_ab_gmres(
        &p.a,
        &p.at,
        &p.b,
        &SolverConfig::new(Method::Ab, 8).keeping_iterates(),
    )
    .unwrap();
    let lsqr = run_lsqr(
        &p.a,
        &p.at,
        &p.b,
        &SolverConfig::new(Method::Lsqr, 8).keeping_iterates(),
    )
    .unwrap();
    assert_iterates_match(&ab, &lsqr, 8, 1e-8);
}

#[test]
fn ba_gmres_matches_lsmr() {
    let p = dense_problem(52, 12, 9);
    let ba = run_ba_gmres(
        &p.a,
        &p.at,
        &p.b,
        &SolverConfig::new(Method::Ba, 8).keeping_iterates(),
    )
    .unwrap();
    let lsmr = run_lsmr(
        &p.a,
        &p.at,
        &p.b,
        &SolverConfig::new(Method::Lsmr, 8).keeping_iterates(),
    )
    .unwrap();
    assert_iterates_match(&ba, &lsmr, 8, 1e-8);
}

#[test]
fn hybrid_ba_gmres_matches_hybrid_lsmr() {
    let p = dense_problem(53, 12, 9);
    let fixed = LambdaStrategy::Fixed(0.1);
    let ba = SolverConfig::new(Method::BaHybrid, 8)
        .with_lambda(fixed)
        .keeping_iterates();
    let lsmr = SolverConfig::new(Method::LsmrHybrid, 8)
        .with_lambda(fixed)
        .keeping_iterates();
    let ba = run_ba_gmres(&p.a, &p.at, &p.b, &ba).unwrap();
    let lsmr = run_lsmr(&p.a, &p.at, &p.b, &lsmr).unwrap();
    assert_iterates_match(&ba, &lsmr, 8, 1e-8);
    assert!(ba.records.iter().all(|r| r.lambda == 0.1));
}

#[test]
fn hybrid_ab_gmres_and_hybrid_lsqr_differ() {
    let p = dense_problem(54, 12, 9);
    let fixed = LambdaStrategy::Fixed(0.1);
    let ab = SolverConfig::new(Method::AbHybrid, 3)
        .with_lambda(fixed)
        .keeping_iterates();
    let lsqr = SolverConfig::new(Method::LsqrHybrid, 3)
        .with_lambda(fixed)
        .keeping_iterates();
    let ab = run_ab_gmres(&p.a, &p.at, &p.b, &ab).unwrap();
    let lsqr = run_lsqr(&p.a, &p.at, &p.b, &lsqr).unwrap();
    assert!(rel_err(&ab.iterates[2], &lsqr.iterates[2]) > 1e-4);
}

#[test]
fn hybrid_ab_full_run_matches_closed_form() {
    let p = dense_problem(55, 9, 12);
    let lambda = 0.2;
    let cfg = SolverConfig::new(Method::AbHybrid, 9).with_lambda(LambdaStrategy::Fixed(lambda));
    let res = run_ab_gmres(&p.a, &p.at, &p.b, &cfg).unwrap();
    let ab = p.m.matmul(&p.m.transpose());
    let z = tikhonov_normal_equations(&ab, &p.b, lambda);
    let oracle = p.m.matvec_t(&z);
    assert!(
        rel_err(&res.x, &oracle) < 1e-8,
        "{:e}",
        rel_err(&res.x, &oracle)
    );
}

#[test]
fn hybrid_ba_full_run_matches_closed_form() {
    let p = dense_problem(56, 12, 9);
    let lambda = 0.2;
    let cfg = SolverConfig::new(Method::BaHybrid, 9).with_lambda(LambdaStrategy::Fixed(lambda));
    let res = run_ba_gmres(&p.a, &p.at, &p.b, &cfg).unwrap();
    let ba = p.m.transpose().matmul(&p.m);
    let oracle = tikhonov_normal_equations(&ba, &p.m.matvec_t(&p.b), lambda);
    assert!(
        rel_err(&res.x, &oracle) < 1e-8,
        "{:e}",
        rel_err(&res.x, &oracle)
    );
}

#[test]
fn full_lsqr_matches_least_squares_solution() {
    let p = dense_problem(57, 12, 9);
    let res = run_lsqr(&p.a, &p.at, &p.b, &SolverConfig::new(Method::Lsqr, 9)).unwrap();
    let oracle = tikhonov_normal_equations(&p.m, &p.b, 0.0);
    assert!(rel_err(&res.x, &oracle) < 1e-8);
}

#[test]
fn plain_residuals_are_monotone() {
    let p = dense_problem(58, 14, 11);
    let ab = run_ab_gmres(&p.a, &p.at, &p.b, &SolverConfig::new(Method::Ab, 11)).unwrap();
    let lsqr = run_lsqr(&p.a, &p.at, &p.b, &SolverConfig::new(Method::Lsqr, 11)).unwrap();
    for res in [&ab, &lsqr] {
        for w in res.records.windows(2) {
            assert!(w[1].data_residual <= w[0].data_residual * (1.0 + 1e-12));
        }
    }
    let ba = run_ba_gmres(&p.a, &p.at, &p.b, &SolverConfig::new(Method::Ba, 11)).unwrap();
    let lsmr = run_lsmr(
        &p.a,
        &p.at,
        &p.b,
        &SolverConfig::new(Method::Lsmr, 11).keeping_iterates(),
    )
    .unwrap();
    for res in [&ba, &lsmr] {
        for w in res.records.windows(2) {
            assert!(w[1].ba_residual.unwrap() <= w[0].ba_residual.unwrap() * (1.0 + 1e-10));
        }
    }
    // Directly recomputed normal-equations residuals of the LSMR iterates.
    let normal: Vec<f64> = lsmr
        .iterates
        .iter()
        .map(|x| {
            let mut r = p.b.clone();
            for (ri, ax) in r.iter_mut().zip(p.m.matvec(x)) {
                *ri -= ax;
            }
            norm(&p.m.matvec_t(&r))
        })
        .collect();
    for (rec, direct) in lsmr.records.iter().zip(&normal) {
        assert!((rec.ba_residual.unwrap() - direct).abs() <= 1e-10 * direct.max(1e-300) + 1e-12);
    }
}

#[test]
fn hybrid_lsmr_with_zero_lambda_is_lsmr() {
    let p = dense_problem(59, 12, 9);
    let plain = run_lsmr(
        &p.a,
        &p.at,
        &p.b,
        &SolverConfig::new(Method::Lsmr, 7).keeping_iterates(),
    )
    .unwrap();
    let hybrid = SolverConfig::new(Method::LsmrHybrid, 7)
        .with_lambda(LambdaStrategy::Fixed(0.0))
        .keeping_iterates();
    let hybrid = run_lsmr(&p.a, &p.at, &p.b, &hybrid).unwrap();
    assert_iterates_match(&plain, &hybrid, 7, 1e-12);
}

#[test]
fn factorization_stays_tight() {
    let p = dense_problem(60, 20, 15);
    for method in [Method::Ab, Method::Ba, Method::Lsqr, Method::Lsmr] {
        let cfg = SolverConfig::new(method, 12).verifying();
        let res = if method.is_gmres() {
            run_gmres(&p.a, &p.at, &p.b, &cfg)
        } else {
            run_gk(&p.a, &p.at, &p.b, &cfg)
        }
        .unwrap();
        let chk = res.factorization.unwrap();
        assert!(
            chk.orthonormality < 1e-10 && chk.relation < 1e-10,
            "{method}: {chk:?}"
        );
    }
}

#[test]
fn wrong_family_is_rejected() {
    let p = dense_problem(61, 5, 5);
    assert!(run_ab_gmres(&p.a, &p.at, &p.b, &SolverConfig::new(Method::Ba, 3)).is_err());
    assert!(run_ba_gmres(&p.a, &p.at, &p.b, &SolverConfig::new(Method::Lsmr, 3)).is_err());
    assert!(run_gmres(&p.a, &p.at, &p.b, &SolverConfig::new(Method::Lsqr, 3)).is_err());
    assert!(run_gk(&p.a, &p.at, &p.b, &SolverConfig::new(Method::Ab, 3)).is_err());
    assert!(run_gmres(&p.a, &p.at, &[1.0; 4], &SolverConfig::new(Method::Ab, 3)).is_err());
}

#[test]
fn restart_with_full_period_is_a_single_cycle() {
    let p = dense_problem(62, 10, 10);
    let cfg = SolverConfig::new(Method::Ab, 6);
    let plain = run_ab_gmres(&p.a, &p.at, &p.b, &cfg).unwrap();
    let restarted = run_with_restarts(&p.a, &p.at, &p.b, &cfg, 6, 6).unwrap();
    assert_eq!(restarted.cycles, 1);
    assert_eq!(plain.x, restarted.x);
    for (a, b) in plain.records.iter().zip(&restarted.records) {
        assert_eq!(
            (a.k, a.data_residual, a.proj_residual),
            (b.k, b.data_residual, b.proj_residual)
        );
    }
}

#[test]
fn tp2_restart_cycles_never_increase_residual() {
    let p = build_test_problem(TestProblem::Tp2, false, 42).unwrap();
    let cfg = SolverConfig::new(Method::AbHybrid, 30);
    let res = run_with_restarts(&p.forward, &p.back, &p.b_noisy, &cfg, 10, 30).unwrap();
    assert_eq!(res.cycles, 3);
    assert!(res.records.windows(2).all(|w| w[1].k == w[0].k + 1));
    let start = |c: usize| {
        if c == 0 {
            abba_core::linalg::norm2(&p.b_noisy)
        } else {
            res.records[c * 10 - 1].data_residual
        }
    };
    for c in 0..3 {
        let end = res.records[c * 10 + 9].data_residual;
        assert!(end <= start(c) + 1e-12, "cycle {c}: {end} > {}", start(c));
    }
}

#[test]
fn tp2_discrepancy_principle_stops_at_first_crossing() {
    let p = build_test_problem(TestProblem::Tp2, false, 42).unwrap();
    let rule = StoppingRule::Dp {
        tau: DEFAULT_DP_TAU,
        noise_norm: p.noise_norm,
    };
    let cfg = SolverConfig::new(Method::BaHybrid, 60).with_stopping(rule);
    let res = run_ba_gmres(&p.forward, &p.back, &p.b_noisy, &cfg).unwrap();
    let bound = DEFAULT_DP_TAU * p.noise_norm;
    let (last, before) = res.records.split_last().unwrap();
    if res.stop_reason == StopReason::Dp {
        assert!(last.data_residual <= bound);
    } else {
        assert_eq!(res.stop_reason, StopReason::MaxIter);
        assert_eq!(res.records.len(), 60);
        assert!(last.data_residual > bound);
    }
    assert!(before.iter().all(|r| r.data_residual > bound));
}

#[test]
fn hybrid_records_carry_selected_lambda() {
    let p = build_test_problem(TestProblem::Tp2, false, 42).unwrap();
    for lambda in [LambdaStrategy::LCurve, LambdaStrategy::Gcv] {
        let cfg = SolverConfig::new(Method::BaHybrid, 15).with_lambda(lambda);
        let res = run_ba_gmres(&p.forward, &p.back, &p.b_noisy, &cfg).unwrap();
        assert!(res
            .records
            .iter()
            .all(|r| r.lambda.is_finite() && r.lambda >= 0.0));
        assert!(res.records.iter().skip(1).all(|r| r.lambda > 0.0));
        assert!(res.records.iter().all(|r| r.ba_residual.is_some()));
    }
}
