//! AB-GMRES and BA-GMRES, plain and hybrid, with optional restarting.
//!
//! AB-GMRES runs Arnoldi on `AB` (data space) from `r₀ = b − A x₀` and forms
//! `x_k = x₀ + B W_k y_k`; BA-GMRES runs Arnoldi on `BA` (image space) from
//! `r₀ = B(b − A x₀)` and forms `x_k = x₀ + W_k y_k`. The hybrid variants
//! replace the projected least-squares problem by its Tikhonov-regularized
//! version with `λ` re-selected at every iteration.
//!
//! The operator products computed while building the basis (`B w_j` and
//! `A B w_j` for AB, `A w_j` and `B A w_j` for BA) are kept, so iterates and
//! both residuals are linear combinations of stored vectors and cost no
//! further operator applications.

use alloc::string::String;
use alloc::vec::Vec;

use crate::arnoldi::{solve_projected_tikhonov, ArnoldiState, StepOutcome};
use crate::linalg::{self, combine};
use crate::operator::{compose, OperatorHandle};
use crate::solver::{
    quality, select_lambda, FactorizationCheck, IterationRecord, Method, SolveResult, SolverConfig,
    StopReason,
};
use crate::stopping::StoppingState;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Variant {
    Ab,
    Ba,
}

/// (Hybrid) AB-GMRES. `cfg.method` must be `Ab` or `AbHybrid`.
pub fn run_ab_gmres(
    a: &OperatorHandle,
    back: &OperatorHandle,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if !matches!(cfg.method, Method::Ab | Method::AbHybrid) {
        return Err(Error::InvalidConfig(alloc::format!(
            "AB-GMRES cannot run method {}",
            cfg.method
        )));
    }
    run(Variant::Ab, a, back, b, cfg)
}

/// (Hybrid) BA-GMRES. `cfg.method` must be `Ba` or `BaHybrid`.
pub fn run_ba_gmres(
    a: &OperatorHandle,
    back: &OperatorHandle,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if !matches!(cfg.method, Method::Ba | Method::BaHybrid) {
        return Err(Error::InvalidConfig(alloc::format!(
            "BA-GMRES cannot run method {}",
            cfg.method
        )));
    }
    run(Variant::Ba, a, back, b, cfg)
}

/// Runs the configured GMRES variant in cycles of at most `period` steps,
/// `budget` steps in total, each cycle restarting from the previous iterate.
pub fn run_with_restarts(
    a: &OperatorHandle,
    back: &OperatorHandle,
    b: &[f64],
    cfg: &SolverConfig,
    period: usize,
    budget: usize,
) -> Result<SolveResult> {
    if period == 0 || budget < period {
        return Err(Error::InvalidConfig(
            "restarting needs 1 <= period <= budget".into(),
        ));
    }
    let mut cfg = cfg.clone();
    cfg.restart = period;
    cfg.max_iter = budget;
    match cfg.method {
        Method::Ab | Method::AbHybrid => run(Variant::Ab, a, back, b, &cfg),
        Method::Ba | Method::BaHybrid => run(Variant::Ba, a, back, b, &cfg),
        m => Err(Error::InvalidConfig(alloc::format!(
            "{m} does not support restarting"
        ))),
    }
}

/// Per-cycle storage of the operator products that define the iterate.
struct Cycle {
    arnoldi: ArnoldiState,
    /// Image-space directions: `B w_j` (AB) or `w_j` (BA).
    directions: Vec<Vec<f64>>,
    /// `A · direction_j`.
    data_images: Vec<Vec<f64>>,
    /// BA only: `B A w_j`.
    ba_images: Vec<Vec<f64>>,
    x_start: Vec<f64>,
    data_residual_start: Vec<f64>,
    ba_residual_start: Vec<f64>,
}

fn run(
    variant: Variant,
    a: &OperatorHandle,
    back: &OperatorHandle,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.check_operators(&**a, &**back, b)?;
    let n = a.cols();
    let m = a.rows();
    let period = if cfg.restart == 0 {
        cfg.max_iter
    } else {
        cfg.restart
    };
    let composite = if cfg.verify_factorization {
        Some(match variant {
            Variant::Ab => compose(a, back)?,
            Variant::Ba => compose(back, a)?,
        })
    } else {
        None
    };

    let t0 = cfg.now();
    let truth = cfg.truth.as_deref();
    let mut stopping = StoppingState::new(cfg.stopping)?;
    let mut x = cfg.x0.clone().unwrap_or_else(|| alloc::vec![0.0; n]);
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut iterates = Vec::new();
    let mut check = cfg.verify_factorization.then(FactorizationCheck::default);
    let mut warnings: Vec<String> = Vec::new();
    let mut prev_lambda: Option<f64> = None;
    let mut cycles = 0;
    let mut k_global = 0;
    let mut stop_reason = StopReason::MaxIter;

    'cycles: while k_global < cfg.max_iter {
        cycles += 1;
        let ax = a.apply(&x);
        let r_data = linalg::sub(b, &ax);
        let (r0, r_ba) = match variant {
            Variant::Ab => (r_data.clone(), Vec::new()),
            Variant::Ba => {
                let rb = back.apply(&r_data);
                (rb.clone(), rb)
            }
        };
        let beta = linalg::norm2(&r0);
        if beta == 0.0 {
            // x already solves the (composite) system exactly.
            if records.is_empty() {
                let (rre, ssim) = quality(truth, &x);
                records.push(IterationRecord {
                    k: 0,
                    lambda: 0.0,
                    data_residual: linalg::norm2(&r_data),
                    ba_residual: (variant == Variant::Ba).then_some(0.0),
                    proj_residual: 0.0,
                    solution_norm: linalg::norm2(&x),
                    rre,
                    ssim,
                    elapsed: cfg.elapsed_since(t0),
                    cycle: cycles,
                    lambda_fallback: false,
                });
            }
            stop_reason = StopReason::Breakdown;
            break;
        }

        let mut cyc = Cycle {
            arnoldi: ArnoldiState::new(&r0)?,
            directions: Vec::new(),
            data_images: Vec::new(),
            ba_images: Vec::new(),
            x_start: x.clone(),
            data_residual_start: r_data,
            ba_residual_start: r_ba,
        };

        let steps = period.min(cfg.max_iter - k_global);
        let mut finished: Option<StopReason> = None;
        for _ in 0..steps {
            let w = cyc.arnoldi.last_basis_vector().to_vec();
            let q = match variant {
                Variant::Ab => {
                    let z = back.apply(&w);
                    let az = a.apply(&z);
                    cyc.directions.push(z);
                    cyc.data_images.push(az.clone());
                    az
                }
                Variant::Ba => {
                    let aw = a.apply(&w);
                    let baw = back.apply(&aw);
                    cyc.directions.push(w);
                    cyc.data_images.push(aw);
                    cyc.ba_images.push(baw.clone());
                    baw
                }
            };
            let outcome = cyc.arnoldi.step_with(q, cfg.reorthogonalize)?;
            k_global += 1;

            let hess = cyc.arnoldi.hessenberg();
            let (lambda, fallback) = select_lambda(cfg.lambda, &hess, beta, prev_lambda);
            if fallback {
                warnings.push(alloc::format!(
                    "iteration {k_global}: lambda selection failed, reused {lambda}"
                ));
            }
            prev_lambda = Some(lambda);
            let sol = solve_projected_tikhonov(&hess, beta, lambda)?;
            let y = &sol.y;

            let mut xk = combine(&cyc.directions, y, n);
            linalg::axpy(1.0, &cyc.x_start, &mut xk);
            let mut rk = cyc.data_residual_start.clone();
            linalg::axpy(-1.0, &combine(&cyc.data_images, y, m), &mut rk);
            let ba_residual = match variant {
                Variant::Ab => None,
                Variant::Ba => {
                    let mut rb = cyc.ba_residual_start.clone();
                    linalg::axpy(-1.0, &combine(&cyc.ba_images, y, n), &mut rb);
                    Some(linalg::norm2(&rb))
                }
            };
            let data_residual = linalg::norm2(&rk);
            let (rre, ssim) = quality(truth, &xk);
            records.push(IterationRecord {
                k: k_global,
                lambda,
                data_residual,
                ba_residual,
                proj_residual: sol.proj_residual_norm,
                solution_norm: linalg::norm2(&xk),
                rre,
                ssim,
                elapsed: cfg.elapsed_since(t0),
                cycle: cycles,
                lambda_fallback: fallback,
            });
            if cfg.keep_iterates {
                iterates.push(xk.clone());
            }
            x = xk;

            let residual_vec = cfg
                .stopping
                .needs_residual_vector()
                .then_some(rk.as_slice());
            if stopping.update(data_residual, residual_vec)? {
                finished = Some(StopReason::from_rule(&cfg.stopping));
            } else if let StepOutcome::Breakdown(_) = outcome {
                finished = Some(StopReason::Breakdown);
            }
            if finished.is_some() {
                break;
            }
        }

        if let (Some(chk), Some(op)) = (check.as_mut(), composite.as_ref()) {
            chk.absorb(
                cyc.arnoldi.orthonormality_defect(),
                cyc.arnoldi.factorization_defect(&**op),
            );
        }
        if let Some(reason) = finished {
            stop_reason = reason;
            break 'cycles;
        }
    }

    Ok(SolveResult {
        x,
        records,
        stop_reason,
        cycles,
        iterates,
        factorization: check,
        warnings,
    })
}

/// Dispatches on `cfg.method` for the GMRES family.
pub fn run_gmres(
    a: &OperatorHandle,
    back: &OperatorHandle,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    match cfg.method {
        Method::Ab | Method::AbHybrid => run(Variant::Ab, a, back, b, cfg),
        Method::Ba | Method::BaHybrid => run(Variant::Ba, a, back, b, cfg),
        m => Err(Error::InvalidConfig(alloc::format!(
            "{m} is not a GMRES method"
        ))),
    }
}
