//! LSQR and LSMR (plain and hybrid) on an explicit Golub–Kahan
//! bidiagonalization with stored, fully reorthogonalized bases.
//!
//! With `A V_k = U_{k+1} B_k` and `Aᵀ U_{k+1} = V_{k+1} T_{k+1}` (`B_k` lower
//! bidiagonal, `T_{k+1}` upper bidiagonal), every iterate is `x₀ + V_k y`:
//! - LSQR: `y = argmin ‖B_k y − β₁e₁‖² + λ²‖y‖²`
//! - LSMR: `y = argmin ‖T_{k+1}B_k y − α₁β₁e₁‖² + λ²‖y‖²`, i.e. the
//!   normal-equations residual `‖Aᵀ(b − A x)‖`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::arnoldi::solve_projected_tikhonov;
use crate::linalg::{self, combine, Mat};
use crate::operator::{LinearOperator, OperatorHandle};
use crate::solver::{
    quality, select_lambda, FactorizationCheck, IterationRecord, Method, SolveResult, SolverConfig,
    StopReason,
};
use crate::stopping::StoppingState;
use crate::{Error, Result};
#[cfg(not(any(feature = "std", test)))]
use num_traits::Float;

/// Relative size below which a new `α` or `β` ends the bidiagonalization.
const GK_BREAKDOWN_TOL: f64 = 1e-14;

/// Golub–Kahan state after `k` steps.
#[derive(Debug, Clone)]
pub struct BidiagState {
    /// `u_1 … u_{k+1}` (data space).
    pub u: Vec<Vec<f64>>,
    /// `v_1 … v_{k+1}` (image space); `v_{k+1}` is absent after an `α` breakdown.
    pub v: Vec<Vec<f64>>,
    /// `α_1 … α_{k+1}`
    pub alphas: Vec<f64>,
    /// `β_1 … β_{k+1}`; `β_1 = ‖b − A x₀‖₂`.
    pub betas: Vec<f64>,
    /// `A v_j`, kept to form data residuals.
    av: Vec<Vec<f64>>,
}

impl BidiagState {
    pub fn steps(&self) -> usize {
        self.av.len()
    }

    /// `B_k`, `(k+1) × k` lower bidiagonal.
    pub fn lower_bidiagonal(&self) -> Mat {
        let k = self.steps();
        let mut bk = Mat::zeros(k + 1, k);
        for j in 0..k {
            bk[(j, j)] = self.alphas[j];
            bk[(j + 1, j)] = self.betas[j + 1];
        }
        bk
    }

    /// `T_{k+1}`, `(k+1) × (k+1)` upper bidiagonal with `Aᵀ U_{k+1} = V_{k+1} T_{k+1}`.
    pub fn upper_bidiagonal(&self) -> Mat {
        let k = self.steps();
        let mut t = Mat::zeros(k + 1, k + 1);
        for i in 0..=k {
            t[(i, i)] = self.alphas.get(i).copied().unwrap_or(0.0);
            if i < k {
                t[(i, i + 1)] = self.betas[i + 1];
            }
        }
        t
    }

    fn orthonormality_defect(&self) -> f64 {
        let defect = |vs: &[Vec<f64>]| {
            let mut worst = 0.0f64;
            for (i, a) in vs.iter().enumerate() {
                for (j, b) in vs.iter().enumerate().skip(i) {
                    let t = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((linalg::dot(a, b) - t).abs());
                }
            }
            worst
        };
        defect(&self.u).max(defect(&self.v))
    }

    /// `‖A V_k − U_{k+1} B_k‖_F / ‖A V_k‖_F`, re-applying `A`.
    fn relation_defect(&self, a: &dyn LinearOperator) -> f64 {
        let bk = self.lower_bidiagonal();
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..self.steps() {
            let av = a.apply(&self.v[j]);
            let mut d = av.clone();
            linalg::axpy(-bk[(j, j)], &self.u[j], &mut d);
            if let Some(u) = self.u.get(j + 1) {
                linalg::axpy(-bk[(j + 1, j)], u, &mut d);
            }
            let (dn, an) = (linalg::norm2(&d), linalg::norm2(&av));
            num += dn * dn;
            den += an * an;
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }
}

fn orthogonalize(q: &mut [f64], basis: &[Vec<f64>], passes: usize) {
    for _ in 0..passes {
        for w in basis {
            let h = linalg::dot(q, w);
            linalg::axpy(-h, w, q);
        }
    }
}

/// (Hybrid) LSQR. `at` plays the role of `Aᵀ`.
pub fn run_lsqr(
    a: &OperatorHandle,
    at: &OperatorHandle,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if !matches!(cfg.method, Method::Lsqr | Method::LsqrHybrid) {
        return Err(Error::InvalidConfig(alloc::format!(
            "LSQR cannot run method {}",
            cfg.method
        )));
    }
    run(false, a, at, b, cfg)
}

/// (Hybrid) LSMR. `at` plays the role of `Aᵀ`.
pub fn run_lsmr(
    a: &OperatorHandle,
    at: &OperatorHandle,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if !matches!(cfg.method, Method::Lsmr | Method::LsmrHybrid) {
        return Err(Error::InvalidConfig(alloc::format!(
            "LSMR cannot run method {}",
            cfg.method
        )));
    }
    run(true, a, at, b, cfg)
}

fn run(
    lsmr: bool,
    a: &OperatorHandle,
    at: &OperatorHandle,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.check_operators(&**a, &**at, b)?;
    let (m, n) = a.shape();
    let passes = if cfg.reorthogonalize { 2 } else { 1 };
    let t0 = cfg.now();
    let truth = cfg.truth.as_deref();
    let x0 = cfg.x0.clone().unwrap_or_else(|| alloc::vec![0.0; n]);
    let r0 = linalg::sub(b, &a.apply(&x0));
    let beta1 = linalg::norm2(&r0);

    let mut warnings: Vec<String> = Vec::new();
    let mut records = Vec::new();
    let mut u1 = r0.clone();
    let mut v1 = alloc::vec![0.0; n];
    if beta1 > 0.0 {
        linalg::scale(1.0 / beta1, &mut u1);
        v1 = at.apply(&u1);
    }
    let alpha1 = linalg::norm2(&v1);
    if beta1 == 0.0 || alpha1 == 0.0 {
        // x₀ already minimizes the residual over every Krylov space.
        let (rre, ssim) = quality(truth, &x0);
        records.push(IterationRecord {
            k: 0,
            lambda: 0.0,
            data_residual: beta1,
            ba_residual: lsmr.then_some(0.0),
            proj_residual: beta1,
            solution_norm: linalg::norm2(&x0),
            rre,
            ssim,
            elapsed: cfg.elapsed_since(t0),
            cycle: 1,
            lambda_fallback: false,
        });
        return Ok(SolveResult {
            x: x0,
            records,
            stop_reason: StopReason::Breakdown,
            cycles: 1,
            iterates: Vec::new(),
            factorization: cfg.verify_factorization.then(FactorizationCheck::default),
            warnings,
        });
    }
    let mut st = BidiagState {
        u: alloc::vec![u1],
        v: Vec::new(),
        alphas: alloc::vec![alpha1],
        betas: alloc::vec![beta1],
        av: Vec::new(),
    };
    linalg::scale(1.0 / alpha1, &mut v1);
    st.v.push(v1);

    let mut stopping = StoppingState::new(cfg.stopping)?;
    let mut iterates = Vec::new();
    let mut prev_lambda = None;
    let mut x = x0.clone();
    let mut stop_reason = StopReason::MaxIter;

    for k in 1..=cfg.max_iter {
        // Extend: β_{k+1} u_{k+1} = A v_k − α_k u_k, then α_{k+1} v_{k+1} = Aᵀ u_{k+1} − β_{k+1} v_k.
        let vk = st.v[k - 1].clone();
        let av = a.apply(&vk);
        let mut p = av.clone();
        linalg::axpy(-st.alphas[k - 1], &st.u[k - 1], &mut p);
        orthogonalize(&mut p, &st.u, passes);
        let beta_next = linalg::norm2(&p);
        st.av.push(av);
        let av_norm = linalg::norm2(st.av.last().expect("just pushed"));
        let mut broke = false;
        if beta_next <= GK_BREAKDOWN_TOL * av_norm || beta_next == 0.0 {
            st.betas.push(0.0);
            broke = true;
        } else {
            st.betas.push(beta_next);
            linalg::scale(1.0 / beta_next, &mut p);
            st.u.push(p);
            let mut q = at.apply(st.u.last().expect("just pushed"));
            let atu_norm = linalg::norm2(&q);
            linalg::axpy(-beta_next, &vk, &mut q);
            orthogonalize(&mut q, &st.v, passes);
            let alpha_next = linalg::norm2(&q);
            if alpha_next <= GK_BREAKDOWN_TOL * atu_norm || alpha_next == 0.0 {
                st.alphas.push(0.0);
                broke = true;
            } else {
                st.alphas.push(alpha_next);
                linalg::scale(1.0 / alpha_next, &mut q);
                st.v.push(q);
            }
        }

        let bk = st.lower_bidiagonal();
        let (proj, rhs_norm) = if lsmr {
            (st.upper_bidiagonal().matmul(&bk), alpha1 * beta1)
        } else {
            (bk, beta1)
        };
        let (lambda, fallback) = select_lambda(cfg.lambda, &proj, rhs_norm, prev_lambda);
        if fallback {
            warnings.push(alloc::format!(
                "iteration {k}: lambda selection failed, reused {lambda}"
            ));
        }
        prev_lambda = Some(lambda);
        let sol = solve_projected_tikhonov(&proj, rhs_norm, lambda)?;

        let mut xk = combine(&st.v[..k], &sol.y, n);
        linalg::axpy(1.0, &x0, &mut xk);
        let mut rk = r0.clone();
        linalg::axpy(-1.0, &combine(&st.av, &sol.y, m), &mut rk);
        let data_residual = linalg::norm2(&rk);
        let (rre, ssim) = quality(truth, &xk);
        records.push(IterationRecord {
            k,
            lambda,
            data_residual,
            ba_residual: lsmr.then_some(sol.proj_residual_norm),
            proj_residual: sol.proj_residual_norm,
            solution_norm: linalg::norm2(&xk),
            rre,
            ssim,
            elapsed: cfg.elapsed_since(t0),
            cycle: 1,
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
            stop_reason = StopReason::from_rule(&cfg.stopping);
            break;
        }
        if broke {
            stop_reason = StopReason::Breakdown;
            break;
        }
    }

    let factorization = cfg.verify_factorization.then(|| {
        let mut chk = FactorizationCheck::default();
        chk.absorb(st.orthonormality_defect(), st.relation_defect(&**a));
        chk
    });
    Ok(SolveResult {
        x,
        records,
        stop_reason,
        cycles: 1,
        iterates,
        factorization,
        warnings,
    })
}

/// Dispatches on `cfg.method` for the Golub–Kahan family.
pub fn run_gk(
    a: &OperatorHandle,
    at: &OperatorHandle,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    match cfg.method {
        Method::Lsqr | Method::LsqrHybrid => run(false, a, at, b, cfg),
        Method::Lsmr | Method::LsmrHybrid => run(true, a, at, b, cfg),
        m => Err(Error::InvalidConfig(alloc::format!(
            "{m} is not a Golub-Kahan method"
        ))),
    }
}
