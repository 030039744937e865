//! Arnoldi process with modified Gram–Schmidt.
//!
//! After `k` steps the state holds an orthonormal basis `W_{k+1}` of the
//! Krylov space and the `(k+1) × k` upper-Hessenberg `H_k` with
//! `M W_k = W_{k+1} H_k`.

mod projected;

use alloc::vec::Vec;

#[cfg(not(any(feature = "std", test)))]
use num_traits::Float;

pub use projected::{
    solve_projected_ls, solve_projected_tikhonov, svd_of_hessenberg, ProjectedSolution,
};

use crate::linalg::{self, Mat};
use crate::operator::LinearOperator;
use crate::{Error, Result};

/// `h_{k+1,k} ≤ BREAKDOWN_TOL · ‖M w_k‖₂` is treated as an invariant subspace.
pub const BREAKDOWN_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Extended,
    /// The Krylov space became invariant at step `k`; `h_{k+1,k}` is stored as 0
    /// and no new basis vector is added.
    Breakdown(usize),
}

#[derive(Debug, Clone)]
pub struct ArnoldiState {
    basis: Vec<Vec<f64>>,
    /// Column `j` holds `h_{0..=j+1, j}`.
    hess: Vec<Vec<f64>>,
    beta: f64,
    broken_down: bool,
}

impl ArnoldiState {
    /// Starts from `r0`, normalizing it into `w_1`.
    pub fn new(r0: &[f64]) -> Result<Self> {
        let beta = linalg::norm2(r0);
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidConfig(
                "Arnoldi start vector must be nonzero and finite".into(),
            ));
        }
        let mut w = r0.to_vec();
        linalg::scale(1.0 / beta, &mut w);
        Ok(Self {
            basis: alloc::vec![w],
            hess: Vec::new(),
            beta,
            broken_down: false,
        })
    }

    /// Completed steps `k`.
    pub fn steps(&self) -> usize {
        self.hess.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.basis[0].len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// The vector the next step multiplies by `M`.
    pub fn last_basis_vector(&self) -> &[f64] {
        self.basis.last().expect("basis is never empty")
    }

    pub fn is_broken_down(&self) -> bool {
        self.broken_down
    }

    /// Dense `(k+1) × k` Hessenberg matrix.
    pub fn hessenberg(&self) -> Mat {
        let k = self.steps();
        let mut h = Mat::zeros(k + 1, k);
        for (j, col) in self.hess.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                h[(i, j)] = v;
            }
        }
        h
    }

    /// Applies `op` to the newest basis vector and extends the factorization.
    pub fn step(&mut self, op: &dyn LinearOperator, reorthogonalize: bool) -> Result<StepOutcome> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "arnoldi step",
                left: op.shape(),
                right: (self.dim(), self.dim()),
            });
        }
        let q = op.apply(self.last_basis_vector());
        self.step_with(q, reorthogonalize)
    }

    /// Extends the factorization given `q = M w_k` computed by the caller.
    pub fn step_with(&mut self, mut q: Vec<f64>, reorthogonalize: bool) -> Result<StepOutcome> {
        if self.broken_down {
            return Err(Error::InvalidConfig(
                "Arnoldi process already broke down".into(),
            ));
        }
        if q.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "arnoldi step vector",
                left: (q.len(), 1),
                right: (self.dim(), 1),
            });
        }
        let mw_norm = linalg::norm2(&q);
        let mut h = alloc::vec![0.0; self.basis.len() + 1];
        let passes = if reorthogonalize { 2 } else { 1 };
        for _ in 0..passes {
            for (i, w) in self.basis.iter().enumerate() {
                let hij = linalg::dot(&q, w);
                linalg::axpy(-hij, w, &mut q);
                h[i] += hij;
            }
        }
        let next = linalg::norm2(&q);
        let k = self.steps() + 1;
        if next <= BREAKDOWN_TOL * mw_norm || next == 0.0 {
            self.hess.push(h);
            self.broken_down = true;
            return Ok(StepOutcome::Breakdown(k));
        }
        *h.last_mut().expect("nonempty") = next;
        self.hess.push(h);
        linalg::scale(1.0 / next, &mut q);
        self.basis.push(q);
        Ok(StepOutcome::Extended)
    }

    /// `max |WᵀW − I|` over the stored basis.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((linalg::dot(a, b) - target).abs());
            }
        }
        worst
    }

    /// `‖M W_k − W_{k+1} H_k‖_F / ‖M W_k‖_F`, re-applying `op` to every basis vector.
    pub fn factorization_defect(&self, op: &dyn LinearOperator) -> f64 {
        let k = self.steps();
        let h = self.hessenberg();
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..k {
            let mw = op.apply(&self.basis[j]);
            let mut diff = mw.clone();
            for (i, w) in self.basis.iter().enumerate().take(j + 2) {
                linalg::axpy(-h[(i, j)], w, &mut diff);
            }
            let (d, m) = (linalg::norm2(&diff), linalg::norm2(&mw));
            num += d * d;
            den += m * m;
        }
        if den == 0.0 {
            return num.sqrt();
        }
        (num / den).sqrt()
    }
}
