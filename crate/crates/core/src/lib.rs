//! Matrix-free Krylov solvers for linear inverse problems `A x ≈ b` where the
//! backprojector `B` used in place of `Aᵀ` is not its exact adjoint.
//!
//! The crate is `no_std` (it needs `alloc`). The `std` feature only swaps the
//! direct DFT used by the periodogram stopping rule for an FFT.
//!
//! Layout:
//! - [`operator`]: the [`LinearOperator`] abstraction, dense matrices, composition.
//! - [`ct`]: 2-D parallel-beam test problems with matched or unmatched projector pairs.
//! - [`arnoldi`]: Arnoldi factorization and the small projected solves.
//! - [`regparam`]: L-curve and GCV selection of the Tikhonov parameter.
//! - [`stopping`]: discrepancy principle, cumulative periodogram, residual stagnation.
//! - [`gmres`]: (hybrid) AB-GMRES and BA-GMRES with restarting.
//! - [`gk`]: (hybrid) LSQR and LSMR built on Golub–Kahan bidiagonalization.
//! - [`metrics`]: relative error and SSIM.

#![no_std]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod arnoldi;
pub mod ct;
mod error;
pub mod gk;
pub mod gmres;
pub mod linalg;
pub mod metrics;
pub mod operator;
pub mod regparam;
pub mod solver;
pub mod stopping;

pub use error::{Error, Result};
pub use operator::{compose, DenseMatrix, LinearOperator, OperatorHandle};
pub use solver::{
    IterationRecord, LambdaStrategy, Method, SolveResult, SolverConfig, StopReason, StoppingRule,
};
