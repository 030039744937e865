//! Configuration, per-iteration records and results shared by the GMRES and
//! Golub–Kahan solver families.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::ct::ImageGrid;
use crate::metrics;
use crate::operator::LinearOperator;
pub use crate::stopping::StoppingRule;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ab,
    Ba,
    AbHybrid,
    BaHybrid,
    Lsqr,
    Lsmr,
    LsqrHybrid,
    LsmrHybrid,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Ab,
        Method::Ba,
        Method::AbHybrid,
        Method::BaHybrid,
        Method::Lsqr,
        Method::Lsmr,
        Method::LsqrHybrid,
        Method::LsmrHybrid,
    ];

    pub fn is_hybrid(self) -> bool {
        matches!(
            self,
            Method::AbHybrid | Method::BaHybrid | Method::LsqrHybrid | Method::LsmrHybrid
        )
    }

    pub fn is_gmres(self) -> bool {
        matches!(
            self,
            Method::Ab | Method::Ba | Method::AbHybrid | Method::BaHybrid
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Ab => "ab",
            Method::Ba => "ba",
            Method::AbHybrid => "ab-hybrid",
            Method::BaHybrid => "ba-hybrid",
            Method::Lsqr => "lsqr",
            Method::Lsmr => "lsmr",
            Method::LsqrHybrid => "lsqr-hybrid",
            Method::LsmrHybrid => "lsmr-hybrid",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown solver method '{s}'")))
    }
}

/// How `λ` is chosen for the projected problem at every iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaStrategy {
    None,
    Fixed(f64),
    LCurve,
    Gcv,
}

/// Ground truth used to attach RRE (and SSIM, when a grid is known) to records.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub x: Vec<f64>,
    pub grid: Option<ImageGrid>,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    /// Total iteration budget `K` across all restart cycles.
    pub max_iter: usize,
    pub lambda: LambdaStrategy,
    pub stopping: StoppingRule,
    /// Restart period `p`; 0 disables restarting.
    pub restart: usize,
    pub reorthogonalize: bool,
    pub x0: Option<Vec<f64>>,
    pub truth: Option<Arc<GroundTruth>>,
    /// Keep every iterate `x_k` in [`SolveResult::iterates`].
    pub keep_iterates: bool,
    /// Measure basis orthonormality and the Arnoldi/Golub–Kahan relation at the
    /// end of every cycle (costs one extra operator application per step).
    pub verify_factorization: bool,
    /// Monotonic seconds, used only for [`IterationRecord::elapsed`].
    pub clock: Option<fn() -> f64>,
}

impl SolverConfig {
    pub fn new(method: Method, max_iter: usize) -> Self {
        let lambda = if method.is_hybrid() {
            LambdaStrategy::LCurve
        } else {
            LambdaStrategy::None
        };
        Self {
            method,
            max_iter,
            lambda,
            stopping: StoppingRule::None,
            restart: 0,
            reorthogonalize: true,
            x0: None,
            truth: None,
            keep_iterates: false,
            verify_factorization: false,
            clock: None,
        }
    }

    pub fn with_lambda(mut self, lambda: LambdaStrategy) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_stopping(mut self, rule: StoppingRule) -> Self {
        self.stopping = rule;
        self
    }

    pub fn with_restart(mut self, period: usize) -> Self {
        self.restart = period;
        self
    }

    pub fn with_truth(mut self, truth: Arc<GroundTruth>) -> Self {
        self.truth = Some(truth);
        self
    }

    pub fn keeping_iterates(mut self) -> Self {
        self.keep_iterates = true;
        self
    }

    pub fn verifying(mut self) -> Self {
        self.verify_factorization = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig(
                "iteration budget must be positive".into(),
            ));
        }
        match (self.method.is_hybrid(), self.lambda) {
            (true, LambdaStrategy::None) => {
                return Err(Error::InvalidConfig(alloc::format!(
                    "{} needs a lambda strategy (fixed, lcurve or gcv)",
                    self.method
                )))
            }
            (false, l) if l != LambdaStrategy::None => {
                return Err(Error::InvalidConfig(alloc::format!(
                    "{} is unregularized; use its hybrid variant to set lambda",
                    self.method
                )))
            }
            _ => {}
        }
        if let LambdaStrategy::Fixed(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::InvalidConfig(
                    "fixed lambda must be finite and nonnegative".into(),
                ));
            }
        }
        if self.restart > 0 && !self.method.is_gmres() {
            return Err(Error::InvalidConfig(alloc::format!(
                "{} does not support restarting",
                self.method
            )));
        }
        self.stopping.validate()
    }

    pub(crate) fn check_operators(
        &self,
        a: &dyn LinearOperator,
        back: &dyn LinearOperator,
        b: &[f64],
    ) -> Result<()> {
        self.validate()?;
        let (m, n) = a.shape();
        if back.shape() != (n, m) {
            return Err(Error::DimensionMismatch {
                context: "backprojector vs forward",
                left: back.shape(),
                right: (n, m),
            });
        }
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                context: "right-hand side",
                left: (b.len(), 1),
                right: (m, 1),
            });
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "initial guess",
                    left: (x0.len(), 1),
                    right: (n, 1),
                });
            }
        }
        if let Some(t) = &self.truth {
            if t.x.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "ground truth",
                    left: (t.x.len(), 1),
                    right: (n, 1),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn elapsed_since(&self, start: f64) -> f64 {
        self.clock.map_or(0.0, |c| c() - start)
    }

    pub(crate) fn now(&self) -> f64 {
        self.clock.map_or(0.0, |c| c())
    }
}

/// One row of solver history.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Global iteration index, counted across restart cycles (starts at 1).
    pub k: usize,
    pub lambda: f64,
    /// `‖b − A x_k‖₂`
    pub data_residual: f64,
    /// `‖B(b − A x_k)‖₂` for BA-GMRES, `‖Aᵀ(b − A x_k)‖₂` for LSMR, otherwise `None`.
    pub ba_residual: Option<f64>,
    /// Residual of the projected problem, `‖H y − β e₁‖₂`.
    pub proj_residual: f64,
    pub solution_norm: f64,
    pub rre: Option<f64>,
    pub ssim: Option<f64>,
    pub elapsed: f64,
    /// Restart cycle (1-based) the iteration belongs to.
    pub cycle: usize,
    /// Parameter selection failed and `λ` was carried over from the previous iteration.
    pub lambda_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    MaxIter,
    Dp,
    Ncp,
    Rns,
    Breakdown,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::MaxIter => "maxIter",
            StopReason::Dp => "dp",
            StopReason::Ncp => "ncp",
            StopReason::Rns => "rns",
            StopReason::Breakdown => "breakdown",
        }
    }

    pub(crate) fn from_rule(rule: &StoppingRule) -> Self {
        match rule {
            StoppingRule::Dp { .. } => StopReason::Dp,
            StoppingRule::Ncp { .. } => StopReason::Ncp,
            StoppingRule::Rns { .. } => StopReason::Rns,
            StoppingRule::None => StopReason::MaxIter,
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Worst-case basis quality observed over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FactorizationCheck {
    /// `max |WᵀW − I|`
    pub orthonormality: f64,
    /// Relative Frobenius residual of the Krylov relation.
    pub relation: f64,
}

impl FactorizationCheck {
    pub(crate) fn absorb(&mut self, orthonormality: f64, relation: f64) {
        self.orthonormality = self.orthonormality.max(orthonormality);
        self.relation = self.relation.max(relation);
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub records: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    pub cycles: usize,
    /// `x_1, x_2, …` when `keep_iterates` is set.
    pub iterates: Vec<Vec<f64>>,
    pub factorization: Option<FactorizationCheck>,
    pub warnings: Vec<String>,
}

impl SolveResult {
    /// Record with the smallest RRE, if RREs were tracked.
    pub fn min_rre(&self) -> Option<&IterationRecord> {
        self.records
            .iter()
            .filter(|r| r.rre.is_some())
            .min_by(|a, b| {
                a.rre
                    .partial_cmp(&b.rre)
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
    }

    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("records are never empty")
    }
}

/// Builds the quality fields of a record.
pub(crate) fn quality(truth: Option<&GroundTruth>, x: &[f64]) -> (Option<f64>, Option<f64>) {
    let Some(t) = truth else { return (None, None) };
    let rre = metrics::rre(x, &t.x).ok();
    let ssim = t.grid.as_ref().and_then(|g| metrics::ssim(x, &t.x, g).ok());
    (rre, ssim)
}

/// `λ` for the current projected problem, with fallback to the previous value.
pub(crate) fn select_lambda(
    strategy: LambdaStrategy,
    hess: &crate::linalg::Mat,
    beta: f64,
    previous: Option<f64>,
) -> (f64, bool) {
    let picked = match strategy {
        LambdaStrategy::None => return (0.0, false),
        LambdaStrategy::Fixed(l) => return (l, false),
        LambdaStrategy::LCurve => crate::regparam::select_lcurve(hess, beta),
        LambdaStrategy::Gcv => crate::regparam::select_gcv(hess, beta),
    };
    match picked {
        Ok(l) if l > 0.0 && l.is_finite() => (l, false),
        _ => (previous.unwrap_or(0.0), true),
    }
}
