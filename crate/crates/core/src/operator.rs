//! Matrix-free linear operators.
//!
//! Solvers only ever see an [`OperatorHandle`]: a shared, immutable operator
//! with fixed input/output dimensions. Composition checks dimensions eagerly so
//! a mis-wired `A`/`B` pair fails at configuration time rather than mid-solve.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, Mat};
use crate::{Error, Result};

/// A real linear map `ℝ^cols → ℝ^rows`.
///
/// `apply` must be pure: the same input gives bitwise-identical output, and
/// concurrent calls from several threads are allowed.
pub trait LinearOperator: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Panics if `x.len() != self.cols()`.
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }
}

pub type OperatorHandle = Arc<dyn LinearOperator>;

impl fmt::Debug for dyn LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearOperator({}x{})", self.rows(), self.cols())
    }
}

/// Dense row-major matrix operator. Entries must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    mat: Mat,
}

impl DenseMatrix {
    pub fn new(mat: Mat) -> Result<Self> {
        if mat.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "dense matrix holds non-finite entries".into(),
            ));
        }
        Ok(Self { mat })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(Mat::from_rows(rows))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: Mat::identity(n),
        }
    }

    /// Gaussian entries from a seeded generator.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Self {
            mat: Mat::from_row_major(rows, cols, data),
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.mat
    }

    pub fn into_handle(self) -> OperatorHandle {
        Arc::new(self)
    }
}

impl LinearOperator for DenseMatrix {
    fn rows(&self) -> usize {
        self.mat.rows()
    }
    fn cols(&self) -> usize {
        self.mat.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.mat.matvec(x)
    }
}

/// Exact transpose of a dense matrix.
#[derive(Debug, Clone)]
pub struct Transposed {
    inner: Arc<DenseMatrix>,
}

impl LinearOperator for Transposed {
    fn rows(&self) -> usize {
        self.inner.cols()
    }
    fn cols(&self) -> usize {
        self.inner.rows()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.inner.mat.matvec_t(x)
    }
}

/// The matched backprojector of a dense matrix.
pub fn transpose_of(op: &Arc<DenseMatrix>) -> OperatorHandle {
    Arc::new(Transposed {
        inner: Arc::clone(op),
    })
}

/// `first ∘ second`, i.e. `v ↦ first(second(v))`.
#[derive(Clone)]
pub struct Composite {
    first: OperatorHandle,
    second: OperatorHandle,
}

impl LinearOperator for Composite {
    fn rows(&self) -> usize {
        self.first.rows()
    }
    fn cols(&self) -> usize {
        self.second.cols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.first.apply(&self.second.apply(x))
    }
}

/// Builds `first · second` (apply `second`, then `first`).
pub fn compose(first: &OperatorHandle, second: &OperatorHandle) -> Result<OperatorHandle> {
    if first.cols() != second.rows() {
        return Err(Error::DimensionMismatch {
            context: "compose",
            left: first.shape(),
            right: second.shape(),
        });
    }
    Ok(Arc::new(Composite {
        first: Arc::clone(first),
        second: Arc::clone(second),
    }))
}

/// Materializes an operator column by column (`cols` applications).
pub fn assemble(op: &dyn LinearOperator) -> Mat {
    let (m, n) = op.shape();
    let mut out = Mat::zeros(m, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = op.apply(&e);
        e[j] = 0.0;
        for (i, v) in col.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

/// Power-iteration estimate of the dominant singular value of a square operator.
///
/// Returns `‖op v‖₂` for the last normalized iterate `v`; a seeded Gaussian start
/// makes the estimate deterministic.
pub fn op_norm_estimate(op: &dyn LinearOperator, iterations: usize, seed: u64) -> Result<f64> {
    if op.rows() != op.cols() {
        return Err(Error::DimensionMismatch {
            context: "op_norm_estimate (square operator required)",
            left: op.shape(),
            right: op.shape(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..op.cols())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let nv = linalg::norm2(&v);
    if nv == 0.0 {
        return Ok(0.0);
    }
    linalg::scale(1.0 / nv, &mut v);
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let w = op.apply(&v);
        let nw = linalg::norm2(&w);
        estimate = nw;
        if nw == 0.0 {
            return Ok(0.0);
        }
        v = w;
        linalg::scale(1.0 / nw, &mut v);
    }
    Ok(estimate.abs())
}
