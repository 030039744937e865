//! Turning a resolved problem description into operators and data.

use std::sync::Arc;

use abba_core::ct::{add_noise, CtProblem, ImageGrid};
use abba_core::linalg::Mat;
use abba_core::operator::transpose_of;
use abba_core::{DenseMatrix, LinearOperator, OperatorHandle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ProblemKind;

/// Everything a solver run needs.
#[derive(Debug, Clone)]
pub struct Problem {
    pub forward: OperatorHandle,
    pub back: OperatorHandle,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
    /// Present for image problems; enables SSIM and PGM export.
    pub grid: Option<ImageGrid>,
    pub noise_norm: f64,
    pub matched: bool,
}

impl Problem {
    pub fn build(kind: &ProblemKind, matched: bool, seed: u64) -> abba_core::Result<Self> {
        match kind {
            ProblemKind::Ct { setup, .. } => {
                let p = CtProblem::build(setup, matched, seed)?;
                Ok(Self {
                    forward: p.forward,
                    back: p.back,
                    b: p.b_noisy,
                    x_true: p.x_true,
                    grid: Some(p.grid),
                    noise_norm: p.noise_norm,
                    matched,
                })
            }
            ProblemKind::Dense {
                rows,
                cols,
                noise_level,
            } => Ok(dense(*rows, *cols, *noise_level, seed)),
        }
    }
}

/// Uniform random `A` and `x_true` on `[-1, 1)`, `B = Aᵀ`, `b = A x_true + e`.
pub fn dense(rows: usize, cols: usize, noise_level: f64, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let x_true: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    let a = Arc::new(
        DenseMatrix::new(Mat::from_row_major(rows, cols, entries)).expect("entries are finite"),
    );
    let b_clean = a.apply(&x_true);
    let (b, noise_norm) = add_noise(&b_clean, noise_level, seed.wrapping_add(1));
    Problem {
        back: transpose_of(&a),
        forward: a,
        b,
        x_true,
        grid: None,
        noise_norm,
        matched: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_is_deterministic_and_matched() {
        let p = dense(6, 4, 0.01, 3);
        let q = dense(6, 4, 0.01, 3);
        assert_eq!(p.b, q.b);
        assert_eq!(p.forward.shape(), (6, 4));
        assert_eq!(p.back.shape(), (4, 6));
        assert!(p.noise_norm > 0.0);
        assert_ne!(dense(6, 4, 0.01, 4).b, p.b);
    }
}
