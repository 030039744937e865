use alloc::vec::Vec;

use crate::linalg::{self, least_squares, Mat, Svd};
use crate::{Error, Result};

/// Solution of the small projected problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSolution {
    pub y: Vec<f64>,
    /// `‖H y − β e₁‖₂`
    pub proj_residual_norm: f64,
    pub lambda_used: f64,
    /// The unregularized solve hit a numerically singular `H`; `y` is the
    /// minimum-norm minimizer.
    pub rank_deficient: bool,
}

fn check_shape(hess: &Mat) -> Result<()> {
    if hess.cols() == 0 || hess.rows() < hess.cols() {
        return Err(Error::DimensionMismatch {
            context: "projected problem (needs (k+1) x k with k >= 1)",
            left: (hess.rows(), hess.cols()),
            right: (hess.cols() + 1, hess.cols()),
        });
    }
    Ok(())
}

fn scaled_e1(len: usize, beta: f64) -> Vec<f64> {
    let mut rhs = alloc::vec![0.0; len];
    rhs[0] = beta;
    rhs
}

/// `argmin_y ‖H y − β e₁‖₂`.
pub fn solve_projected_ls(hess: &Mat, beta: f64) -> Result<ProjectedSolution> {
    check_shape(hess)?;
    let ls = least_squares(hess, &scaled_e1(hess.rows(), beta));
    Ok(ProjectedSolution {
        y: ls.x,
        proj_residual_norm: ls.residual_norm,
        lambda_used: 0.0,
        rank_deficient: ls.rank_deficient,
    })
}

/// `argmin_y ‖H y − β e₁‖₂² + λ²‖y‖₂²` via QR of the stacked `[H; λI]`.
///
/// `λ = 0` is exactly [`solve_projected_ls`].
pub fn solve_projected_tikhonov(hess: &Mat, beta: f64, lambda: f64) -> Result<ProjectedSolution> {
    check_shape(hess)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(
            "regularization parameter must be finite and nonnegative".into(),
        ));
    }
    if lambda == 0.0 {
        return solve_projected_ls(hess, beta);
    }
    let (r, k) = (hess.rows(), hess.cols());
    let mut stacked = Mat::zeros(r + k, k);
    for i in 0..r {
        for j in 0..k {
            stacked[(i, j)] = hess[(i, j)];
        }
    }
    for j in 0..k {
        stacked[(r + j, j)] = lambda;
    }
    let ls = least_squares(&stacked, &scaled_e1(r + k, beta));
    let mut res = hess.matvec(&ls.x);
    res[0] -= beta;
    Ok(ProjectedSolution {
        y: ls.x,
        proj_residual_norm: linalg::norm2(&res),
        lambda_used: lambda,
        rank_deficient: false,
    })
}

/// Thin SVD of the projected matrix.
pub fn svd_of_hessenberg(hess: &Mat) -> Result<Svd> {
    check_shape(hess)?;
    Ok(Svd::thin(hess))
}
