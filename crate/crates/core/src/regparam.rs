//! Tikhonov parameter selection on the projected problem
//! `min ‖H y − β e₁‖² + λ²‖y‖²`.
//!
//! Both selectors work from the SVD `H = U Σ Vᵀ`: with `c = β Uᵀe₁` the
//! regularized solution has `‖y_λ‖² = Σ (σᵢcᵢ/(σᵢ²+λ²))²` and residual
//! `‖H y_λ − βe₁‖² = Σ (λ²cᵢ/(σᵢ²+λ²))² + ρ²`, where `ρ` is the part of
//! `βe₁` outside the range of `U`. Candidate values are an exhaustive
//! log-spaced grid bounded by the singular values.

use alloc::vec::Vec;

#[cfg(not(any(feature = "std", test)))]
use num_traits::Float;

use crate::arnoldi::{solve_projected_ls, svd_of_hessenberg};
use crate::linalg::Mat;
use crate::{Error, Result};

pub const DEFAULT_GRID_COUNT: usize = 200;
const LOWER_BOUND_FACTOR: f64 = 1e-4;
const LOWER_BOUND_FLOOR: f64 = 1e-12;
/// Curvatures at or below this count as "no corner".
const MIN_CORNER_CURVATURE: f64 = 1e-8;
/// Points that move less than this fraction of the mean step are skipped
/// when estimating curvature; their finite differences are pure rounding.
const MIN_RELATIVE_SPEED: f64 = 1e-3;

/// Strictly increasing, log-spaced candidate values of `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || count < 2 {
            return Err(Error::DegenerateCurve(
                "lambda grid needs 0 < lo < hi and at least two points",
            ));
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        let step = (lhi - llo) / (count - 1) as f64;
        let mut values: Vec<f64> = (0..count).map(|i| (llo + step * i as f64).exp()).collect();
        values[0] = lo;
        values[count - 1] = hi;
        Ok(Self { values })
    }

    /// `[max(σ_min·1e-4, 1e-12), σ_max]` with `count` points.
    pub fn for_singular_values(sigma: &[f64], count: usize) -> Result<Self> {
        let smax = sigma.iter().copied().fold(0.0, f64::max);
        let smin = sigma.iter().copied().fold(f64::INFINITY, f64::min);
        if !(smax > 0.0) {
            return Err(Error::DegenerateCurve("all singular values are zero"));
        }
        let lo = (smin * LOWER_BOUND_FACTOR).max(LOWER_BOUND_FLOOR);
        Self::log_spaced(lo, smax, count)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Singular values of `H` with the transformed right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSpectrum {
    pub sigma: Vec<f64>,
    /// `cᵢ = β uᵢᵀ e₁`
    pub coeffs: Vec<f64>,
    /// `ρ²`, squared norm of the component of `βe₁` outside `range(U)`.
    pub incompatibility: f64,
    /// Row count of `H` (`k + 1`), used by the GCV trace.
    pub rows: usize,
}

impl ProjectedSpectrum {
    /// From precomputed pieces; `ρ² = β² − Σcᵢ²` (clamped at 0).
    pub fn new(sigma: Vec<f64>, coeffs: Vec<f64>, beta: f64, rows: usize) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::DegenerateCurve(
                "right-hand side norm must be positive",
            ));
        }
        if sigma.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                context: "projected spectrum",
                left: (sigma.len(), 1),
                right: (coeffs.len(), 1),
            });
        }
        let captured: f64 = coeffs.iter().map(|c| c * c).sum();
        let incompatibility = (beta * beta - captured).max(0.0);
        Ok(Self {
            sigma,
            coeffs,
            incompatibility,
            rows,
        })
    }

    pub fn from_hessenberg(hess: &Mat, beta: f64) -> Result<Self> {
        let svd = svd_of_hessenberg(hess)?;
        let coeffs: Vec<f64> = (0..svd.sigma.len()).map(|i| beta * svd.u[(0, i)]).collect();
        let mut spec = Self::new(svd.sigma, coeffs, beta, hess.rows())?;
        // The QR residual is free of the cancellation in β² − Σcᵢ².
        let ls = solve_projected_ls(hess, beta)?;
        if !ls.rank_deficient {
            spec.incompatibility = ls.proj_residual_norm * ls.proj_residual_norm;
        }
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.sigma.iter().all(|&s| s == 0.0) {
            return Err(Error::DegenerateCurve("all singular values are zero"));
        }
        Ok(())
    }

    /// `(‖H y_λ − βe₁‖², ‖y_λ‖², Σ fᵢ)`.
    pub fn evaluate(&self, lambda: f64) -> (f64, f64, f64) {
        let l2 = lambda * lambda;
        let (mut res2, mut sol2, mut filt) = (self.incompatibility, 0.0, 0.0);
        for (&s, &c) in self.sigma.iter().zip(&self.coeffs) {
            let d = s * s + l2;
            if d == 0.0 {
                res2 += c * c;
                continue;
            }
            let r = l2 / d * c;
            let y = s * c / d;
            res2 += r * r;
            sol2 += y * y;
            filt += s * s / d;
        }
        (res2, sol2, filt)
    }

    pub fn gcv(&self, lambda: f64) -> f64 {
        let (res2, _, filt) = self.evaluate(lambda);
        let trace = self.rows as f64 - filt;
        res2 / (trace * trace)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LCurvePoint {
    pub lambda: f64,
    /// `log ‖H y_λ − βe₁‖₂`
    pub log_residual: f64,
    /// `log ‖y_λ‖₂`
    pub log_solution: f64,
}

pub fn tikhonov_curve_points(
    spectrum: &ProjectedSpectrum,
    grid: &LambdaGrid,
) -> Result<Vec<LCurvePoint>> {
    spectrum.check()?;
    Ok(grid
        .values()
        .iter()
        .map(|&lambda| {
            let (res2, sol2, _) = spectrum.evaluate(lambda);
            LCurvePoint {
                lambda,
                log_residual: 0.5 * res2.ln(),
                log_solution: 0.5 * sol2.ln(),
            }
        })
        .collect())
}

/// Signed curvature of the discrete curve at interior points (centered
/// differences in the point index). `None` where it cannot be estimated.
pub fn discrete_curvature(points: &[LCurvePoint]) -> Vec<Option<f64>> {
    let n = points.len();
    let mut out = alloc::vec![None; n];
    if n < 3 {
        return out;
    }
    let arc: f64 = points
        .windows(2)
        .map(|w| {
            (w[1].log_residual - w[0].log_residual).hypot(w[1].log_solution - w[0].log_solution)
        })
        .filter(|d| d.is_finite())
        .sum();
    let min_speed = MIN_RELATIVE_SPEED * arc / (n - 1) as f64;
    for i in 1..n - 1 {
        let (p, c, q) = (&points[i - 1], &points[i], &points[i + 1]);
        let dx = 0.5 * (q.log_residual - p.log_residual);
        let dy = 0.5 * (q.log_solution - p.log_solution);
        let ddx = q.log_residual - 2.0 * c.log_residual + p.log_residual;
        let ddy = q.log_solution - 2.0 * c.log_solution + p.log_solution;
        let speed = dx.hypot(dy);
        if !speed.is_finite() || speed <= min_speed || speed == 0.0 {
            continue;
        }
        let kappa = (dx * ddy - dy * ddx) / (speed * speed * speed);
        if kappa.is_finite() {
            out[i] = Some(kappa);
        }
    }
    out
}

/// `λ` at the point of maximum signed curvature; ties go to the larger `λ`.
pub fn lcurve_corner(points: &[LCurvePoint]) -> Result<f64> {
    if points.len() < 5 {
        return Err(Error::DegenerateCurve("L-curve needs at least five points"));
    }
    let mut best: Option<(f64, f64)> = None;
    for (pt, kappa) in points.iter().zip(discrete_curvature(points)) {
        let Some(kappa) = kappa else { continue };
        if best.is_none_or(|(bk, _)| kappa >= bk) {
            best = Some((kappa, pt.lambda));
        }
    }
    match best {
        Some((kappa, lambda)) if kappa > MIN_CORNER_CURVATURE => Ok(lambda),
        Some(_) => Err(Error::DegenerateCurve("L-curve has no corner")),
        None => Err(Error::DegenerateCurve(
            "L-curve curvature is undefined everywhere",
        )),
    }
}

/// Grid minimizer of `GCV(λ) = ‖H y_λ − βe₁‖² / (k+1 − Σfᵢ)²`; ties go to the larger `λ`.
pub fn gcv_minimize(spectrum: &ProjectedSpectrum, grid: &LambdaGrid) -> Result<f64> {
    spectrum.check()?;
    let mut best: Option<(f64, f64)> = None;
    for &lambda in grid.values() {
        let (res2, _, filt) = spectrum.evaluate(lambda);
        let trace = spectrum.rows as f64 - filt;
        if !(trace > 1e-300) {
            return Err(Error::DegenerateCurve("GCV denominator vanished"));
        }
        let g = res2 / (trace * trace);
        if !g.is_finite() {
            continue;
        }
        if best.is_none_or(|(bg, _)| g <= bg) {
            best = Some((g, lambda));
        }
    }
    best.map(|(_, l)| l)
        .ok_or(Error::DegenerateCurve("GCV is undefined on the whole grid"))
}

/// L-curve choice for a Hessenberg projected problem.
pub fn select_lcurve(hess: &Mat, beta: f64) -> Result<f64> {
    let spec = ProjectedSpectrum::from_hessenberg(hess, beta)?;
    let grid = LambdaGrid::for_singular_values(&spec.sigma, DEFAULT_GRID_COUNT)?;
    lcurve_corner(&tikhonov_curve_points(&spec, &grid)?)
}

/// GCV choice for a Hessenberg projected problem.
pub fn select_gcv(hess: &Mat, beta: f64) -> Result<f64> {
    let spec = ProjectedSpectrum::from_hessenberg(hess, beta)?;
    let grid = LambdaGrid::for_singular_values(&spec.sigma, DEFAULT_GRID_COUNT)?;
    gcv_minimize(&spec, &grid)
}
