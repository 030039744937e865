//! Reconstruction quality: relative error and SSIM.

use alloc::vec::Vec;

#[cfg(not(any(feature = "std", test)))]
use num_traits::Float;

use crate::ct::ImageGrid;
use crate::linalg;
use crate::{Error, Result};

/// SSIM window side length.
pub const SSIM_WINDOW: usize = 8;
/// Standard deviation (in pixels) of the Gaussian SSIM window.
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub rre: f64,
    pub ssim: f64,
}

impl MetricReport {
    pub fn evaluate(x: &[f64], x_true: &[f64], grid: &ImageGrid) -> Result<Self> {
        Ok(Self {
            rre: rre(x, x_true)?,
            ssim: ssim(x, x_true, grid)?,
        })
    }
}

/// `‖x − x_true‖₂ / ‖x_true‖₂`.
pub fn rre(x: &[f64], x_true: &[f64]) -> Result<f64> {
    if x.len() != x_true.len() {
        return Err(Error::DimensionMismatch {
            context: "rre",
            left: (x.len(), 1),
            right: (x_true.len(), 1),
        });
    }
    let denom = linalg::norm2(x_true);
    if denom == 0.0 {
        return Err(Error::UndefinedMetric(
            "relative error against a zero image",
        ));
    }
    Ok(linalg::norm2(&linalg::sub(x, x_true)) / denom)
}

/// Normalized 8×8 Gaussian weights, row-major.
pub fn gaussian_window() -> [f64; SSIM_WINDOW * SSIM_WINDOW] {
    let c = (SSIM_WINDOW as f64 - 1.0) / 2.0;
    let g: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - c;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let mut w = [0.0; SSIM_WINDOW * SSIM_WINDOW];
    let mut total = 0.0;
    for i in 0..SSIM_WINDOW {
        for j in 0..SSIM_WINDOW {
            w[i * SSIM_WINDOW + j] = g[i] * g[j];
            total += g[i] * g[j];
        }
    }
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Mean SSIM over all fully contained 8×8 windows, with the dynamic range
/// taken from `x_true`.
pub fn ssim(x: &[f64], x_true: &[f64], grid: &ImageGrid) -> Result<f64> {
    let (lo, hi) = x_true
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    ssim_with_range(x, x_true, grid, hi - lo)
}

/// [`ssim`] with an explicit dynamic range `range`.
pub fn ssim_with_range(x: &[f64], y: &[f64], grid: &ImageGrid, range: f64) -> Result<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    if x.len() != grid.len() || y.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            context: "ssim",
            left: (x.len(), y.len()),
            right: (grid.len(), grid.len()),
        });
    }
    if nx < SSIM_WINDOW || ny < SSIM_WINDOW {
        return Err(Error::UndefinedMetric(
            "SSIM needs images of at least 8x8 pixels",
        ));
    }
    if !(range > 0.0 && range.is_finite()) {
        return Err(Error::UndefinedMetric("SSIM of a constant reference image"));
    }
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let w = gaussian_window();
    let mut total = 0.0;
    let mut count = 0usize;
    for r0 in 0..=ny - SSIM_WINDOW {
        for q0 in 0..=nx - SSIM_WINDOW {
            let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..SSIM_WINDOW {
                let base = (r0 + i) * nx + q0;
                for j in 0..SSIM_WINDOW {
                    let wt = w[i * SSIM_WINDOW + j];
                    let (a, b) = (x[base + j], y[base + j]);
                    mx += wt * a;
                    my += wt * b;
                    sxx += wt * a * a;
                    syy += wt * b * b;
                    sxy += wt * a * b;
                }
            }
            let vx = sxx - mx * mx;
            let vy = syy - my * my;
            let cov = sxy - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}
