//! Ray-driven forward projection and pixel-driven backprojection.
//!
//! The two are deliberately different discretizations of the same Radon
//! transform, so `B = back_pixel_driven(..)` is close to but not equal to `Aᵀ`
//! for `A = forward_ray_driven(..)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(any(feature = "std", test)))]
use num_traits::Float;

use super::{ImageGrid, ParallelGeometry};
use crate::operator::{assemble, transpose_of, DenseMatrix, LinearOperator, OperatorHandle};
use crate::{Error, Result};

/// Upper bound on `rows * cols` for dense assembly.
pub const DENSE_ASSEMBLY_LIMIT: usize = 10_000_000;

/// Walks the line `p0 + t·d` (unit `d`) through the grid and reports every
/// pixel it crosses with the exact intersection length.
///
/// Pixels are half-open: a line lying exactly on a grid line belongs to the
/// pixel on its positive-x (resp. positive-y) side.
pub fn trace_ray(
    grid: &ImageGrid,
    p0: (f64, f64),
    d: (f64, f64),
    mut visit: impl FnMut(usize, f64),
) {
    let ps = grid.pixel_size;
    let (xmin, xmax) = (-grid.half_width(), grid.half_width());
    let (ymin, ymax) = (-grid.half_height(), grid.half_height());

    let slab = |p: f64, dir: f64, lo: f64, hi: f64| -> Option<(f64, f64)> {
        if dir == 0.0 {
            if p >= lo && p < hi {
                Some((f64::NEG_INFINITY, f64::INFINITY))
            } else {
                None
            }
        } else {
            let a = (lo - p) / dir;
            let b = (hi - p) / dir;
            Some((a.min(b), a.max(b)))
        }
    };
    let Some((xlo, xhi)) = slab(p0.0, d.0, xmin, xmax) else {
        return;
    };
    let Some((ylo, yhi)) = slab(p0.1, d.1, ymin, ymax) else {
        return;
    };
    let tmin = xlo.max(ylo);
    let tmax = xhi.min(yhi);
    if !(tmax > tmin) {
        return;
    }

    let crossings = |p: f64, dir: f64, lo: f64, count: usize| -> Vec<f64> {
        if dir == 0.0 {
            return Vec::new();
        }
        let mut ts: Vec<f64> = (1..count)
            .map(|i| (lo + i as f64 * ps - p) / dir)
            .filter(|&t| t > tmin && t < tmax)
            .collect();
        if dir < 0.0 {
            ts.reverse();
        }
        ts
    };
    let tx = crossings(p0.0, d.0, xmin, grid.nx);
    let ty = crossings(p0.1, d.1, ymin, grid.ny);

    let (mut i, mut j) = (0, 0);
    let mut t_prev = tmin;
    loop {
        let t_next = match (tx.get(i), ty.get(j)) {
            (Some(&a), Some(&b)) if a <= b => {
                i += 1;
                a
            }
            (Some(_), Some(&b)) => {
                j += 1;
                b
            }
            (Some(&a), None) => {
                i += 1;
                a
            }
            (None, Some(&b)) => {
                j += 1;
                b
            }
            (None, None) => tmax,
        };
        let len = t_next - t_prev;
        if len > 0.0 {
            let tm = 0.5 * (t_prev + t_next);
            let x = p0.0 + tm * d.0;
            let y = p0.1 + tm * d.1;
            let col = (((x - xmin) / ps).floor().max(0.0) as usize).min(grid.nx - 1);
            let iy = (((y - ymin) / ps).floor().max(0.0) as usize).min(grid.ny - 1);
            let row = grid.ny - 1 - iy;
            visit(row * grid.nx + col, len);
        }
        if t_next >= tmax {
            break;
        }
        t_prev = t_next;
    }
}

/// Start point and unit direction of the ray through bin `bin` at view `angle_index`.
pub fn ray(
    geometry: &ParallelGeometry,
    angle_index: usize,
    bin: usize,
) -> ((f64, f64), (f64, f64)) {
    let (c, s) = geometry.direction(angle_index);
    let offset = geometry.bin_offset(bin);
    ((offset * c, offset * s), (-s, c))
}

/// Siddon-style ray-driven forward projector `A`.
#[derive(Debug, Clone)]
pub struct RayDrivenProjector {
    grid: ImageGrid,
    geometry: ParallelGeometry,
}

impl RayDrivenProjector {
    pub fn new(grid: ImageGrid, geometry: ParallelGeometry) -> Self {
        Self { grid, geometry }
    }
}

impl LinearOperator for RayDrivenProjector {
    fn rows(&self) -> usize {
        self.geometry.measurements()
    }
    fn cols(&self) -> usize {
        self.grid.len()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols(), "forward projector input length");
        let dc = self.geometry.det_count();
        let mut out = vec![0.0; self.rows()];
        for a in 0..self.geometry.angles().len() {
            for j in 0..dc {
                let (p0, d) = ray(&self.geometry, a, j);
                let mut acc = 0.0;
                trace_ray(&self.grid, p0, d, |p, len| acc += len * x[p]);
                out[a * dc + j] = acc;
            }
        }
        out
    }
}

pub fn forward_ray_driven(grid: ImageGrid, geometry: ParallelGeometry) -> OperatorHandle {
    Arc::new(RayDrivenProjector::new(grid, geometry))
}

/// Pixel-driven backprojector with linear interpolation on the detector.
///
/// Each pixel center is projected onto the detector at every view; the
/// sinogram is sampled there by linear interpolation between bin centers
/// (zero beyond the outermost bins) and accumulated with weight `pixel_size`.
#[derive(Debug, Clone)]
pub struct PixelDrivenBackprojector {
    grid: ImageGrid,
    geometry: ParallelGeometry,
}

impl PixelDrivenBackprojector {
    pub fn new(grid: ImageGrid, geometry: ParallelGeometry) -> Self {
        Self { grid, geometry }
    }
}

/// Continuous detector coordinate (in bins) of world point `(x, y)` at view `a`.
pub fn detector_coordinate(geometry: &ParallelGeometry, a: usize, x: f64, y: f64) -> f64 {
    let (c, s) = geometry.direction(a);
    (x * c + y * s) / geometry.det_spacing() + (geometry.det_count() as f64 - 1.0) / 2.0
}

impl LinearOperator for PixelDrivenBackprojector {
    fn rows(&self) -> usize {
        self.grid.len()
    }
    fn cols(&self) -> usize {
        self.geometry.measurements()
    }
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.cols(), "backprojector input length");
        let dc = self.geometry.det_count();
        let ps = self.grid.pixel_size;
        let mut out = vec![0.0; self.rows()];
        for row in 0..self.grid.ny {
            for col in 0..self.grid.nx {
                let (x, y) = self.grid.pixel_center(row, col);
                let mut acc = 0.0;
                for a in 0..self.geometry.angles().len() {
                    let c = detector_coordinate(&self.geometry, a, x, y);
                    let j0 = c.floor();
                    let frac = c - j0;
                    let sino = &u[a * dc..(a + 1) * dc];
                    let sample = |j: f64| -> f64 {
                        if j >= 0.0 && j < dc as f64 {
                            sino[j as usize]
                        } else {
                            0.0
                        }
                    };
                    acc += (1.0 - frac) * sample(j0) + frac * sample(j0 + 1.0);
                }
                out[row * self.grid.nx + col] = ps * acc;
            }
        }
        out
    }
}

pub fn back_pixel_driven(grid: ImageGrid, geometry: ParallelGeometry) -> OperatorHandle {
    Arc::new(PixelDrivenBackprojector::new(grid, geometry))
}

/// Exact transpose of an assembled forward operator (desk scale only).
pub fn matched_back(forward: &dyn LinearOperator) -> Result<OperatorHandle> {
    let entries = forward.rows().saturating_mul(forward.cols());
    if entries > DENSE_ASSEMBLY_LIMIT {
        return Err(Error::SizeGuard {
            entries,
            limit: DENSE_ASSEMBLY_LIMIT,
        });
    }
    let dense = Arc::new(DenseMatrix::new(assemble(forward))?);
    Ok(transpose_of(&dense))
}
