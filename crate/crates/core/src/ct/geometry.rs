use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(any(feature = "std", test)))]
use num_traits::Float;

use crate::{Error, Result};

/// Square-pixel image grid centered on the origin.
///
/// Pixel `(row, col)` is stored at index `row * nx + col`; row 0 is the top of
/// the image (largest `y`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGrid {
    pub nx: usize,
    pub ny: usize,
    pub pixel_size: f64,
}

impl ImageGrid {
    pub fn new(nx: usize, ny: usize, pixel_size: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidConfig(
                "image grid needs at least one pixel per axis".into(),
            ));
        }
        if !(pixel_size > 0.0 && pixel_size.is_finite()) {
            return Err(Error::InvalidConfig(
                "pixel size must be positive and finite".into(),
            ));
        }
        Ok(Self { nx, ny, pixel_size })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn half_width(&self) -> f64 {
        self.nx as f64 * self.pixel_size / 2.0
    }

    pub fn half_height(&self) -> f64 {
        self.ny as f64 * self.pixel_size / 2.0
    }

    /// World coordinates of a pixel center.
    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let x = (col as f64 + 0.5) * self.pixel_size - self.half_width();
        let y = self.half_height() - (row as f64 + 0.5) * self.pixel_size;
        (x, y)
    }

    pub fn diagonal(&self) -> f64 {
        let w = self.nx as f64 * self.pixel_size;
        let h = self.ny as f64 * self.pixel_size;
        (w * w + h * h).sqrt()
    }
}

/// Parallel-beam acquisition: one detector row per view angle.
///
/// Sinogram entry `(angle i, bin j)` lives at `i * det_count + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelGeometry {
    angles: Vec<f64>,
    det_count: usize,
    det_spacing: f64,
}

impl ParallelGeometry {
    pub fn new(angles: Vec<f64>, det_count: usize, det_spacing: f64) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one view angle is required".into(),
            ));
        }
        if angles.iter().any(|&a| !(0.0..PI).contains(&a)) {
            return Err(Error::InvalidConfig(
                "view angles must lie in [0, pi)".into(),
            ));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "view angles must be strictly increasing".into(),
            ));
        }
        if det_count == 0 {
            return Err(Error::InvalidConfig(
                "detector needs at least one bin".into(),
            ));
        }
        if !(det_spacing > 0.0 && det_spacing.is_finite()) {
            return Err(Error::InvalidConfig(
                "detector spacing must be positive and finite".into(),
            ));
        }
        Ok(Self {
            angles,
            det_count,
            det_spacing,
        })
    }

    /// `count` angles `i·π/count`, `i = 0..count`.
    pub fn uniform(count: usize, det_count: usize, det_spacing: f64) -> Result<Self> {
        let angles = (0..count).map(|i| i as f64 * PI / count as f64).collect();
        Self::new(angles, det_count, det_spacing)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn det_count(&self) -> usize {
        self.det_count
    }

    pub fn det_spacing(&self) -> f64 {
        self.det_spacing
    }

    pub fn measurements(&self) -> usize {
        self.angles.len() * self.det_count
    }

    /// Signed offset of bin `j`'s center from the detector center.
    pub fn bin_offset(&self, j: usize) -> f64 {
        (j as f64 - (self.det_count as f64 - 1.0) / 2.0) * self.det_spacing
    }

    pub fn extent(&self) -> f64 {
        self.det_count as f64 * self.det_spacing
    }

    /// `(cos θ, sin θ)` of the detector axis, with sub-`1e-15` components snapped to zero
    /// so that axis-aligned views are exactly axis-aligned.
    pub fn direction(&self, angle_index: usize) -> (f64, f64) {
        let theta = self.angles[angle_index];
        (snap(theta.cos()), snap(theta.sin()))
    }
}

fn snap(v: f64) -> f64 {
    if v.abs() < 1e-15 {
        0.0
    } else {
        v
    }
}
