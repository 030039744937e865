//! 2-D parallel-beam CT test problems.
//!
//! A problem couples a Shepp–Logan ground truth, a Siddon forward projector
//! `A`, a backprojector `B` (pixel-driven, or the exact dense transpose in
//! matched mode) and noisy data `b = A x_true + e`.

mod geometry;
mod noise;
mod phantom;
mod projector;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use geometry::{ImageGrid, ParallelGeometry};
pub use noise::add_noise;
pub use phantom::{ellipse_phantom, shepp_logan, Ellipse, SHEPP_LOGAN};
pub use projector::{
    back_pixel_driven, detector_coordinate, forward_ray_driven, matched_back, ray, trace_ray,
    PixelDrivenBackprojector, RayDrivenProjector, DENSE_ASSEMBLY_LIMIT,
};

use crate::operator::OperatorHandle;
use crate::{Error, Result};

/// Built-in problem presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestProblem {
    /// 128², 180 views × 128 bins, 0.1 % noise.
    Tp1Like,
    /// 128², 50 views × 128 bins, 2.5 % noise.
    Tp2,
    /// 256², 50 views × 256 bins, 1.5 % noise.
    Tp3Desk,
}

impl TestProblem {
    pub fn setup(self) -> CtSetup {
        match self {
            TestProblem::Tp1Like => CtSetup {
                size: 128,
                angles: 180,
                det_count: 128,
                det_spacing: 1.5,
                noise_level: 0.001,
            },
            TestProblem::Tp2 => CtSetup {
                size: 128,
                angles: 50,
                det_count: 128,
                det_spacing: 1.5,
                noise_level: 0.025,
            },
            TestProblem::Tp3Desk => CtSetup {
                size: 256,
                angles: 50,
                det_count: 256,
                det_spacing: 1.5,
                noise_level: 0.015,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestProblem::Tp1Like => "tp1-like",
            TestProblem::Tp2 => "tp2",
            TestProblem::Tp3Desk => "tp3-desk",
        }
    }
}

impl fmt::Display for TestProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestProblem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tp1-like" => Ok(TestProblem::Tp1Like),
            "tp2" => Ok(TestProblem::Tp2),
            "tp3-desk" => Ok(TestProblem::Tp3Desk),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown test problem '{other}' (expected tp1-like, tp2 or tp3-desk)"
            ))),
        }
    }
}

/// Explicit problem description: square Shepp–Logan image with unit pixels,
/// uniformly spaced views over `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtSetup {
    pub size: usize,
    pub angles: usize,
    pub det_count: usize,
    /// In pixel units.
    pub det_spacing: f64,
    /// Relative noise level `‖e‖₂/‖b‖₂`.
    pub noise_level: f64,
}

/// A fully populated CT test problem.
#[derive(Debug, Clone)]
pub struct CtProblem {
    pub grid: ImageGrid,
    pub geometry: ParallelGeometry,
    pub x_true: Vec<f64>,
    pub b_clean: Vec<f64>,
    pub b_noisy: Vec<f64>,
    pub noise_norm: f64,
    pub forward: OperatorHandle,
    pub back: OperatorHandle,
    pub matched: bool,
}

impl CtProblem {
    pub fn build(setup: &CtSetup, matched: bool, seed: u64) -> Result<Self> {
        if !(setup.noise_level >= 0.0) {
            return Err(Error::InvalidConfig(
                "noise level must be nonnegative".into(),
            ));
        }
        let grid = ImageGrid::square(setup.size)?;
        let geometry = ParallelGeometry::uniform(setup.angles, setup.det_count, setup.det_spacing)?;
        let x_true = shepp_logan(&grid)?;
        let forward = forward_ray_driven(grid, geometry.clone());
        let back = if matched {
            matched_back(&*forward)?
        } else {
            back_pixel_driven(grid, geometry.clone())
        };
        let b_clean = forward.apply(&x_true);
        let (b_noisy, noise_norm) = add_noise(&b_clean, setup.noise_level, seed);
        Ok(Self {
            grid,
            geometry,
            x_true,
            b_clean,
            b_noisy,
            noise_norm,
            forward,
            back,
            matched,
        })
    }

    pub fn unknowns(&self) -> usize {
        self.grid.len()
    }

    pub fn measurements(&self) -> usize {
        self.geometry.measurements()
    }
}

/// Builds one of the named presets.
pub fn build_test_problem(name: TestProblem, matched: bool, seed: u64) -> Result<CtProblem> {
    CtProblem::build(&name.setup(), matched, seed)
}
