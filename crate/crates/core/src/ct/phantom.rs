use alloc::vec::Vec;

#[cfg(not(any(feature = "std", test)))]
use num_traits::Float;

use super::ImageGrid;
use crate::{Error, Result};

/// An ellipse on the unit square `[-1, 1]²`, intensity added where it covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    /// Semi-axis along the ellipse's own x axis.
    pub a: f64,
    /// Semi-axis along the ellipse's own y axis.
    pub b: f64,
    pub x0: f64,
    pub y0: f64,
    /// Counter-clockwise rotation in degrees.
    pub phi_deg: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let phi = self.phi_deg.to_radians();
        let (s, c) = (phi.sin(), phi.cos());
        let (dx, dy) = (x - self.x0, y - self.y0);
        let u = (dx * c + dy * s) / self.a;
        let v = (-dx * s + dy * c) / self.b;
        u * u + v * v <= 1.0
    }
}

/// The ten-ellipse Shepp–Logan table with the contrast-enhanced intensities
/// that keep the stacked image within `[0, 1]`.
pub const SHEPP_LOGAN: [Ellipse; 10] = [
    Ellipse {
        intensity: 1.0,
        a: 0.69,
        b: 0.92,
        x0: 0.0,
        y0: 0.0,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: -0.8,
        a: 0.6624,
        b: 0.874,
        x0: 0.0,
        y0: -0.0184,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: -0.2,
        a: 0.11,
        b: 0.31,
        x0: 0.22,
        y0: 0.0,
        phi_deg: -18.0,
    },
    Ellipse {
        intensity: -0.2,
        a: 0.16,
        b: 0.41,
        x0: -0.22,
        y0: 0.0,
        phi_deg: 18.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.21,
        b: 0.25,
        x0: 0.0,
        y0: 0.35,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.046,
        b: 0.046,
        x0: 0.0,
        y0: 0.1,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.046,
        b: 0.046,
        x0: 0.0,
        y0: -0.1,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.046,
        b: 0.023,
        x0: -0.08,
        y0: -0.605,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.023,
        b: 0.023,
        x0: 0.0,
        y0: -0.606,
        phi_deg: 0.0,
    },
    Ellipse {
        intensity: 0.1,
        a: 0.023,
        b: 0.046,
        x0: 0.06,
        y0: -0.605,
        phi_deg: 0.0,
    },
];

/// Samples an ellipse stack at pixel centers; the grid's extent maps onto `[-1, 1]²`.
pub fn ellipse_phantom(grid: &ImageGrid, ellipses: &[Ellipse]) -> Vec<f64> {
    let (hw, hh) = (grid.half_width(), grid.half_height());
    let mut out = Vec::with_capacity(grid.len());
    for row in 0..grid.ny {
        for col in 0..grid.nx {
            let (x, y) = grid.pixel_center(row, col);
            let (u, v) = (x / hw, y / hh);
            let value = ellipses
                .iter()
                .filter(|e| e.contains(u, v))
                .map(|e| e.intensity)
                .sum::<f64>();
            // Overlaps of +1 and -0.8/-0.2 can round to -1e-17.
            out.push(if value.abs() < 1e-12 { 0.0 } else { value });
        }
    }
    out
}

/// Shepp–Logan phantom on a square grid.
pub fn shepp_logan(grid: &ImageGrid) -> Result<Vec<f64>> {
    if grid.nx != grid.ny {
        return Err(Error::InvalidConfig(
            "Shepp-Logan phantom needs a square grid".into(),
        ));
    }
    Ok(ellipse_phantom(grid, &SHEPP_LOGAN))
}
