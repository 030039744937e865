mod common;

use abba_core::ct::{ellipse_phantom, ImageGrid, SHEPP_LOGAN};
use abba_core::metrics::{rre, ssim, ssim_with_range, MetricReport};
use abba_core::Error;
use common::*;

/// Mean SSIM over every 8×8 window, evaluated directly from the definition.
fn ssim_direct(x: &[f64], y: &[f64], n: usize, range: f64) -> f64 {
    let w = 8;
    let mut g = [[0.0; 8]; 8];
    let mut total = 0.0;
    for (a, row) in g.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let (da, db) = (a as f64 - 3.5, b as f64 - 3.5);
            *v = (-(da * da + db * db) / (2.0 * 1.5 * 1.5)).exp();
            total += *v;
        }
    }
    let (c1, c2) = ((0.01 * range).powi(2), (0.03 * range).powi(2));
    let mut acc = 0.0;
    let mut count = 0;
    for i in 0..=n - w {
        for j in 0..=n - w {
            let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for a in 0..w {
                for b in 0..w {
                    let wt = g[a][b] / total;
                    let (u, v) = (x[(i + a) * n + j + b], y[(i + a) * n + j + b]);
                    mx += wt * u;
                    my += wt * v;
                    sxx += wt * u * u;
                    syy += wt * v * v;
                    sxy += wt * u * v;
                }
            }
            let (vx, vy, cxy) = (sxx - mx * mx, syy - my * my, sxy - mx * my);
            acc += (2.0 * mx * my + c1) * (2.0 * cxy + c2)
                / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    acc / count as f64
}

fn phantom(n: usize) -> (Vec<f64>, ImageGrid) {
    let grid = ImageGrid::square(n).unwrap();
    (ellipse_phantom(&grid, &SHEPP_LOGAN), grid)
}

fn range(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

#[test]
fn rre_examples() {
    let t = [1.0, -2.0, 2.0];
    assert_eq!(rre(&t, &t).unwrap(), 0.0);
    assert_eq!(rre(&[0.0; 3], &t).unwrap(), 1.0);
    assert_eq!(rre(&[2.0, -4.0, 4.0], &t).unwrap(), 1.0);
    assert!(matches!(rre(&t, &[0.0; 3]), Err(Error::UndefinedMetric(_))));
    assert!(rre(&t, &[1.0]).is_err());
}

#[test]
fn ssim_of_identical_images_is_one() {
    let (x, grid) = phantom(32);
    assert!((ssim(&x, &x, &grid).unwrap() - 1.0).abs() < 1e-12);
    let report = MetricReport::evaluate(&x, &x, &grid).unwrap();
    assert_eq!(report.rre, 0.0);
}

#[test]
fn shifted_image_matches_direct_evaluation() {
    let (t, grid) = phantom(16);
    let l = range(&t);
    let x: Vec<f64> = t.iter().map(|v| v + 0.5 * l).collect();
    let got = ssim(&x, &t, &grid).unwrap();
    let want = ssim_direct(&x, &t, 16, l);
    assert!(got < 1.0);
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn random_images_match_direct_evaluation() {
    let mut r = rng(71);
    let grid = ImageGrid::square(13).unwrap();
    let t = random_vec(&mut r, 169);
    let x = random_vec(&mut r, 169);
    let got = ssim(&x, &t, &grid).unwrap();
    assert!((got - ssim_direct(&x, &t, 13, range(&t))).abs() < 1e-12);
}

#[test]
fn negated_image_has_negative_ssim() {
    // Checkerboard with a row-dependent amplitude: every window has structure.
    let n = 20;
    let grid = ImageGrid::square(n).unwrap();
    let t: Vec<f64> = (0..n * n)
        .map(|p| {
            let (i, j) = (p / n, p % n);
            if (i + j) % 2 == 0 {
                1.0 + 0.1 * i as f64
            } else {
                -1.0 - 0.1 * i as f64
            }
        })
        .collect();
    let x: Vec<f64> = t.iter().map(|v| -v).collect();
    let got = ssim(&x, &t, &grid).unwrap();
    assert!(got < 0.0, "{got}");
    assert!((got - ssim_direct(&x, &t, n, range(&t))).abs() < 1e-12);
}

#[test]
fn ssim_is_symmetric_under_joint_range() {
    let mut r = rng(72);
    let grid = ImageGrid::square(12).unwrap();
    let a = random_vec(&mut r, 144);
    let b = random_vec(&mut r, 144);
    let joint: Vec<f64> = a.iter().chain(&b).cloned().collect();
    let l = range(&joint);
    let ab = ssim_with_range(&a, &b, &grid, l).unwrap();
    let ba = ssim_with_range(&b, &a, &grid, l).unwrap();
    assert!((ab - ba).abs() < 1e-14);
}

#[test]
fn ssim_rejects_bad_inputs() {
    let grid = ImageGrid::square(7).unwrap();
    assert!(ssim(&[1.0; 49], &[0.0; 49], &grid).is_err());
    let grid = ImageGrid::square(8).unwrap();
    assert!(matches!(
        ssim(&[1.0; 64], &[3.0; 64], &grid),
        Err(Error::UndefinedMetric(_))
    ));
}

#[test]
fn rre_triangle_bound() {
    let mut r = rng(73);
    for _ in 0..200 {
        let (x, y, t) = (
            random_vec(&mut r, 20),
            random_vec(&mut r, 20),
            random_vec(&mut r, 20),
        );
        let lhs = rre(&x, &t).unwrap();
        let rhs = rre(&x, &y).unwrap() * norm(&y) / norm(&t) + rre(&y, &t).unwrap();
        assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}
