#![allow(dead_code)]

use abba_core::ct::{ray, ImageGrid, ParallelGeometry};
use abba_core::linalg::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_row_major(rows, cols, random_vec(rng, rows * cols))
}

/// `(k+1) × k` upper Hessenberg with uniform entries.
pub fn random_hessenberg(rng: &mut ChaCha8Rng, k: usize) -> Mat {
    let mut h = Mat::zeros(k + 1, k);
    for j in 0..k {
        for i in 0..=(j + 1) {
            h[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    h
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b)
}

/// Gaussian elimination with complete pivoting on a square system.
pub fn solve_dense(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for (i, row) in m.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                if v.abs() > best {
                    best = v.abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        m.swap(k, pi);
        rhs.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        perm.swap(k, pj);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut z = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * z[j]).sum();
        z[k] = (rhs[k] - s) / m[k][k];
    }
    let mut x = vec![0.0; n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = z[k];
    }
    x
}

/// `argmin ‖A x − b‖² + λ²‖x‖²` through the regularized normal equations.
pub fn tikhonov_normal_equations(a: &Mat, b: &[f64], lambda: f64) -> Vec<f64> {
    let mut g = a.transpose().matmul(a);
    for i in 0..g.rows() {
        g[(i, i)] += lambda * lambda;
    }
    solve_dense(&g, &a.matvec_t(b))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

/// Length of the line `p0 + t d` inside the pixel box `[x0, x1) × [y0, y1)`.
///
/// Lines parallel to an axis use the half-open rule; all others are clipped
/// against the closed box.
pub fn chord_in_box(p0: (f64, f64), d: (f64, f64), x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for (p, dir, lo, hi) in [(p0.0, d.0, x0, x1), (p0.1, d.1, y0, y1)] {
        if dir == 0.0 {
            if !(p >= lo && p < hi) {
                return 0.0;
            }
        } else {
            let (a, b) = ((lo - p) / dir, (hi - p) / dir);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t1 - t0).max(0.0)
}

/// Forward matrix built pixel by pixel from box clipping.
pub fn clipping_oracle(grid: &ImageGrid, geom: &ParallelGeometry) -> Mat {
    let dc = geom.det_count();
    let h = grid.pixel_size / 2.0;
    let mut a = Mat::zeros(geom.measurements(), grid.len());
    for ai in 0..geom.angles().len() {
        for j in 0..dc {
            let (p0, d) = ray(geom, ai, j);
            for row in 0..grid.ny {
                for col in 0..grid.nx {
                    let (cx, cy) = grid.pixel_center(row, col);
                    a[(ai * dc + j, row * grid.nx + col)] =
                        chord_in_box(p0, d, cx - h, cx + h, cy - h, cy + h);
                }
            }
        }
    }
    a
}

/// `argmin ‖A x − b‖² + λ²‖x‖²` by Householder QR of the stacked matrix `[A; λI]`.
pub fn tikhonov_stacked_qr(a: &Mat, b: &[f64], lambda: f64) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut s: Vec<Vec<f64>> = (0..m).map(|i| a.row(i).to_vec()).collect();
    let mut rhs = b.to_vec();
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = lambda;
        s.push(row);
        rhs.push(0.0);
    }
    for k in 0..n {
        let alpha = s[k..].iter().map(|r| r[k] * r[k]).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let alpha = if s[k][k] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = s[k..].iter().map(|r| r[k]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        for j in k..n {
            let d: f64 = v.iter().zip(&s[k..]).map(|(vi, r)| vi * r[j]).sum::<f64>() * 2.0 / vv;
            for (vi, r) in v.iter().zip(s[k..].iter_mut()) {
                r[j] -= d * vi;
            }
        }
        let d: f64 = v.iter().zip(&rhs[k..]).map(|(vi, r)| vi * r).sum::<f64>() * 2.0 / vv;
        for (vi, r) in v.iter().zip(rhs[k..].iter_mut()) {
            *r -= d * vi;
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let t: f64 = (k + 1..n).map(|j| s[k][j] * x[j]).sum();
        x[k] = (rhs[k] - t) / s[k][k];
    }
    x
}
