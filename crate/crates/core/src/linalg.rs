//! Small dense linear algebra: vector kernels, a row-major matrix, Householder
//! least squares and a one-sided Jacobi SVD. Everything here operates on the
//! tiny projected problems, never on the full system.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(any(feature = "std", test)))]
use num_traits::Float;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    let ssq: f64 = a.iter().map(|v| v * v).sum();
    if ssq.is_normal() && ssq < 1e300 && ssq > 1e-300 {
        return ssq.sqrt();
    }
    // Rescale only when plain accumulation over- or underflows.
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ssq: f64 = a.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * ssq.sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `sum_j coeffs[j] * vectors[j]` for vectors of length `len`.
pub fn combine(vectors: &[Vec<f64>], coeffs: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (v, &c) in vectors.iter().zip(coeffs) {
        axpy(c, v, &mut out);
    }
    out
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from row-major data. Panics if the length does not match.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x`
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: sub(&self.data, &other.data),
        }
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Outcome of a dense least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    /// `‖A x − b‖₂`
    pub residual_norm: f64,
    pub rank_deficient: bool,
}

/// Relative threshold on `|r_ii| / max |r_jj|` below which the factor is treated as singular.
const RANK_TOL: f64 = 1e-13;

/// `argmin ‖A x − b‖₂` for a tall or square `A` via Householder QR.
///
/// Falls back to the minimum-norm SVD solution when `R` is numerically singular.
pub fn least_squares(a: &Mat, b: &[f64]) -> LeastSquares {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "least_squares needs rows >= cols");
    assert_eq!(b.len(), m);
    let mut r = a.clone();
    let mut qtb = b.to_vec();

    for j in 0..n {
        let col: Vec<f64> = (j..m).map(|i| r[(i, j)]).collect();
        let alpha = norm2(&col);
        if alpha == 0.0 {
            continue;
        }
        let alpha = if col[0] > 0.0 { -alpha } else { alpha };
        let mut v = col;
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j..n {
            let s: f64 = (j..m).map(|i| v[i - j] * r[(i, c)]).sum::<f64>() * 2.0 / vnorm2;
            for i in j..m {
                r[(i, c)] -= s * v[i - j];
            }
        }
        let s: f64 = (j..m).map(|i| v[i - j] * qtb[i]).sum::<f64>() * 2.0 / vnorm2;
        for i in j..m {
            qtb[i] -= s * v[i - j];
        }
    }

    let dmax = (0..n).fold(0.0f64, |acc, i| acc.max(r[(i, i)].abs()));
    let singular = n > 0 && (dmax == 0.0 || (0..n).any(|i| r[(i, i)].abs() <= RANK_TOL * dmax));
    if singular {
        let x = min_norm_solve(a, b);
        let residual_norm = norm2(&sub(&a.matvec(&x), b));
        return LeastSquares {
            x,
            residual_norm,
            rank_deficient: true,
        };
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| r[(i, j)] * x[j]).sum();
        x[i] = (qtb[i] - s) / r[(i, i)];
    }
    let residual_norm = norm2(&qtb[n..]);
    LeastSquares {
        x,
        residual_norm,
        rank_deficient: false,
    }
}

fn min_norm_solve(a: &Mat, b: &[f64]) -> Vec<f64> {
    let svd = Svd::thin(a);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; a.cols()];
    for (i, &s) in svd.sigma.iter().enumerate() {
        if s <= RANK_TOL * smax || s == 0.0 {
            continue;
        }
        let c = dot(&svd.u.column(i), b) / s;
        axpy(c, &svd.v.column(i), &mut x);
    }
    x
}

/// Thin SVD `A = U Σ Vᵀ` of an `m × n` matrix with `m ≥ n`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending, nonnegative.
    pub sigma: Vec<f64>,
    /// `m × n`, orthonormal columns.
    pub u: Mat,
    /// `n × n`, orthogonal.
    pub v: Mat,
}

impl Svd {
    /// One-sided (Hestenes) Jacobi.
    pub fn thin(a: &Mat) -> Svd {
        let (m, n) = (a.rows(), a.cols());
        assert!(m >= n, "thin SVD needs rows >= cols");
        // Column-major working copies.
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut vcols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();

        let eps = f64::EPSILON;
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = dot(&cols[p], &cols[p]);
                    let beta = dot(&cols[q], &cols[q]);
                    let gamma = dot(&cols[p], &cols[q]);
                    if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate(&mut cols, p, q, c, s);
                    rotate(&mut vcols, p, q, c, s);
                }
            }
            if !rotated {
                break;
            }
        }

        let mut order: Vec<(f64, usize)> = cols
            .iter()
            .enumerate()
            .map(|(j, c)| (norm2(c), j))
            .collect();
        // Stable sort keeps equal singular values in column order.
        order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(core::cmp::Ordering::Equal));

        let smax = order.first().map_or(0.0, |o| o.0);
        let mut sigma = Vec::with_capacity(n);
        let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut vsorted: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut null_slots = Vec::new();
        for (s, j) in order {
            let tiny = s == 0.0 || s <= smax * eps * (m as f64);
            if tiny {
                null_slots.push(ucols.len());
                ucols.push(vec![0.0; m]);
                sigma.push(if s == 0.0 { 0.0 } else { s });
            } else {
                let mut u = cols[j].clone();
                scale(1.0 / s, &mut u);
                ucols.push(u);
                sigma.push(s);
            }
            vsorted.push(vcols[j].clone());
        }
        // Complete U with unit vectors orthogonalized against the existing columns.
        for slot in null_slots {
            for e in 0..m {
                let mut cand = vec![0.0; m];
                cand[e] = 1.0;
                for _ in 0..2 {
                    for (i, u) in ucols.iter().enumerate() {
                        if i == slot || (norm2(u) == 0.0) {
                            continue;
                        }
                        let h = dot(u, &cand);
                        axpy(-h, u, &mut cand);
                    }
                }
                let nrm = norm2(&cand);
                if nrm > 0.5 {
                    scale(1.0 / nrm, &mut cand);
                    ucols[slot] = cand;
                    break;
                }
            }
        }

        Svd {
            sigma,
            u: Mat::from_columns(m, &ucols),
            v: Mat::from_columns(n, &vsorted),
        }
    }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}
