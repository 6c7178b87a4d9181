//! Small dense linear algebra kernels: a row-major matrix type, a one-sided
//! Jacobi SVD and a Householder + implicit-QL symmetric eigensolver.
//!
//! Everything here works in `f64` and targets the modest sizes that show up
//! in this crate (a few hundred rows at most), where the simple classical
//! algorithms are both fast enough and easy to audit.

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.at(j, i))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// `C = A B`.
    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut c = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == 0.0 {
                    continue;
                }
                let brow = other.row(k);
                let crow = &mut c.data[i * other.cols..(i + 1) * other.cols];
                for (cv, bv) in crow.iter_mut().zip(brow.iter()) {
                    *cv += a * bv;
                }
            }
        }
        Ok(c)
    }

    /// Copies the block with top-left corner `(r0, c0)` and shape `(nr, nc)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat {
        Mat::from_fn(nr, nc, |i, j| self.at(r0 + i, c0 + j))
    }

    /// Writes `b` into `self` at top-left corner `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Mat) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.at(i, j));
            }
        }
    }

    pub fn add_assign(&mut self, other: &Mat) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Thin singular value decomposition `A = U diag(S) V^T` with
/// `k = min(rows, cols)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

/// Thin SVD via one-sided Jacobi rotations.
///
/// Column pairs are rotated until mutually orthogonal; singular values are
/// the final column norms. Accurate for small singular values (no squaring
/// of the condition number) at the sizes used here. Singular values come
/// out sorted in non-increasing order and every left singular vector is
/// sign-fixed so that its largest-magnitude entry is non-negative.
pub fn svd_thin(a: &Mat) -> Svd {
    if a.rows() < a.cols() {
        let t = svd_thin(&a.transpose());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let p = a.rows();
    let q = a.cols();
    let mut w = a.clone();
    let mut v = Mat::identity(q);
    let eps = 1e-15;

    for _sweep in 0..64 {
        let mut rotated = false;
        for i in 0..q.saturating_sub(1) {
            for j in (i + 1)..q {
                let mut aa = 0.0;
                let mut bb = 0.0;
                let mut ab = 0.0;
                for r in 0..p {
                    let x = w.at(r, i);
                    let y = w.at(r, j);
                    aa += x * x;
                    bb += y * y;
                    ab += x * y;
                }
                if ab.abs() <= eps * (aa * bb).sqrt() || ab == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (bb - aa) / (2.0 * ab);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..p {
                    let x = w.at(r, i);
                    let y = w.at(r, j);
                    w.set(r, i, c * x - s * y);
                    w.set(r, j, s * x + c * y);
                }
                for r in 0..q {
                    let x = v.at(r, i);
                    let y = v.at(r, j);
                    v.set(r, i, c * x - s * y);
                    v.set(r, j, s * x + c * y);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..q).collect();
    let norms: Vec<f64> = (0..q)
        .map(|j| (0..p).map(|r| w.at(r, j) * w.at(r, j)).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let mut u = Mat::zeros(p, q);
    let mut s = vec![0.0; q];
    let mut vv = Mat::zeros(q, q);
    for (k, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s[k] = sigma;
        // sign convention: largest-magnitude entry of u_k non-negative;
        // ties within a small relative window resolve to the earliest
        // index, so mirrored-magnitude vectors get stable signs
        let mut flip = 1.0;
        if sigma > 0.0 {
            let mut best = 0.0_f64;
            for r in 0..p {
                best = best.max(w.at(r, src).abs());
            }
            for r in 0..p {
                let x = w.at(r, src);
                if x.abs() >= best * (1.0 - 1e-9) {
                    if x < 0.0 {
                        flip = -1.0;
                    }
                    break;
                }
            }
            for r in 0..p {
                u.set(r, k, flip * w.at(r, src) / sigma);
            }
        }
        for r in 0..q {
            vv.set(r, k, flip * v.at(r, src));
        }
    }
    Svd { u, s, v: vv }
}

fn pythag(a: f64, b: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    if a > b {
        a * (1.0 + (b / a) * (b / a)).sqrt()
    } else if b == 0.0 {
        0.0
    } else {
        b * (1.0 + (a / b) * (a / b)).sqrt()
    }
}

/// Eigendecomposition of a symmetric matrix: Householder tridiagonalization
/// followed by tridiagonal QL with implicit shifts.
///
/// Returns eigenvalues sorted in non-decreasing order and the matching
/// orthonormal eigenvectors as the columns of the returned matrix.
pub fn sym_eigen(a: &Mat) -> Result<(Vec<f64>, Mat)> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "sym_eigen: matrix is {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let mut z = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    tred2(&mut z, &mut d, &mut e);
    tqli(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| z.at(i, order[j]));
    Ok((vals, vecs))
}

/// Householder reduction of a real symmetric matrix to tridiagonal form,
/// accumulating the orthogonal transform in-place.
fn tred2(z: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += z.at(i, k).abs();
            }
            if scale == 0.0 {
                e[i] = z.at(i, l);
            } else {
                for k in 0..=l {
                    let v = z.at(i, k) / scale;
                    z.set(i, k, v);
                    h += v * v;
                }
                let f = z.at(i, l);
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z.set(i, l, f - g);
                let mut f_acc = 0.0;
                for j in 0..=l {
                    z.set(j, i, z.at(i, j) / h);
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += z.at(j, k) * z.at(i, k);
                    }
                    for k in (j + 1)..=l {
                        g_acc += z.at(k, j) * z.at(i, k);
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * z.at(i, j);
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = z.at(i, j);
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let v = z.at(j, k) - (f * e[k] + g * z.at(i, k));
                        z.set(j, k, v);
                    }
                }
            }
        } else {
            e[i] = z.at(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z.at(i, k) * z.at(k, j);
                }
                for k in 0..i {
                    let v = z.at(k, j) - g * z.at(k, i);
                    z.set(k, j, v);
                }
            }
        }
        d[i] = z.at(i, i);
        z.set(i, i, 1.0);
        for j in 0..i {
            z.set(j, i, 0.0);
            z.set(i, j, 0.0);
        }
    }
}

/// Tridiagonal QL with implicit shifts; `z` accumulates eigenvectors.
fn tqli(d: &mut [f64], e: &mut [f64], z: &mut Mat) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Solver(
                    "QL iteration did not converge after 60 sweeps".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m as isize - 1;
            let mut underflow = false;
            while i >= l as isize {
                let iu = i as usize;
                let mut f = s * e[iu];
                let b = c * e[iu];
                r = pythag(f, g);
                e[iu + 1] = r;
                if r == 0.0 {
                    d[iu + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + 2.0 * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z.at(k, iu + 1);
                    z.set(k, iu + 1, s * z.at(k, iu) + c * f);
                    z.set(k, iu, c * z.at(k, iu) - s * f);
                }
                i -= 1;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
