//! Periodic spectral utilities: FFT-based differentiation on uniform grids
//! and trigonometric (Fourier) interpolation.

use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

fn fft_forward(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(data.len()).process(data);
}

fn fft_inverse(data: &mut [Complex64]) {
    let n = data.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(data);
    let scale = 1.0 / n as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Signed wavenumber of FFT bin `j` on a periodic domain of length `len`
/// sampled at `n` points: `2*pi*j~/len` with `j~` the signed frequency.
pub fn wavenumber(j: usize, n: usize, len: f64) -> f64 {
    let hj = if j <= n / 2 { j as isize } else { j as isize - n as isize };
    2.0 * PI * hj as f64 / len
}

/// Applies the periodic Laplacian (second derivative) spectrally.
pub fn laplacian(v: &[f64], domain_len: f64) -> Vec<f64> {
    let n = v.len();
    let mut hat = to_complex(v);
    fft_forward(&mut hat);
    for (j, h) in hat.iter_mut().enumerate() {
        let k = wavenumber(j, n, domain_len);
        *h *= -k * k;
    }
    fft_inverse(&mut hat);
    hat.iter().map(|c| c.re).collect()
}

/// Applies the periodic first derivative spectrally. The Nyquist mode is
/// zeroed (its derivative has no consistent real representation).
pub fn derivative(v: &[f64], domain_len: f64) -> Vec<f64> {
    let n = v.len();
    let mut hat = to_complex(v);
    fft_forward(&mut hat);
    for (j, h) in hat.iter_mut().enumerate() {
        if n % 2 == 0 && j == n / 2 {
            *h = Complex64::new(0.0, 0.0);
            continue;
        }
        let k = wavenumber(j, n, domain_len);
        *h *= Complex64::new(0.0, k);
    }
    fft_inverse(&mut hat);
    hat.iter().map(|c| c.re).collect()
}

/// Solves `(a + b*(-Laplacian)) x = rhs` in Fourier space (both operators
/// diagonal there). Used by the semi-implicit ground-state flow.
pub fn solve_helmholtz(rhs: &[f64], a: f64, b: f64, domain_len: f64) -> Vec<f64> {
    let n = rhs.len();
    let mut hat = to_complex(rhs);
    fft_forward(&mut hat);
    for (j, h) in hat.iter_mut().enumerate() {
        let k = wavenumber(j, n, domain_len);
        *h /= a + b * k * k;
    }
    fft_inverse(&mut hat);
    hat.iter().map(|c| c.re).collect()
}

/// First column of the circulant matrix representing the spectral second
/// derivative on an `n`-point periodic grid of length `domain_len`. Entry
/// `(i, j)` of the full matrix is `column[(i - j) mod n]`; the symbol is
/// real and even so the matrix is exactly symmetric.
pub fn laplacian_circulant_column(n: usize, domain_len: f64) -> Vec<f64> {
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    laplacian(&e0, domain_len)
}

/// Trigonometric interpolation of periodic samples from `n` points to
/// `n_out >= n` points by zero-padding the discrete spectrum. When `n` is
/// even the Nyquist coefficient is split evenly between the `+n/2` and
/// `-n/2` bins, which keeps the result real.
pub fn fourier_interp(v: &[f64], n_out: usize) -> Result<Vec<f64>> {
    let n = v.len();
    if n_out < n {
        return Err(Error::InvalidConfig(format!(
            "fourier_interp: target length {n_out} < input length {n}"
        )));
    }
    if n_out == n {
        return Ok(v.to_vec());
    }
    let mut hat = to_complex(v);
    fft_forward(&mut hat);
    let mut padded = vec![Complex64::new(0.0, 0.0); n_out];
    let half = n / 2;
    if n % 2 == 0 {
        for j in 0..half {
            padded[j] = hat[j];
        }
        padded[half] = 0.5 * hat[half];
        padded[n_out - half] = 0.5 * hat[half];
        for j in 1..half {
            padded[n_out - j] = hat[n - j];
        }
    } else {
        for j in 0..=half {
            padded[j] = hat[j];
        }
        for j in 1..=half {
            padded[n_out - j] = hat[n - j];
        }
    }
    fft_inverse(&mut padded);
    let scale = n_out as f64 / n as f64;
    Ok(padded.iter().map(|c| c.re * scale).collect())
}

/// Two-dimensional trigonometric interpolation on a square periodic grid,
/// applied dimension by dimension. `v` is row-major `n x n`.
pub fn fourier_interp_2d(v: &[f64], n: usize, n_out: usize) -> Result<Vec<f64>> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "fourier_interp_2d: expected {} values, got {}",
            n * n,
            v.len()
        )));
    }
    // interpolate rows, then columns
    let mut rows = vec![0.0; n * n_out];
    for i in 0..n {
        let out = fourier_interp(&v[i * n..(i + 1) * n], n_out)?;
        rows[i * n_out..(i + 1) * n_out].copy_from_slice(&out);
    }
    let mut full = vec![0.0; n_out * n_out];
    let mut col = vec![0.0; n];
    for j in 0..n_out {
        for i in 0..n {
            col[i] = rows[i * n_out + j];
        }
        let out = fourier_interp(&col, n_out)?;
        for i in 0..n_out {
            full[i * n_out + j] = out[i];
        }
    }
    Ok(full)
}
