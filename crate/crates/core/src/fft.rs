//! Radix-2 FFT, the quadratic transform it must agree with, and the
//! convolution routines built on top of them.
//!
//! The forward transform is the unnormalized sum `X_k = sum_n x_n w^{kn}`
//! with `w = exp(-2*pi*i / n)`. Power-of-two lengths take the iterative
//! Cooley-Tukey path; every other length falls back to the quadratic
//! Vandermonde evaluation. Twiddle factors are computed from exactly reduced
//! angles, so both paths are deterministic and agree to ~1e-12 relative.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::mat::{ComplexMat, RealMat};
use crate::{Error, Result};

/// Which way the transform runs over a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DftAxis {
    /// Transform each row; the transform length is the column count.
    EachRow,
    /// Transform each column; the transform length is the row count.
    EachColumn,
}

/// Precomputed plan for one power-of-two length.
pub struct Fft {
    n: usize,
    /// Forward twiddles `w^j` for `j < n/2`.
    twiddles: Vec<Complex64>,
}

impl Fft {
    /// `n` must be a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
        let twiddles = (0..n / 2)
            .map(|j| {
                let angle = -2.0 * PI * j as f64 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        Self { n, twiddles }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place unnormalized forward transform.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "buffer length");
        let n = self.n;
        if n <= 1 {
            return;
        }
        // Bit-reversal permutation, then butterflies of doubling width.
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut width = 2;
        while width <= n {
            let half = width / 2;
            let stride = n / width;
            for start in (0..n).step_by(width) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            width *= 2;
        }
    }

    /// In-place inverse of [`Fft::forward`], including the `1/n` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

/// Quadratic forward transform for any length; the oracle the FFT path is
/// checked against, and the fallback for non-power-of-two lengths.
pub fn naive_dft(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &x) in input.iter().enumerate() {
            // Reduce k*j mod n before forming the angle to keep it exact.
            let angle = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
            acc += x * Complex64::new(angle.cos(), angle.sin());
        }
        out.push(acc);
    }
    out
}

/// Quadratic inverse of [`naive_dft`], including the `1/n` factor.
pub fn naive_idft(input: &[Complex64]) -> Vec<Complex64> {
    let n = input.len();
    let conj: Vec<Complex64> = input.iter().map(|v| v.conj()).collect();
    naive_dft(&conj)
        .into_iter()
        .map(|v| v.conj() / n as f64)
        .collect()
}

fn transform_vector(buf: &mut Vec<Complex64>, inverse: bool) {
    if buf.len().is_power_of_two() {
        let plan = Fft::new(buf.len());
        if inverse {
            plan.inverse(buf);
        } else {
            plan.forward(buf);
        }
    } else {
        *buf = if inverse { naive_idft(buf) } else { naive_dft(buf) };
    }
}

fn transform_matrix(m: &ComplexMat, axis: DftAxis, inverse: bool) -> Result<ComplexMat> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::Shape(format!(
            "cannot transform an empty {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let len = match axis {
        DftAxis::EachRow => m.cols(),
        DftAxis::EachColumn => m.rows(),
    };
    // One plan for every lane; the twiddle table dominates setup cost.
    let plan = len.is_power_of_two().then(|| Fft::new(len));
    let apply = |buf: &mut Vec<Complex64>| match &plan {
        Some(plan) if inverse => plan.inverse(buf),
        Some(plan) => plan.forward(buf),
        None => transform_vector(buf, inverse),
    };
    let mut out = m.clone();
    match axis {
        DftAxis::EachRow => {
            for i in 0..m.rows() {
                let mut buf = m.row(i).to_vec();
                apply(&mut buf);
                out.row_mut(i).copy_from_slice(&buf);
            }
        }
        DftAxis::EachColumn => {
            for j in 0..m.cols() {
                let mut buf = m.column(j);
                apply(&mut buf);
                out.set_column(j, &buf);
            }
        }
    }
    Ok(out)
}

/// Unnormalized forward transform along the chosen axis. Power-of-two
/// lengths use the FFT; other lengths the quadratic path.
pub fn dft(m: &ComplexMat, axis: DftAxis) -> Result<ComplexMat> {
    transform_matrix(m, axis, false)
}

/// Inverse of [`dft`], including the `1/n` factor per transform.
pub fn idft(m: &ComplexMat, axis: DftAxis) -> Result<ComplexMat> {
    transform_matrix(m, axis, true)
}

/// The `n x n` matrix `V[j][k] = norm * w^{jk}` with `w = exp(-2*pi*i/n)`;
/// multiplying by it performs the transform explicitly.
pub fn vandermonde(n: usize, norm: f64) -> ComplexMat {
    let mut m = ComplexMat::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let angle = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
            m.set(j, k, Complex64::new(angle.cos(), angle.sin()) * norm);
        }
    }
    m
}

/// Circular convolution of two equal-length real vectors: transform both,
/// multiply pointwise, invert.
pub fn circular_convolve(f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if f.len() != g.len() {
        return Err(Error::Shape(format!(
            "circular convolution needs equal lengths, got {} and {}",
            f.len(),
            g.len()
        )));
    }
    if f.is_empty() {
        return Err(Error::Shape("cannot convolve empty vectors".into()));
    }
    let mut fh: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut gh: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_vector(&mut fh, false);
    transform_vector(&mut gh, false);
    for (a, b) in fh.iter_mut().zip(&gh) {
        *a *= b;
    }
    transform_vector(&mut fh, true);
    Ok(fh.into_iter().map(|v| v.re).collect())
}

/// Linear convolution of two real vectors via a zero-padded power-of-two
/// circular convolution; output length is `f.len() + g.len() - 1`.
pub fn linear_convolve(f: &[f64], g: &[f64]) -> Vec<f64> {
    assert!(!f.is_empty() && !g.is_empty(), "cannot convolve empty vectors");
    let out_len = f.len() + g.len() - 1;
    let n = out_len.next_power_of_two();
    let plan = Fft::new(n);
    let mut fh = vec![Complex64::new(0.0, 0.0); n];
    let mut gh = vec![Complex64::new(0.0, 0.0); n];
    for (dst, &v) in fh.iter_mut().zip(f) {
        *dst = Complex64::new(v, 0.0);
    }
    for (dst, &v) in gh.iter_mut().zip(g) {
        *dst = Complex64::new(v, 0.0);
    }
    plan.forward(&mut fh);
    plan.forward(&mut gh);
    for (a, b) in fh.iter_mut().zip(&gh) {
        *a *= b;
    }
    plan.inverse(&mut fh);
    fh.truncate(out_len);
    fh.into_iter().map(|v| v.re).collect()
}

/// Embeds a real matrix, useful for driving [`dft`] from sequence data.
pub fn complex_from_real(m: &RealMat) -> ComplexMat {
    ComplexMat::from_real(m)
}
