//! Dense row-major real and complex matrices with deterministic arithmetic.
//!
//! Products accumulate over the shared index in ascending order, so results
//! are bit-reproducible across runs for identical inputs.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMat {
    /// Zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds from row-major data; the length must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested rows; rows must be nonempty and equally long.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Seeded standard-normal matrix; identical bytes for identical seeds.
    pub fn standard_normal(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows, "column length");
        for (i, &v) in values.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    /// Copies the column block `[c0, c1)`.
    pub fn col_block(&self, c0: usize, c1: usize) -> Self {
        let mut out = Self::zeros(self.rows, c1 - c0);
        for i in 0..self.rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[c0..c1]);
        }
        out
    }

    /// Copies the row block `[r0, r1)`.
    pub fn row_block(&self, r0: usize, r1: usize) -> Self {
        let data = self.data[r0 * self.cols..r1 * self.cols].to_vec();
        Self { rows: r1 - r0, cols: self.cols, data }
    }

    /// Writes `block` at `(r0, c0)`.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &RealMat) {
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| v * a)
    }

    pub fn add(&self, other: &RealMat) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Standard product; for each output element the shared index is summed
    /// in ascending order.
    pub fn matmul(&self, other: &RealMat) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in a_row.iter().enumerate() {
                let b_row = other.row(k);
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &RealMat) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot compare {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dense row-major matrix of `Complex64`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(m: &RealMat) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[Complex64]) {
        assert_eq!(values.len(), self.rows, "column length");
        for (i, &v) in values.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    /// Real part as a `RealMat`.
    pub fn re(&self) -> RealMat {
        RealMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.re).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * a).collect(),
        }
    }

    pub fn matmul(&self, other: &ComplexMat) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in a_row.iter().enumerate() {
                let b_row = other.row(k);
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &ComplexMat) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot compare {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
///
/// `B` may carry any number of right-hand-side columns. A vanishing pivot
/// reports the pivot-ratio condition estimate gathered so far.
pub fn solve(a: &RealMat, b: &RealMat) -> Result<RealMat> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape(format!("system matrix is {}x{}, not square", a.rows(), a.cols())));
    }
    if b.rows() != n {
        return Err(Error::Shape(format!(
            "right-hand side is {}x{}, expected {n} rows",
            b.rows(),
            b.cols()
        )));
    }
    let mut lhs = a.clone();
    let mut rhs = b.clone();
    let scale = lhs.max_abs();
    let mut pivot_min = f64::INFINITY;
    let mut pivot_max: f64 = 0.0;
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, lhs.get(i, k)))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("nonempty pivot search");
        if pivot.abs() <= f64::EPSILON * scale {
            let cond = if pivot_min > 0.0 { pivot_max / pivot_min } else { f64::INFINITY };
            return Err(Error::Numeric(format!(
                "singular system matrix: pivot {:.3e} at column {k} (pivot-ratio condition estimate {:.3e})",
                pivot.abs(),
                cond
            )));
        }
        pivot_min = pivot_min.min(pivot.abs());
        pivot_max = pivot_max.max(pivot.abs());
        if p != k {
            for j in 0..n {
                let (x, y) = (lhs.get(k, j), lhs.get(p, j));
                lhs.set(k, j, y);
                lhs.set(p, j, x);
            }
            for j in 0..rhs.cols() {
                let (x, y) = (rhs.get(k, j), rhs.get(p, j));
                rhs.set(k, j, y);
                rhs.set(p, j, x);
            }
        }
        for i in k + 1..n {
            let factor = lhs.get(i, k) / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                let v = lhs.get(i, j) - factor * lhs.get(k, j);
                lhs.set(i, j, v);
            }
            for j in 0..rhs.cols() {
                let v = rhs.get(i, j) - factor * rhs.get(k, j);
                rhs.set(i, j, v);
            }
        }
    }
    let mut out = RealMat::zeros(n, rhs.cols());
    for j in 0..rhs.cols() {
        for i in (0..n).rev() {
            let mut acc = rhs.get(i, j);
            for k in i + 1..n {
                acc -= lhs.get(i, k) * out.get(k, j);
            }
            out.set(i, j, acc / lhs.get(i, i));
        }
    }
    Ok(out)
}
