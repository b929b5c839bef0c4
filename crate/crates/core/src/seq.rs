//! The universal input/output of every mixer: a real `L x D` token matrix.

use crate::mat::RealMat;
use crate::{Error, Result};

/// A sequence of `len()` tokens, each an embedding row of width `dim()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Seq {
    values: RealMat,
}

impl Seq {
    /// Wraps a token matrix; both dimensions must be at least 1.
    pub fn new(values: RealMat) -> Result<Self> {
        if values.rows() == 0 || values.cols() == 0 {
            return Err(Error::Shape(format!(
                "a sequence needs at least one token and one dimension, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        Ok(Self { values })
    }

    /// Seeded standard-normal sequence.
    pub fn standard_normal(len: usize, dim: usize, seed: u64) -> Result<Self> {
        Self::new(RealMat::standard_normal(len, dim, seed))
    }

    /// Token count `L`.
    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        false // L >= 1 by construction
    }

    /// Embedding width `D`.
    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &RealMat {
        &self.values
    }

    pub fn into_values(self) -> RealMat {
        self.values
    }

    pub fn token(&self, t: usize) -> &[f64] {
        self.values.row(t)
    }

    pub fn max_abs_diff(&self, other: &Seq) -> Result<f64> {
        self.values.max_abs_diff(&other.values)
    }
}
