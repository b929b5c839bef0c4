//! Causal depthwise convolution, as a direct weighted sum, as an explicit
//! banded lower-triangular matrix product, and as an FFT convolution. The
//! three routes must agree and are cross-checked in tests and `verify`.

use crate::fft::linear_convolve;
use crate::mat::RealMat;
use crate::mixers::{Mixer, ParamKind, Taxonomy};
use crate::seq::Seq;
use crate::{Error, Result};

/// A causal depthwise kernel: `Y[t] = sum_k w[k] * X[t-k]` per column, with
/// `X[<0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    weights: Vec<f64>,
}

impl ConvParams {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Parameter("convolution kernel must be nonempty".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Parameter("convolution kernel has non-finite weights".into()));
        }
        Ok(Self { weights })
    }

    pub fn seeded(window: usize, seed: u64) -> Result<Self> {
        Self::new(RealMat::standard_normal(1, window, seed).row(0).to_vec())
    }

    /// Window size `K`.
    pub fn window(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The structured `L x L` weight matrix: lower-triangular with band
    /// `w[0]` on the diagonal down to `w[K-1]` on the (K-1)th subdiagonal.
    pub fn banded_matrix(&self, len: usize) -> RealMat {
        let mut m = RealMat::zeros(len, len);
        for t in 0..len {
            for (k, &w) in self.weights.iter().enumerate() {
                if k <= t {
                    m.set(t, t - k, w);
                }
            }
        }
        m
    }

    fn check_window(&self, len: usize) -> Result<()> {
        if self.window() > len {
            return Err(Error::Parameter(format!(
                "kernel window {} exceeds sequence length {len}",
                self.window()
            )));
        }
        Ok(())
    }
}

/// Direct evaluation of the causal weighted sum, column by column.
pub fn conv_mix(x: &Seq, p: &ConvParams) -> Result<Seq> {
    p.check_window(x.len())?;
    let values = x.values();
    let mut out = RealMat::zeros(x.len(), x.dim());
    for t in 0..x.len() {
        for (k, &w) in p.weights().iter().enumerate() {
            if k > t {
                break;
            }
            let src = values.row(t - k);
            let dst = out.row_mut(t);
            for (o, &v) in dst.iter_mut().zip(src) {
                *o += w * v;
            }
        }
    }
    Seq::new(out)
}

/// The same mixing through the explicit banded-matrix product.
pub fn conv_mix_banded(x: &Seq, p: &ConvParams) -> Result<Seq> {
    p.check_window(x.len())?;
    Seq::new(p.banded_matrix(x.len()).matmul(x.values())?)
}

/// The same mixing through zero-padded FFT convolution per column.
pub fn conv_mix_fft(x: &Seq, p: &ConvParams) -> Result<Seq> {
    p.check_window(x.len())?;
    let mut out = RealMat::zeros(x.len(), x.dim());
    for j in 0..x.dim() {
        let col = x.values().column(j);
        let full = linear_convolve(p.weights(), &col);
        out.set_column(j, &full[..x.len()]);
    }
    Seq::new(out)
}

/// [`conv_mix`] behind the common interface.
#[derive(Debug, Clone)]
pub struct ConvMixer(pub ConvParams);

impl Mixer for ConvMixer {
    fn name(&self) -> &'static str {
        "conv"
    }

    fn taxonomy(&self) -> Taxonomy {
        Taxonomy::new(ParamKind::Learned, false)
    }

    fn mix(&self, x: &Seq) -> Result<Seq> {
        conv_mix(x, &self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_kernel_is_identity() {
        let x = Seq::standard_normal(16, 3, 1).unwrap();
        let p = ConvParams::new(vec![1.0]).unwrap();
        let y = conv_mix(&x, &p).unwrap();
        assert_eq!(x.values(), y.values());
    }

    #[test]
    fn two_tap_kernel_matches_hand_expansion() {
        let (w1, w2) = (0.75, -0.5);
        let x = Seq::new(RealMat::from_rows(&[vec![2.0], vec![3.0], vec![5.0]]).unwrap()).unwrap();
        let p = ConvParams::new(vec![w1, w2]).unwrap();
        let y = conv_mix(&x, &p).unwrap();
        let expect = [w1 * 2.0, w2 * 2.0 + w1 * 3.0, w2 * 3.0 + w1 * 5.0];
        for (t, e) in expect.iter().enumerate() {
            assert!((y.values().get(t, 0) - e).abs() < 1e-15);
        }
    }

    #[test]
    fn window_larger_than_sequence_is_rejected() {
        let x = Seq::standard_normal(3, 1, 2).unwrap();
        let p = ConvParams::new(vec![1.0; 4]).unwrap();
        assert!(matches!(conv_mix(&x, &p), Err(Error::Parameter(_))));
    }

    #[test]
    fn three_routes_agree() {
        let x = Seq::standard_normal(64, 4, 3).unwrap();
        let p = ConvParams::seeded(8, 4).unwrap();
        let direct = conv_mix(&x, &p).unwrap();
        let banded = conv_mix_banded(&x, &p).unwrap();
        let fft = conv_mix_fft(&x, &p).unwrap();
        assert!(direct.max_abs_diff(&banded).unwrap() < 1e-12);
        assert!(direct.max_abs_diff(&fft).unwrap() < 1e-10);
    }

    #[test]
    fn interior_translation_equivariance() {
        let x = Seq::standard_normal(32, 2, 5).unwrap();
        let p = ConvParams::seeded(4, 6).unwrap();
        let y = conv_mix(&x, &p).unwrap();
        // Shift input down one step with a zero first row.
        let mut shifted = RealMat::zeros(32, 2);
        for t in 1..32 {
            shifted.row_mut(t).copy_from_slice(x.values().row(t - 1));
        }
        let ys = conv_mix(&Seq::new(shifted).unwrap(), &p).unwrap();
        for t in p.window()..32 {
            for j in 0..2 {
                assert_eq!(ys.values().get(t, j), y.values().get(t - 1, j));
            }
        }
    }
}
