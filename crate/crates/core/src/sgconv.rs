//! Multi-scale global convolution. The kernel is concatenated from
//! log-many sub-kernels, each interpolated to double the length of the
//! previous one and damped by a decay factor, then cut to the sequence
//! length. Parameters therefore grow logarithmically with the sequence
//! while the instantiated kernel grows linearly; [`MemoryLedger`] records
//! both counts.

use crate::fft::linear_convolve;
use crate::mat::RealMat;
use crate::mixers::{Mixer, ParamKind, Taxonomy};
use crate::seq::Seq;
use crate::{Error, Result};

/// Number of sub-kernels for sequence length `len` and sub-kernel rows `k`:
/// the smallest `e` with `k * 2^e >= len`, plus one.
pub fn scale_count(len: usize, k: usize) -> usize {
    let mut e = 0usize;
    while (k << e) < len {
        e += 1;
    }
    e + 1
}

/// `s` sub-kernels of `k x dim` weights plus the per-scale decay.
#[derive(Debug, Clone, PartialEq)]
pub struct SgconvParams {
    k: usize,
    dim: usize,
    bound_len: usize,
    sub_weights: Vec<RealMat>,
    decay: f64,
}

impl SgconvParams {
    /// Builds from explicit sub-kernel weights; the count must match the
    /// scale formula for `bound_len`.
    pub fn from_sub_weights(
        k: usize,
        bound_len: usize,
        sub_weights: Vec<RealMat>,
        decay: f64,
    ) -> Result<Self> {
        if k == 0 || bound_len < k {
            return Err(Error::Parameter(format!(
                "need 1 <= k <= len, got k={k}, len={bound_len}"
            )));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::Parameter(format!("decay must be in (0, 1], got {decay}")));
        }
        let s = scale_count(bound_len, k);
        if sub_weights.len() != s {
            return Err(Error::Parameter(format!(
                "expected {s} sub-kernels for len {bound_len}, k {k}; got {}",
                sub_weights.len()
            )));
        }
        let dim = sub_weights[0].cols();
        for (i, w) in sub_weights.iter().enumerate() {
            if w.rows() != k || w.cols() != dim {
                return Err(Error::Shape(format!(
                    "sub-kernel {i} is {}x{}, expected {k}x{dim}",
                    w.rows(),
                    w.cols()
                )));
            }
        }
        Ok(Self { k, dim, bound_len, sub_weights, decay })
    }

    /// Seeded standard-normal sub-kernels.
    pub fn seeded(k: usize, dim: usize, bound_len: usize, decay: f64, seed: u64) -> Result<Self> {
        let s = scale_count(bound_len.max(k), k.max(1));
        let sub_weights = (0..s)
            .map(|i| RealMat::standard_normal(k, dim, seed.wrapping_add(i as u64)))
            .collect();
        Self::from_sub_weights(k, bound_len, sub_weights, decay)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scales(&self) -> usize {
        self.sub_weights.len()
    }

    /// Total stored parameter elements, `s * k * dim`.
    pub fn param_elements(&self) -> usize {
        self.scales() * self.k * self.dim
    }
}

/// Element counts behind the memory claim: parameters in the log-sized
/// store versus the linear-sized transient kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryLedger {
    pub len: usize,
    pub scales: usize,
    pub param_elements: usize,
    pub kernel_elements: usize,
}

/// Linear row interpolation of a `k x dim` block to `target` rows, with
/// endpoints aligned (so equal lengths copy exactly).
fn interpolate_rows(w: &RealMat, target: usize) -> RealMat {
    let k = w.rows();
    let mut out = RealMat::zeros(target, w.cols());
    for i in 0..target {
        let pos = if target == 1 || k == 1 {
            0.0
        } else {
            i as f64 * (k - 1) as f64 / (target - 1) as f64
        };
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(k - 1);
        let frac = pos - lo as f64;
        for j in 0..w.cols() {
            let v = w.get(lo, j) * (1.0 - frac) + w.get(hi, j) * frac;
            out.set(i, j, v);
        }
    }
    out
}

/// Instantiates the full `len x dim` kernel: sub-kernel `i` is interpolated
/// to `k * 2^i` rows, scaled by `decay^i`, concatenated in order, and the
/// result cut (or zero-padded) to exactly `len` rows.
pub fn build_kernel(p: &SgconvParams, len: usize) -> Result<(RealMat, MemoryLedger)> {
    if len < p.k {
        return Err(Error::Parameter(format!(
            "sequence length {len} is shorter than sub-kernel rows {}",
            p.k
        )));
    }
    let mut kernel = RealMat::zeros(len, p.dim);
    let mut row = 0usize;
    for (i, w) in p.sub_weights.iter().enumerate() {
        if row >= len {
            break;
        }
        let target = p.k << i;
        let block = interpolate_rows(w, target).scale(p.decay.powi(i as i32));
        let take = target.min(len - row);
        for r in 0..take {
            kernel.row_mut(row + r).copy_from_slice(block.row(r));
        }
        row += take;
    }
    let ledger = MemoryLedger {
        len,
        scales: p.scales(),
        param_elements: p.param_elements(),
        kernel_elements: len * p.dim,
    };
    Ok((kernel, ledger))
}

/// Causal FFT convolution of each column with its kernel column: transform
/// kernel, transform input, multiply, invert, with the tail discarded.
pub fn sgconv_mix(x: &Seq, p: &SgconvParams) -> Result<Seq> {
    if x.dim() != p.dim {
        return Err(Error::Shape(format!(
            "sequence width {} does not match kernel width {}",
            x.dim(),
            p.dim
        )));
    }
    let (kernel, _) = build_kernel(p, x.len())?;
    let mut out = RealMat::zeros(x.len(), x.dim());
    for j in 0..x.dim() {
        let col = x.values().column(j);
        let full = linear_convolve(&kernel.column(j), &col);
        out.set_column(j, &full[..x.len()]);
    }
    Seq::new(out)
}

/// One [`MemoryLedger`] per sweep length, without touching any sequence
/// data; the parameter store is re-derived per length as the scale count
/// changes.
pub fn memory_audit(k: usize, dim: usize, sweep: &[usize]) -> Result<Vec<MemoryLedger>> {
    sweep
        .iter()
        .map(|&len| {
            let p = SgconvParams::seeded(k, dim, len, 0.5, 0)?;
            Ok(MemoryLedger {
                len,
                scales: p.scales(),
                param_elements: p.param_elements(),
                kernel_elements: len * dim,
            })
        })
        .collect()
}

/// Multi-scale convolution behind the common interface; the kernel is
/// rebuilt on every call.
#[derive(Debug, Clone)]
pub struct SgconvMixer(pub SgconvParams);

impl Mixer for SgconvMixer {
    fn name(&self) -> &'static str {
        "sgconv"
    }

    fn taxonomy(&self) -> Taxonomy {
        Taxonomy::new(ParamKind::Learned, false)
    }

    fn mix(&self, x: &Seq) -> Result<Seq> {
        sgconv_mix(x, &self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_count_formula() {
        assert_eq!(scale_count(1024, 16), 7); // ceil(log2(64)) + 1
        assert_eq!(scale_count(16, 16), 1);
        assert_eq!(scale_count(17, 16), 2);
        for e in 1..8 {
            assert_eq!(scale_count(64 << e, 16), scale_count(64 << (e - 1), 16) + 1);
        }
    }

    #[test]
    fn single_scale_kernel_is_the_weights() {
        let w = RealMat::standard_normal(8, 2, 60);
        let p = SgconvParams::from_sub_weights(8, 8, vec![w.clone()], 0.5).unwrap();
        let (kernel, ledger) = build_kernel(&p, 8).unwrap();
        assert_eq!(kernel, w);
        assert_eq!(ledger.param_elements, 16);
        assert_eq!(ledger.kernel_elements, 16);
    }

    #[test]
    fn constant_weights_make_piecewise_constant_decaying_blocks() {
        let k = 16;
        let len = 256;
        let s = scale_count(len, k);
        assert_eq!(s, 5);
        let ones = RealMat::from_vec(k, 1, vec![1.0; k]).unwrap();
        let p = SgconvParams::from_sub_weights(k, len, vec![ones; s], 0.5).unwrap();
        let (kernel, _) = build_kernel(&p, len).unwrap();
        let mut row = 0;
        for i in 0..s {
            let expect = 0.5f64.powi(i as i32);
            let block = (k << i).min(len - row);
            for r in 0..block {
                assert_eq!(kernel.get(row + r, 0), expect, "scale {i} row {r}");
            }
            row += block;
            if row == len {
                break;
            }
        }
        assert_eq!(row, len);
    }

    #[test]
    fn delta_kernel_reproduces_the_input() {
        let k = 4;
        let len = 32;
        let s = scale_count(len, k);
        let mut first = RealMat::zeros(k, 3);
        for j in 0..3 {
            first.set(0, j, 1.0);
        }
        let mut subs = vec![RealMat::zeros(k, 3); s];
        subs[0] = first;
        let p = SgconvParams::from_sub_weights(k, len, subs, 0.5).unwrap();
        let x = Seq::standard_normal(len, 3, 61).unwrap();
        let y = sgconv_mix(&x, &p).unwrap();
        assert!(y.max_abs_diff(&x).unwrap() < 1e-12);
    }

    #[test]
    fn audit_matches_formula_arithmetic() {
        let ledgers = memory_audit(16, 1, &[1024, 2048]).unwrap();
        assert_eq!(ledgers[0].scales, 7);
        assert_eq!(ledgers[0].param_elements, 112);
        assert_eq!(ledgers[1].scales, 8);
        assert_eq!(ledgers[1].param_elements, 128);
        assert_eq!(ledgers[1].param_elements - ledgers[0].param_elements, 16);
        assert_eq!(ledgers[0].kernel_elements, 1024);
    }

    #[test]
    fn parameter_share_of_kernel_memory_vanishes_with_length() {
        let sweep: Vec<usize> = (6..=13).map(|e| 1usize << e).collect();
        let ledgers = memory_audit(16, 1, &sweep).unwrap();
        let ratios: Vec<f64> = ledgers
            .iter()
            .map(|l| l.param_elements as f64 / l.kernel_elements as f64)
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
        assert!(*ratios.last().unwrap() < 0.05 * ratios[0]);
    }

    #[test]
    fn decay_makes_block_magnitudes_non_increasing() {
        let k = 8;
        let len = 128;
        let s = scale_count(len, k);
        let ones = RealMat::from_vec(k, 2, vec![1.0; k * 2]).unwrap();
        let p = SgconvParams::from_sub_weights(k, len, vec![ones; s], 0.7).unwrap();
        let (kernel, _) = build_kernel(&p, len).unwrap();
        let mut prev = f64::INFINITY;
        let mut row = 0;
        for i in 0..s {
            let block = (k << i).min(len - row);
            if block == 0 {
                break;
            }
            let mut mean = 0.0;
            for r in 0..block {
                mean += kernel.row(row + r).iter().map(|v| v.abs()).sum::<f64>();
            }
            mean /= (block * 2) as f64;
            assert!(mean <= prev + 1e-12, "scale {i}");
            prev = mean;
            row += block;
        }
    }

    #[test]
    fn too_short_sequences_are_rejected() {
        let p = SgconvParams::seeded(16, 1, 64, 0.5, 0).unwrap();
        assert!(matches!(build_kernel(&p, 8), Err(Error::Parameter(_))));
    }
}
