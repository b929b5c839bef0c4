//! Parameterless Fourier mixing: one transform over the embedding axis, one
//! over the sequence axis, real part kept, each axis normalized by the
//! square root of its length. The two transforms commute, and the explicit
//! matrix route exists as the reference for the FFT route.

use crate::fft::{complex_from_real, dft, vandermonde, DftAxis};
use crate::mixers::{Mixer, ParamKind, Taxonomy};
use crate::seq::Seq;
use crate::Result;

fn fnet_mix_ordered(x: &Seq, sequence_first: bool) -> Result<Seq> {
    let scale = 1.0 / ((x.len() as f64).sqrt() * (x.dim() as f64).sqrt());
    let c = complex_from_real(x.values());
    let transformed = if sequence_first {
        dft(&dft(&c, DftAxis::EachColumn)?, DftAxis::EachRow)?
    } else {
        dft(&dft(&c, DftAxis::EachRow)?, DftAxis::EachColumn)?
    };
    Seq::new(transformed.scale(scale).re())
}

/// Embedding-axis transform, then sequence-axis transform, real part.
pub fn fnet_mix(x: &Seq) -> Result<Seq> {
    fnet_mix_ordered(x, false)
}

/// The two transforms in the opposite order; the output must match
/// [`fnet_mix`] because the axis transforms commute.
pub fn fnet_mix_sequence_first(x: &Seq) -> Result<Seq> {
    fnet_mix_ordered(x, true)
}

/// The reference route: materialize the normalized transform matrices for
/// both axes and multiply, `Re{ F_seq . X . F_emb }`.
pub fn fnet_mix_vandermonde(x: &Seq) -> Result<Seq> {
    let (l, d) = (x.len(), x.dim());
    let f_emb = vandermonde(d, 1.0 / (d as f64).sqrt());
    let f_seq = vandermonde(l, 1.0 / (l as f64).sqrt());
    let c = complex_from_real(x.values());
    Seq::new(f_seq.matmul(&c.matmul(&f_emb)?)?.re())
}

/// Fourier mixing behind the common interface.
#[derive(Debug, Clone, Default)]
pub struct FnetMixer;

impl Mixer for FnetMixer {
    fn name(&self) -> &'static str {
        "fnet"
    }

    fn taxonomy(&self) -> Taxonomy {
        Taxonomy::new(ParamKind::Fixed, false)
    }

    fn mix(&self, x: &Seq) -> Result<Seq> {
        fnet_mix(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::RealMat;

    #[test]
    fn constant_input_concentrates_at_the_origin() {
        let c = 1.75;
        let x = Seq::new(RealMat::from_vec(8, 4, vec![c; 32]).unwrap()).unwrap();
        let y = fnet_mix(&x).unwrap();
        let expected = c * (8.0f64 * 4.0).sqrt();
        assert!((y.values().get(0, 0) - expected).abs() < 1e-9);
        for t in 0..8 {
            for j in 0..4 {
                if (t, j) != (0, 0) {
                    assert!(y.values().get(t, j).abs() < 1e-9, "({t},{j}) leaked");
                }
            }
        }
    }

    #[test]
    fn transform_order_does_not_matter() {
        let x = Seq::standard_normal(32, 8, 40).unwrap();
        let a = fnet_mix(&x).unwrap();
        let b = fnet_mix_sequence_first(&x).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn fft_route_matches_matrix_route() {
        let x = Seq::standard_normal(64, 16, 41).unwrap();
        let fast = fnet_mix(&x).unwrap();
        let explicit = fnet_mix_vandermonde(&x).unwrap();
        assert!(fast.max_abs_diff(&explicit).unwrap() < 1e-10);
    }

    #[test]
    fn non_power_of_two_lengths_fall_back_cleanly() {
        let x = Seq::standard_normal(12, 5, 42).unwrap();
        let fast = fnet_mix(&x).unwrap();
        let explicit = fnet_mix_vandermonde(&x).unwrap();
        assert!(fast.max_abs_diff(&explicit).unwrap() < 1e-10);
    }
}
