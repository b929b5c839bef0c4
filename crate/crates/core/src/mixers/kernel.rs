//! Kernelized attention: the score matrix is replaced by a positive kernel
//! Gram matrix factored through a feature map, `phi(X) (phi(X)^T X)`. Right
//! association makes the cost linear in sequence length; the explicit
//! Gram-matrix route exists as the quadratic reference.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::mat::RealMat;
use crate::mixers::{Mixer, ParamKind, Taxonomy};
use crate::seq::Seq;
use crate::{Error, Result};

/// Nonnegative feature maps, so kernel values are positive and the
/// row-normalized mix is well defined.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    /// `elu(x) + 1` elementwise; feature width equals the embedding width.
    EluPlusOne,
    /// Positive random features `exp(w_r . x - |x|^2 / 2) / sqrt(count)`
    /// with seeded standard-normal projection rows.
    RandomFeatures { count: usize, seed: u64 },
}

impl FeatureMap {
    /// Feature matrix `phi(X)`, one row per token, entries >= 0.
    pub fn apply(&self, x: &Seq) -> Result<RealMat> {
        let features = match self {
            FeatureMap::EluPlusOne => x.values().map(|v| {
                if v > 0.0 {
                    v + 1.0
                } else {
                    v.exp() // elu(v) + 1 for v <= 0
                }
            }),
            FeatureMap::RandomFeatures { count, seed } => {
                if *count == 0 {
                    return Err(Error::Parameter("random feature count must be at least 1".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut proj = RealMat::zeros(*count, x.dim());
                for i in 0..*count {
                    for j in 0..x.dim() {
                        proj.set(i, j, StandardNormal.sample(&mut rng));
                    }
                }
                let norm = 1.0 / (*count as f64).sqrt();
                let mut out = RealMat::zeros(x.len(), *count);
                for t in 0..x.len() {
                    let token = x.token(t);
                    let sq_norm: f64 = token.iter().map(|v| v * v).sum();
                    for r in 0..*count {
                        let dot: f64 = proj.row(r).iter().zip(token).map(|(w, v)| w * v).sum();
                        out.set(t, r, (dot - 0.5 * sq_norm).exp() * norm);
                    }
                }
                out
            }
        };
        if !features.is_finite() {
            return Err(Error::Numeric("feature map produced non-finite values".into()));
        }
        Ok(features)
    }
}

fn normalize_rows(mixed: &mut RealMat, features: &RealMat) -> Result<()> {
    // Row sums of the kernel matrix: phi_t . (sum_j phi_j).
    let mut col_sums = vec![0.0; features.cols()];
    for t in 0..features.rows() {
        for (acc, &v) in col_sums.iter_mut().zip(features.row(t)) {
            *acc += v;
        }
    }
    for t in 0..mixed.rows() {
        let denom: f64 = features.row(t).iter().zip(&col_sums).map(|(a, b)| a * b).sum();
        if !denom.is_finite() || denom <= 0.0 {
            return Err(Error::Numeric(format!(
                "kernel row {t} has non-positive normalizer {denom}"
            )));
        }
        for v in mixed.row_mut(t) {
            *v /= denom;
        }
    }
    Ok(())
}

/// Kernel mixing with right association: `phi(X) (phi(X)^T X)`, linear in
/// the token count. With `normalize`, each output row is divided by its
/// kernel row sum.
pub fn kernel_attention_mix(x: &Seq, fm: &FeatureMap, normalize: bool) -> Result<Seq> {
    let features = fm.apply(x)?;
    let projected = features.transpose().matmul(x.values())?;
    let mut mixed = features.matmul(&projected)?;
    if normalize {
        normalize_rows(&mut mixed, &features)?;
    }
    Seq::new(mixed)
}

/// The quadratic reference: materialize the kernel Gram matrix
/// `phi(X) phi(X)^T` and multiply by the sequence.
pub fn kernel_attention_mix_gram(x: &Seq, fm: &FeatureMap, normalize: bool) -> Result<Seq> {
    let features = fm.apply(x)?;
    let gram = features.matmul(&features.transpose())?;
    let mut mixed = gram.matmul(x.values())?;
    if normalize {
        for t in 0..mixed.rows() {
            let denom: f64 = gram.row(t).iter().sum();
            if !denom.is_finite() || denom <= 0.0 {
                return Err(Error::Numeric(format!(
                    "kernel row {t} has non-positive normalizer {denom}"
                )));
            }
            for v in mixed.row_mut(t) {
                *v /= denom;
            }
        }
    }
    Seq::new(mixed)
}

/// Normalized kernel mixing behind the common interface.
#[derive(Debug, Clone)]
pub struct KernelAttentionMixer(pub FeatureMap);

impl Mixer for KernelAttentionMixer {
    fn name(&self) -> &'static str {
        "kernel-attn"
    }

    fn taxonomy(&self) -> Taxonomy {
        // The feature map is fixed here (nothing is trained), but the mixing
        // weights still come from the tokens themselves.
        Taxonomy::new(ParamKind::Fixed, true)
    }

    fn mix(&self, x: &Seq) -> Result<Seq> {
        kernel_attention_mix(x, &self.0, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_maps_are_nonnegative() {
        let x = Seq::standard_normal(24, 6, 20).unwrap();
        for fm in [FeatureMap::EluPlusOne, FeatureMap::RandomFeatures { count: 16, seed: 3 }] {
            let f = fm.apply(&x).unwrap();
            assert!(f.data().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn single_token_returns_itself_when_normalized() {
        let x = Seq::standard_normal(1, 5, 21).unwrap();
        let y = kernel_attention_mix(&x, &FeatureMap::EluPlusOne, true).unwrap();
        assert!(y.max_abs_diff(&x).unwrap() < 1e-12);
    }

    #[test]
    fn zero_random_features_are_rejected() {
        let x = Seq::standard_normal(4, 3, 23).unwrap();
        let fm = FeatureMap::RandomFeatures { count: 0, seed: 0 };
        assert!(matches!(fm.apply(&x), Err(Error::Parameter(_))));
    }

    #[test]
    fn associations_agree() {
        let x = Seq::standard_normal(32, 8, 22).unwrap();
        for fm in [FeatureMap::EluPlusOne, FeatureMap::RandomFeatures { count: 24, seed: 5 }] {
            for normalize in [false, true] {
                let right = kernel_attention_mix(&x, &fm, normalize).unwrap();
                let left = kernel_attention_mix_gram(&x, &fm, normalize).unwrap();
                assert!(
                    right.max_abs_diff(&left).unwrap() < 1e-8,
                    "{fm:?} normalize={normalize}"
                );
            }
        }
    }
}
