//! Threshold token pruning ahead of any mixer: score each token, keep the
//! ones at or above the threshold in their original order, and never return
//! an empty sequence.

use crate::mat::RealMat;
use crate::seq::Seq;
use crate::{Error, Result};

/// How a token's score is computed.
#[derive(Debug, Clone, PartialEq)]
pub enum Scorer {
    /// Euclidean norm of the embedding row.
    L2Norm,
    /// `|row . weights|` against a fixed direction.
    Projection { weights: Vec<f64> },
}

impl Scorer {
    /// A seeded standard-normal projection direction, scaled by
    /// `1/sqrt(dim)`.
    pub fn projection_seeded(dim: usize, seed: u64) -> Self {
        let w = RealMat::standard_normal(1, dim, seed).scale(1.0 / (dim as f64).sqrt());
        Scorer::Projection { weights: w.row(0).to_vec() }
    }

    fn score(&self, token: &[f64]) -> Result<f64> {
        match self {
            Scorer::L2Norm => Ok(token.iter().map(|v| v * v).sum::<f64>().sqrt()),
            Scorer::Projection { weights } => {
                if weights.len() != token.len() {
                    return Err(Error::Shape(format!(
                        "projection direction has {} entries for width-{} tokens",
                        weights.len(),
                        token.len()
                    )));
                }
                Ok(token.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>().abs())
            }
        }
    }
}

/// Pruning threshold plus scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorConfig {
    pub threshold: f64,
    pub scorer: Scorer,
}

impl SelectorConfig {
    pub fn new(threshold: f64, scorer: Scorer) -> Self {
        Self { threshold, scorer }
    }
}

/// Keeps tokens scoring at or above the threshold, in order. If nothing
/// passes, the single highest-scoring token (first on ties) is kept so
/// downstream mixers never see an empty sequence. Returns the pruned
/// sequence and the kept indices for re-aggregation.
pub fn select(x: &Seq, cfg: &SelectorConfig) -> Result<(Seq, Vec<usize>)> {
    let mut kept = Vec::new();
    let mut best = (0usize, f64::NEG_INFINITY);
    for t in 0..x.len() {
        let s = cfg.scorer.score(x.token(t))?;
        if s >= cfg.threshold {
            kept.push(t);
        }
        if s > best.1 {
            best = (t, s);
        }
    }
    if kept.is_empty() {
        kept.push(best.0);
    }
    let mut out = RealMat::zeros(kept.len(), x.dim());
    for (row, &t) in kept.iter().enumerate() {
        out.row_mut(row).copy_from_slice(x.token(t));
    }
    Ok((Seq::new(out)?, kept))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_tokens() -> Seq {
        // Row norms 3, 1, 2.
        Seq::new(
            RealMat::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bottomless_threshold_keeps_everything() {
        let x = three_tokens();
        let (y, kept) = select(&x, &SelectorConfig::new(f64::NEG_INFINITY, Scorer::L2Norm)).unwrap();
        assert_eq!(kept, vec![0, 1, 2]);
        assert_eq!(y.values(), x.values());
    }

    #[test]
    fn impossible_threshold_keeps_the_best_token() {
        let x = three_tokens();
        let (y, kept) = select(&x, &SelectorConfig::new(f64::INFINITY, Scorer::L2Norm)).unwrap();
        assert_eq!(kept, vec![0]);
        assert_eq!(y.len(), 1);
        assert_eq!(y.token(0), x.token(0));
    }

    #[test]
    fn mid_threshold_keeps_scores_at_or_above() {
        let x = three_tokens();
        let (_, kept) = select(&x, &SelectorConfig::new(1.5, Scorer::L2Norm)).unwrap();
        assert_eq!(kept, vec![0, 2]);
    }

    #[test]
    fn raising_the_threshold_never_keeps_more() {
        let x = Seq::standard_normal(40, 6, 70).unwrap();
        let mut last = usize::MAX;
        for i in 0..10 {
            let tau = -1.0 + 0.5 * i as f64;
            let (_, kept) = select(&x, &SelectorConfig::new(tau, Scorer::L2Norm)).unwrap();
            assert!(kept.len() <= last);
            assert!(kept.windows(2).all(|w| w[0] < w[1]), "kept order");
            last = kept.len();
        }
    }

    #[test]
    fn mismatched_projection_width_is_a_shape_error() {
        let x = three_tokens();
        let cfg = SelectorConfig::new(0.0, Scorer::Projection { weights: vec![1.0; 5] });
        assert!(matches!(select(&x, &cfg), Err(Error::Shape(_))));
    }

    #[test]
    fn selection_is_idempotent() {
        let x = Seq::standard_normal(50, 4, 71).unwrap();
        let cfg = SelectorConfig::new(1.7, Scorer::projection_seeded(4, 72));
        let (once, kept) = select(&x, &cfg).unwrap();
        let (twice, kept_again) = select(&once, &cfg).unwrap();
        assert_eq!(kept_again.len(), kept.len());
        assert_eq!(once.values(), twice.values());
    }
}
