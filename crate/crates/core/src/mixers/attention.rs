//! Full pairwise attention: per-token query/key scores, optional row-wise
//! softmax, and a weighted average of value projections. No masking and no
//! score scaling. The Gram-matrix form regroups the same product so the two
//! routes can be checked against each other.

use crate::mat::RealMat;
use crate::mixers::{Mixer, ParamKind, Taxonomy};
use crate::seq::Seq;
use crate::{Error, Result};

/// Projection weights for (multi-head) attention.
///
/// `w_query`, `w_key`, `w_value` are `D x M` with `M = heads * head_dim`;
/// `w_output` is `M x D` and is applied only on the multi-head path
/// (`heads > 1`). A single head returns the raw weighted values, matching
/// the Gram-form identity.
#[derive(Debug, Clone, PartialEq)]
pub struct AttnParams {
    w_query: RealMat,
    w_key: RealMat,
    w_value: RealMat,
    w_output: RealMat,
    heads: usize,
    head_dim: usize,
}

impl AttnParams {
    pub fn new(
        w_query: RealMat,
        w_key: RealMat,
        w_value: RealMat,
        w_output: RealMat,
        heads: usize,
        head_dim: usize,
    ) -> Result<Self> {
        if heads == 0 || head_dim == 0 {
            return Err(Error::Parameter("heads and head_dim must be at least 1".into()));
        }
        let m = heads * head_dim;
        let d = w_query.rows();
        for (name, w) in [("w_query", &w_query), ("w_key", &w_key), ("w_value", &w_value)] {
            if w.rows() != d || w.cols() != m {
                return Err(Error::Shape(format!(
                    "{name} is {}x{}, expected {d}x{m}",
                    w.rows(),
                    w.cols()
                )));
            }
        }
        if w_output.rows() != m || w_output.cols() != d {
            return Err(Error::Shape(format!(
                "w_output is {}x{}, expected {m}x{d}",
                w_output.rows(),
                w_output.cols()
            )));
        }
        Ok(Self { w_query, w_key, w_value, w_output, heads, head_dim })
    }

    /// Seeded parameters with entries scaled by `1/sqrt(D)` (and the output
    /// projection by `1/sqrt(M)`) to keep score magnitudes moderate.
    pub fn seeded(dim: usize, heads: usize, head_dim: usize, seed: u64) -> Result<Self> {
        let m = heads * head_dim;
        let in_scale = 1.0 / (dim as f64).sqrt();
        let out_scale = 1.0 / (m as f64).sqrt();
        Self::new(
            RealMat::standard_normal(dim, m, seed).scale(in_scale),
            RealMat::standard_normal(dim, m, seed.wrapping_add(1)).scale(in_scale),
            RealMat::standard_normal(dim, m, seed.wrapping_add(2)).scale(in_scale),
            RealMat::standard_normal(m, dim, seed.wrapping_add(3)).scale(out_scale),
            heads,
            head_dim,
        )
    }

    pub fn heads(&self) -> usize {
        self.heads
    }

    pub fn head_dim(&self) -> usize {
        self.head_dim
    }

    /// Model width `D` the parameters project from.
    pub fn dim(&self) -> usize {
        self.w_query.rows()
    }

    pub fn w_query(&self) -> &RealMat {
        &self.w_query
    }

    pub fn w_key(&self) -> &RealMat {
        &self.w_key
    }

    pub fn w_value(&self) -> &RealMat {
        &self.w_value
    }

    pub fn w_output(&self) -> &RealMat {
        &self.w_output
    }

    fn check_input(&self, x: &Seq) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "sequence width {} does not match projection width {}",
                x.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Row-wise softmax stabilized by row-max subtraction. Fails with the row
/// index if exponentiation produces non-finite values.
pub(crate) fn softmax_rows_in_place(scores: &mut RealMat) -> Result<()> {
    for t in 0..scores.rows() {
        let row = scores.row_mut(t);
        let max = row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        if !max.is_finite() {
            return Err(Error::Numeric(format!("attention scores in row {t} are non-finite")));
        }
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        if !sum.is_finite() || sum <= 0.0 {
            return Err(Error::Numeric(format!(
                "softmax normalization failed in row {t} (sum {sum})"
            )));
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

/// Softmaxed `L x L` attention weights of one head; exposed so callers can
/// check row-stochasticity directly.
pub fn attention_weights(x: &Seq, p: &AttnParams, head: usize) -> Result<RealMat> {
    p.check_input(x)?;
    if head >= p.heads {
        return Err(Error::Parameter(format!("head {head} out of range 0..{}", p.heads)));
    }
    let c0 = head * p.head_dim;
    let c1 = c0 + p.head_dim;
    let q = x.values().matmul(&p.w_query)?.col_block(c0, c1);
    let k = x.values().matmul(&p.w_key)?.col_block(c0, c1);
    let mut scores = q.matmul(&k.transpose())?;
    softmax_rows_in_place(&mut scores)?;
    Ok(scores)
}

/// Full attention. With `normalize`, scores go through the row softmax;
/// without it the raw score product weights the values directly. One head
/// returns the weighted values as-is; several heads are concatenated and
/// sent through the output projection.
pub fn attention_mix(x: &Seq, p: &AttnParams, normalize: bool) -> Result<Seq> {
    p.check_input(x)?;
    let q_all = x.values().matmul(&p.w_query)?;
    let k_all = x.values().matmul(&p.w_key)?;
    let v_all = x.values().matmul(&p.w_value)?;
    let mut concat = RealMat::zeros(x.len(), p.heads * p.head_dim);
    for head in 0..p.heads {
        let c0 = head * p.head_dim;
        let c1 = c0 + p.head_dim;
        let q = q_all.col_block(c0, c1);
        let k = k_all.col_block(c0, c1);
        let v = v_all.col_block(c0, c1);
        let mut scores = q.matmul(&k.transpose())?;
        if normalize {
            softmax_rows_in_place(&mut scores)?;
        }
        let head_out = scores.matmul(&v)?;
        concat.paste(0, c0, &head_out);
    }
    if p.heads == 1 {
        Seq::new(concat)
    } else {
        Seq::new(concat.matmul(&p.w_output)?)
    }
}

/// The regrouped single-head product `[X (Wq Wk^T) X^T] X Wv`. Equals
/// `attention_mix(x, p, false)` up to floating-point association error;
/// exists to test that identity.
pub fn gram_form_attention(x: &Seq, p: &AttnParams) -> Result<Seq> {
    p.check_input(x)?;
    if p.heads != 1 {
        return Err(Error::Parameter(format!(
            "gram form is defined for a single head, got {}",
            p.heads
        )));
    }
    let gram = p.w_query.matmul(&p.w_key.transpose())?;
    let scores = x.values().matmul(&gram)?.matmul(&x.values().transpose())?;
    let weighted = scores.matmul(&x.values().matmul(&p.w_value)?)?;
    Seq::new(weighted)
}

/// Softmax attention behind the common interface.
#[derive(Debug, Clone)]
pub struct AttentionMixer(pub AttnParams);

impl Mixer for AttentionMixer {
    fn name(&self) -> &'static str {
        "attn"
    }

    fn taxonomy(&self) -> Taxonomy {
        Taxonomy::new(ParamKind::Learned, true)
    }

    fn mix(&self, x: &Seq) -> Result<Seq> {
        attention_mix(x, &self.0, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_token_softmax_row_is_one() {
        let x = Seq::standard_normal(1, 4, 7).unwrap();
        let p = AttnParams::seeded(4, 1, 4, 8).unwrap();
        let w = attention_weights(&x, &p, 0).unwrap();
        assert_eq!(w.rows(), 1);
        assert!((w.get(0, 0) - 1.0).abs() < 1e-15);
        // Output equals the value row.
        let v = x.values().matmul(p.w_value()).unwrap();
        let y = attention_mix(&x, &p, true).unwrap();
        assert!(y.values().max_abs_diff(&v).unwrap() < 1e-12);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        for len in [4usize, 32, 128] {
            let x = Seq::standard_normal(len, 8, len as u64).unwrap();
            let p = AttnParams::seeded(8, 2, 4, 9).unwrap();
            for head in 0..2 {
                let w = attention_weights(&x, &p, head).unwrap();
                for t in 0..len {
                    let sum: f64 = w.row(t).iter().sum();
                    assert!((sum - 1.0).abs() < 1e-9, "len {len} head {head} row {t}: {sum}");
                }
            }
        }
    }

    #[test]
    fn overflowing_scores_report_the_row() {
        let x = Seq::new(RealMat::from_rows(&[vec![1e200, 1e200], vec![-1e200, 1e200]]).unwrap())
            .unwrap();
        let p = AttnParams::new(
            RealMat::identity(2),
            RealMat::identity(2),
            RealMat::identity(2),
            RealMat::identity(2),
            1,
            2,
        )
        .unwrap();
        let err = attention_mix(&x, &p, true).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)), "{err}");
        assert!(err.to_string().contains("row"), "{err}");
    }

    #[test]
    fn identity_projections_give_token_gram_scores() {
        let x = Seq::standard_normal(6, 3, 10).unwrap();
        let p = AttnParams::new(
            RealMat::identity(3),
            RealMat::identity(3),
            RealMat::identity(3),
            RealMat::identity(3),
            1,
            3,
        )
        .unwrap();
        let by_gram = gram_form_attention(&x, &p).unwrap();
        let scores = x.values().matmul(&x.values().transpose()).unwrap();
        let direct = scores.matmul(x.values()).unwrap();
        assert!(by_gram.values().max_abs_diff(&direct).unwrap() < 1e-10);
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let x = Seq::new({
            let mut m = RealMat::zeros(5, 4);
            m.set(0, 0, 0.0);
            m
        })
        .unwrap();
        let p = AttnParams::seeded(4, 1, 4, 11).unwrap();
        let y = gram_form_attention(&x, &p).unwrap();
        assert_eq!(y.values().max_abs(), 0.0);
    }

    #[test]
    fn inconsistent_projection_shapes_are_rejected() {
        // w_key is 3x2 but heads*head_dim = 4.
        let err = AttnParams::new(
            RealMat::zeros(3, 4),
            RealMat::zeros(3, 2),
            RealMat::zeros(3, 4),
            RealMat::zeros(4, 3),
            2,
            2,
        )
        .unwrap_err();
        assert!(err.to_string().contains("w_key"), "{err}");
    }

    #[test]
    fn gram_form_requires_single_head() {
        let x = Seq::standard_normal(4, 4, 12).unwrap();
        let p = AttnParams::seeded(4, 2, 2, 13).unwrap();
        assert!(gram_form_attention(&x, &p).is_err());
    }
}
