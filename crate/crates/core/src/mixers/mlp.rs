//! Token mixing and channel mixing with dense matrices: `W_p X W_c`, where
//! the `L x L` factor blends tokens and the `D x D` factor blends channels.
//! Each factor may be stored as a product of two sub-matrices; in the linear
//! case collapsing the factors must reproduce the sequential application.

use crate::mat::RealMat;
use crate::mixers::{Mixer, ParamKind, Taxonomy};
use crate::seq::Seq;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    None,
    /// tanh-form GELU between the two sub-matrices of each factor.
    Gelu,
}

fn gelu(v: f64) -> f64 {
    const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
    0.5 * v * (1.0 + (SQRT_2_OVER_PI * (v + 0.044_715 * v * v * v)).tanh())
}

/// Parameters for the dense token/channel mix, bound to a fixed `(L, D)`.
#[derive(Debug, Clone, PartialEq)]
pub enum MlpParams {
    /// Single `L x L` token factor and `D x D` channel factor.
    Dense { token: RealMat, channel: RealMat },
    /// Each factor split in two, with an optional nonlinearity applied
    /// between the halves of each pair.
    Factored {
        token: (RealMat, RealMat),
        channel: (RealMat, RealMat),
        nonlinearity: Nonlinearity,
    },
}

impl MlpParams {
    /// Seeded dense parameters scaled by `1/sqrt(fan-in)`.
    pub fn seeded_dense(len: usize, dim: usize, seed: u64) -> Self {
        MlpParams::Dense {
            token: RealMat::standard_normal(len, len, seed).scale(1.0 / (len as f64).sqrt()),
            channel: RealMat::standard_normal(dim, dim, seed.wrapping_add(1))
                .scale(1.0 / (dim as f64).sqrt()),
        }
    }

    /// Seeded four-factor parameters scaled by `1/sqrt(fan-in)`.
    pub fn seeded_factored(len: usize, dim: usize, nonlinearity: Nonlinearity, seed: u64) -> Self {
        let ls = 1.0 / (len as f64).sqrt();
        let ds = 1.0 / (dim as f64).sqrt();
        MlpParams::Factored {
            token: (
                RealMat::standard_normal(len, len, seed).scale(ls),
                RealMat::standard_normal(len, len, seed.wrapping_add(1)).scale(ls),
            ),
            channel: (
                RealMat::standard_normal(dim, dim, seed.wrapping_add(2)).scale(ds),
                RealMat::standard_normal(dim, dim, seed.wrapping_add(3)).scale(ds),
            ),
            nonlinearity,
        }
    }

    /// Multiplies the factor pairs into a dense parameter set. Only valid
    /// without a nonlinearity, where the products commute with application.
    pub fn collapse(&self) -> Result<MlpParams> {
        match self {
            MlpParams::Dense { .. } => Ok(self.clone()),
            MlpParams::Factored { token, channel, nonlinearity } => {
                if *nonlinearity != Nonlinearity::None {
                    return Err(Error::Parameter(
                        "factors with a nonlinearity cannot be collapsed".into(),
                    ));
                }
                Ok(MlpParams::Dense {
                    token: token.1.matmul(&token.0)?,
                    channel: channel.0.matmul(&channel.1)?,
                })
            }
        }
    }

    fn check_shapes(&self, x: &Seq) -> Result<()> {
        let (l, d) = (x.len(), x.dim());
        let check = |name: &str, m: &RealMat, n: usize| {
            if m.rows() != n || m.cols() != n {
                Err(Error::Shape(format!(
                    "{name} is {}x{}, expected {n}x{n} for a {l}x{d} sequence",
                    m.rows(),
                    m.cols()
                )))
            } else {
                Ok(())
            }
        };
        match self {
            MlpParams::Dense { token, channel } => {
                check("token factor", token, l)?;
                check("channel factor", channel, d)
            }
            MlpParams::Factored { token, channel, .. } => {
                check("token factor 1", &token.0, l)?;
                check("token factor 2", &token.1, l)?;
                check("channel factor 1", &channel.0, d)?;
                check("channel factor 2", &channel.1, d)
            }
        }
    }
}

/// Applies the token mix then the channel mix.
///
/// Dense: `token . X . channel`. Factored: `t2 (t1 X)` then `(X' c1) c2`,
/// with the nonlinearity (if any) after `t1 X` and after `X' c1`.
pub fn mlp_mix(x: &Seq, p: &MlpParams) -> Result<Seq> {
    p.check_shapes(x)?;
    let out = match p {
        MlpParams::Dense { token, channel } => token.matmul(x.values())?.matmul(channel)?,
        MlpParams::Factored { token, channel, nonlinearity } => {
            let apply = |m: RealMat| match nonlinearity {
                Nonlinearity::None => m,
                Nonlinearity::Gelu => m.map(gelu),
            };
            let tokens_mixed = token.1.matmul(&apply(token.0.matmul(x.values())?))?;
            apply(tokens_mixed.matmul(&channel.0)?).matmul(&channel.1)?
        }
    };
    Seq::new(out)
}

/// Dense token/channel mixing behind the common interface.
#[derive(Debug, Clone)]
pub struct MlpMixer(pub MlpParams);

impl Mixer for MlpMixer {
    fn name(&self) -> &'static str {
        "mlp"
    }

    fn taxonomy(&self) -> Taxonomy {
        Taxonomy::new(ParamKind::Learned, false)
    }

    fn mix(&self, x: &Seq) -> Result<Seq> {
        mlp_mix(x, &self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors_leave_input_unchanged() {
        let x = Seq::standard_normal(6, 4, 30).unwrap();
        let p = MlpParams::Dense { token: RealMat::identity(6), channel: RealMat::identity(4) };
        let y = mlp_mix(&x, &p).unwrap();
        assert_eq!(x.values(), y.values());
    }

    #[test]
    fn permutation_token_factor_permutes_rows() {
        let x = Seq::standard_normal(3, 2, 31).unwrap();
        // Cyclic permutation: row t of output = row (t+1 mod 3) of input.
        let mut perm = RealMat::zeros(3, 3);
        perm.set(0, 1, 1.0);
        perm.set(1, 2, 1.0);
        perm.set(2, 0, 1.0);
        let p = MlpParams::Dense { token: perm, channel: RealMat::identity(2) };
        let y = mlp_mix(&x, &p).unwrap();
        for t in 0..3 {
            assert_eq!(y.values().row(t), x.values().row((t + 1) % 3));
        }
    }

    #[test]
    fn collapsed_factors_match_sequential_application() {
        let x = Seq::standard_normal(16, 8, 32).unwrap();
        let p = MlpParams::seeded_factored(16, 8, Nonlinearity::None, 33);
        let seq = mlp_mix(&x, &p).unwrap();
        let col = mlp_mix(&x, &p.collapse().unwrap()).unwrap();
        assert!(seq.max_abs_diff(&col).unwrap() < 1e-12);
    }

    #[test]
    fn gelu_factors_refuse_to_collapse() {
        let p = MlpParams::seeded_factored(4, 4, Nonlinearity::Gelu, 34);
        assert!(p.collapse().is_err());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let x = Seq::standard_normal(5, 4, 35).unwrap();
        let p = MlpParams::seeded_dense(6, 4, 36);
        assert!(matches!(mlp_mix(&x, &p), Err(Error::Shape(_))));
    }
}
