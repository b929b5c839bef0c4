//! Operator construction from CLI flags: every parameter set is derived
//! from the run seed, so a (flags, seed) pair fully determines the output.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

use seqmix::dist::{distributed_attention, plan_layout, ShardLayout};
use seqmix::mixers::{
    attention_mix, conv_mix, fnet_mix, kernel_attention_mix, mlp_mix, AttnParams, ConvParams,
    FeatureMap, MlpParams,
};
use seqmix::sgconv::{sgconv_mix, SgconvParams};
use seqmix::ssm::{ssm_mix_convolutional, SsmSystem};
use seqmix::Seq;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Op {
    Conv,
    Attn,
    KernelAttn,
    Mlp,
    Fnet,
    Ssm,
    Sgconv,
    DistAttn,
}

impl Op {
    pub fn as_str(self) -> &'static str {
        match self {
            Op::Conv => "conv",
            Op::Attn => "attn",
            Op::KernelAttn => "kernel-attn",
            Op::Mlp => "mlp",
            Op::Fnet => "fnet",
            Op::Ssm => "ssm",
            Op::Sgconv => "sgconv",
            Op::DistAttn => "dist-attn",
        }
    }
}

pub fn parse_kernel(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad kernel weight `{tok}`"))
        })
        .collect()
}

/// A ready-to-run operator; `run` returns the mixed sequence plus any extra
/// summary text (the sharded op reports its built-in cross-check).
pub enum BuiltMixer {
    Conv(ConvParams),
    Attn(AttnParams),
    KernelAttn(FeatureMap),
    Mlp(MlpParams),
    Fnet,
    Ssm(SsmSystem),
    Sgconv(SgconvParams),
    DistAttn { params: AttnParams, layout: ShardLayout },
}

impl BuiltMixer {
    pub fn run(&self, x: &Seq) -> Result<(Seq, String)> {
        let out = match self {
            BuiltMixer::Conv(p) => (conv_mix(x, p)?, String::new()),
            BuiltMixer::Attn(p) => (attention_mix(x, p, true)?, String::new()),
            BuiltMixer::KernelAttn(fm) => (kernel_attention_mix(x, fm, true)?, String::new()),
            BuiltMixer::Mlp(p) => (mlp_mix(x, p)?, String::new()),
            BuiltMixer::Fnet => (fnet_mix(x)?, String::new()),
            BuiltMixer::Ssm(sys) => (ssm_mix_convolutional(x, sys)?, String::new()),
            BuiltMixer::Sgconv(p) => (sgconv_mix(x, p)?, String::new()),
            BuiltMixer::DistAttn { params, layout } => {
                let (sharded, stats) = distributed_attention(x, params, layout)?;
                let reference = attention_mix(x, params, true)?;
                let diff = sharded.max_abs_diff(&reference)?;
                let bytes: usize = stats.iter().map(|s| s.bytes_sent).sum();
                let peak = stats.iter().map(|s| s.peak_score_elements).max().unwrap_or(0);
                let extra = format!(
                    " workers={} max_abs_diff_vs_single={diff:.3e} within_1e-5={} peak_score_elems={peak} bytes_shuffled={bytes}",
                    layout.workers(),
                    diff <= 1e-5,
                );
                (sharded, extra)
            }
        };
        Ok(out)
    }
}

/// Builds the operator for a sequence of shape `(len, dim)`. Parameter
/// seeds are offset from the run seed so the input and the weights never
/// share a stream.
pub fn build_mixer(
    op: Op,
    len: usize,
    dim: usize,
    heads: usize,
    workers: usize,
    seed: u64,
    kernel: Option<Vec<f64>>,
) -> Result<BuiltMixer> {
    let pseed = seed.wrapping_add(0x5eed);
    Ok(match op {
        Op::Conv => {
            let params = match kernel {
                Some(w) => ConvParams::new(w)?,
                None => ConvParams::seeded(len.min(8), pseed)?,
            };
            BuiltMixer::Conv(params)
        }
        Op::Attn => BuiltMixer::Attn(attn_params(dim, heads, pseed)?),
        Op::KernelAttn => BuiltMixer::KernelAttn(FeatureMap::EluPlusOne),
        Op::Mlp => BuiltMixer::Mlp(MlpParams::seeded_dense(len, dim, pseed)),
        Op::Fnet => BuiltMixer::Fnet,
        Op::Ssm => BuiltMixer::Ssm(SsmSystem::hippo_legs(64, 1.0 / len as f64)?),
        Op::Sgconv => BuiltMixer::Sgconv(SgconvParams::seeded(len.min(16), dim, len, 0.5, pseed)?),
        Op::DistAttn => {
            let params = attn_params(dim, heads, pseed)?;
            let layout = plan_layout(len, heads, workers)?;
            BuiltMixer::DistAttn { params, layout }
        }
    })
}

fn attn_params(dim: usize, heads: usize, seed: u64) -> Result<AttnParams> {
    if heads == 0 || !dim.is_multiple_of(heads) {
        bail!("model width {dim} must split evenly over {heads} heads");
    }
    Ok(AttnParams::seeded(dim, heads, dim / heads, seed)?)
}
