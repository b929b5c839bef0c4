//! The `verify` suite: every cross-path identity the library promises,
//! each reported as one pass/fail line with its worst observed error.

use anyhow::Result;
use clap::ValueEnum;
use num_complex::Complex64;

use seqmix::dist::{distributed_attention, plan_layout};
use seqmix::fft::{naive_dft, Fft};
use seqmix::mat::RealMat;
use seqmix::mixers::{
    attention_mix, attention_weights, conv_mix, conv_mix_banded, conv_mix_fft, fnet_mix,
    fnet_mix_sequence_first, fnet_mix_vandermonde, gram_form_attention, kernel_attention_mix,
    kernel_attention_mix_gram, mlp_mix, AttnParams, ConvParams, FeatureMap, MlpParams,
    Nonlinearity,
};
use seqmix::sgconv::{build_kernel, sgconv_mix, SgconvParams};
use seqmix::ssm::{ssm_mix_convolutional, ssm_mix_recurrent, SsmSystem};
use seqmix::Seq;

/// Deliberate corruptions for exercising the failure path.
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Perturb one softmax row before the row-stochastic check.
    AttentionRow,
}

pub struct CheckResult {
    pub name: &'static str,
    pub max_err: f64,
    pub tol: f64,
}

impl CheckResult {
    pub fn pass(&self) -> bool {
        self.max_err <= self.tol
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1e-300)
}

pub fn run_suite(seed: u64, fault: Option<Fault>) -> Result<Vec<CheckResult>> {
    let mut results = Vec::new();

    // Transform agreement across every power-of-two length in range.
    let mut worst = 0.0f64;
    for exp in 1..=12u32 {
        let n = 1usize << exp;
        let src = RealMat::standard_normal(2, n, seed.wrapping_add(exp as u64));
        let mut buf: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(src.get(0, i), src.get(1, i)))
            .collect();
        let slow = naive_dft(&buf);
        Fft::new(n).forward(&mut buf);
        let scale = slow.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let diff = buf
            .iter()
            .zip(&slow)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        worst = worst.max(rel(diff, scale));
    }
    results.push(CheckResult { name: "fft vs naive dft", max_err: worst, tol: 1e-9 });

    // Fourier mixing: axis order and the explicit matrix route.
    let x = Seq::standard_normal(128, 32, seed.wrapping_add(20))?;
    let a = fnet_mix(&x)?;
    let b = fnet_mix_sequence_first(&x)?;
    let scale = a.values().max_abs();
    results.push(CheckResult {
        name: "dft order independence",
        max_err: rel(a.max_abs_diff(&b)?, scale),
        tol: 1e-9,
    });
    let c = fnet_mix_vandermonde(&x)?;
    results.push(CheckResult {
        name: "fnet fft vs vandermonde",
        max_err: rel(a.max_abs_diff(&c)?, scale),
        tol: 1e-9,
    });

    // Attention algebra.
    let x = Seq::standard_normal(64, 16, seed.wrapping_add(30))?;
    let single = AttnParams::seeded(16, 1, 16, seed.wrapping_add(31))?;
    let gram = gram_form_attention(&x, &single)?;
    let raw = attention_mix(&x, &single, false)?;
    results.push(CheckResult {
        name: "gram form vs attention",
        max_err: gram.max_abs_diff(&raw)?,
        tol: 1e-9,
    });

    let multi = AttnParams::seeded(16, 2, 8, seed.wrapping_add(32))?;
    let mut worst = 0.0f64;
    for head in 0..2 {
        let mut weights = attention_weights(&x, &multi, head)?;
        if head == 0 {
            if let Some(Fault::AttentionRow) = fault {
                weights.set(0, 0, weights.get(0, 0) + 0.25);
            }
        }
        for t in 0..weights.rows() {
            let sum: f64 = weights.row(t).iter().sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    results.push(CheckResult { name: "attention row-stochastic", max_err: worst, tol: 1e-9 });

    let mut worst = 0.0f64;
    for fm in [
        FeatureMap::EluPlusOne,
        FeatureMap::RandomFeatures { count: 32, seed: seed.wrapping_add(33) },
    ] {
        for normalize in [false, true] {
            let right = kernel_attention_mix(&x, &fm, normalize)?;
            let left = kernel_attention_mix_gram(&x, &fm, normalize)?;
            worst = worst.max(rel(right.max_abs_diff(&left)?, right.values().max_abs()));
        }
    }
    results.push(CheckResult { name: "kernel attention associativity", max_err: worst, tol: 1e-8 });

    // Factored vs sequential token/channel mixing.
    let x = Seq::standard_normal(64, 32, seed.wrapping_add(40))?;
    let factored = MlpParams::seeded_factored(64, 32, Nonlinearity::None, seed.wrapping_add(41));
    let sequential = mlp_mix(&x, &factored)?;
    let collapsed = mlp_mix(&x, &factored.collapse()?)?;
    results.push(CheckResult {
        name: "mlp factored vs sequential",
        max_err: sequential.max_abs_diff(&collapsed)?,
        tol: 1e-9,
    });

    // State-space duality.
    let sys = SsmSystem::hippo_legs(64, 1.0 / 256.0)?;
    let x = Seq::standard_normal(256, 4, seed.wrapping_add(50))?;
    let rec = ssm_mix_recurrent(&x, &sys)?;
    let conv = ssm_mix_convolutional(&x, &sys)?;
    results.push(CheckResult {
        name: "ssm recurrent vs convolutional",
        max_err: rec.max_abs_diff(&conv)?,
        tol: 1e-5,
    });

    // Multi-scale convolution against the causal conv operator.
    let dim = 4;
    let x = Seq::standard_normal(128, dim, seed.wrapping_add(60))?;
    let params = SgconvParams::seeded(16, dim, 128, 0.5, seed.wrapping_add(61))?;
    let fast = sgconv_mix(&x, &params)?;
    let (kernel, _) = build_kernel(&params, 128)?;
    let mut worst = 0.0f64;
    for d in 0..dim {
        let filt = ConvParams::new(kernel.column(d))?;
        let col = Seq::new(RealMat::from_vec(128, 1, x.values().column(d))?)?;
        let direct = conv_mix(&col, &filt)?;
        for t in 0..128 {
            worst = worst.max((fast.values().get(t, d) - direct.values().get(t, 0)).abs());
        }
    }
    results.push(CheckResult { name: "sgconv vs direct convolution", max_err: worst, tol: 1e-8 });

    // Structured-matrix route vs FFT route for the causal conv.
    let x = Seq::standard_normal(128, 4, seed.wrapping_add(70))?;
    let p = ConvParams::seeded(9, seed.wrapping_add(71))?;
    let banded = conv_mix_banded(&x, &p)?;
    let fft = conv_mix_fft(&x, &p)?;
    results.push(CheckResult {
        name: "conv banded vs fft",
        max_err: banded.max_abs_diff(&fft)?,
        tol: 1e-8,
    });

    // Sharded attention against the single-device reference.
    let x = Seq::standard_normal(256, 32, seed.wrapping_add(80))?;
    let p = AttnParams::seeded(32, 4, 8, seed.wrapping_add(81))?;
    let layout = plan_layout(256, 4, 4)?;
    let (sharded, _) = distributed_attention(&x, &p, &layout)?;
    let reference = attention_mix(&x, &p, true)?;
    results.push(CheckResult {
        name: "distributed vs single attention",
        max_err: sharded.max_abs_diff(&reference)?,
        tol: 1e-5,
    });

    Ok(results)
}
