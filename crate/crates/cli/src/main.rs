//! The `seqmix` binary: run token-mixing operators on generated or
//! file-loaded sequences, verify the cross-path equivalence oracles, and
//! sweep scaling benchmarks. Every run is fully determined by its flags and
//! seed; only wall-time columns differ between reruns.

mod mixes;
mod verify;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use seqmix::bench::{log_log_fit, median_time_ms, records_to_csv, BenchRecord};
use seqmix::dist::{scaling_bench, ScalingConfig};
use seqmix::io;
use seqmix::selector::{select, Scorer, SelectorConfig};
use seqmix::sgconv::memory_audit;
use seqmix::Seq;

use mixes::{build_mixer, parse_kernel, Op};

#[derive(Parser)]
#[command(name = "seqmix", version, about = "Sequence token-mixing operators, oracles, and scaling benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one mixing operator to a sequence and write the result.
    Mix(MixArgs),
    /// Run the full equivalence-oracle suite and report per-identity results.
    Verify(VerifyArgs),
    /// Time one operator over a power-of-two length sweep and emit CSV.
    Bench(BenchArgs),
    /// Emit the parameter/kernel element accounting over a length sweep.
    AuditMemory(AuditArgs),
}

#[derive(clap::Args)]
struct MixArgs {
    /// Operator to run.
    #[arg(long, value_enum)]
    op: Op,
    /// Generated sequence length (ignored with --input).
    #[arg(long, default_value_t = 64)]
    len: usize,
    /// Generated embedding width (ignored with --input).
    #[arg(long, default_value_t = 16)]
    dim: usize,
    /// Attention heads (attn/dist-attn).
    #[arg(long, default_value_t = 4)]
    heads: usize,
    /// Simulated workers (dist-attn).
    #[arg(long, default_value_t = 4)]
    workers: usize,
    /// Seed for the input sequence and all generated parameters.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated convolution weights, e.g. `1,0.5,-0.25` (conv).
    #[arg(long)]
    kernel: Option<String>,
    /// Pruning stage, e.g. `tau=1.5,scorer=l2` or `tau=0.3,scorer=proj`.
    #[arg(long)]
    selector: Option<String>,
    /// Shorthand for `--selector tau=<v>,scorer=l2`.
    #[arg(long)]
    tau: Option<f64>,
    /// Load the input matrix from a file instead of generating it.
    #[arg(long)]
    input: Option<String>,
    /// Output matrix file.
    #[arg(long, default_value = "mix_out.txt")]
    out: String,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Test hook: corrupt one identity so the suite must fail.
    #[arg(long, value_enum)]
    inject_fault: Option<verify::Fault>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    op: Op,
    /// Smallest sweep length (power of two).
    #[arg(long, default_value_t = 256)]
    min_len: usize,
    /// Largest sweep length (power of two).
    #[arg(long, default_value_t = 2048)]
    max_len: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 4)]
    heads: usize,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    /// Timed repetitions per point; the median is reported.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Per-worker score-element budget gating feasibility (dist-attn).
    #[arg(long, default_value_t = 1 << 24)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output file.
    #[arg(long, default_value = "bench.csv")]
    out: String,
}

#[derive(clap::Args)]
struct AuditArgs {
    /// Sub-kernel rows.
    #[arg(long, default_value_t = 16)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 64)]
    min_len: usize,
    #[arg(long, default_value_t = 8192)]
    max_len: usize,
    /// CSV output file.
    #[arg(long, default_value = "memory_audit.csv")]
    out: String,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Mix(args) => run_mix(args),
        Command::Verify(args) => run_verify(args),
        Command::Bench(args) => run_bench(args),
        Command::AuditMemory(args) => run_audit(args),
    }
}

fn parse_selector(text: &str, dim: usize, seed: u64) -> Result<SelectorConfig> {
    let mut tau = None;
    let mut scorer = None;
    for field in text.split(',') {
        let (key, value) = field
            .split_once('=')
            .with_context(|| format!("selector field `{field}` is not key=value"))?;
        match key.trim() {
            "tau" => tau = Some(value.trim().parse::<f64>().context("bad tau")?),
            "scorer" => {
                scorer = Some(match value.trim() {
                    "l2" => Scorer::L2Norm,
                    "proj" => Scorer::projection_seeded(dim, seed.wrapping_add(999)),
                    other => bail!("unknown scorer `{other}` (expected l2 or proj)"),
                })
            }
            other => bail!("unknown selector field `{other}` (expected tau or scorer)"),
        }
    }
    Ok(SelectorConfig::new(
        tau.context("selector needs tau=<value>")?,
        scorer.unwrap_or(Scorer::L2Norm),
    ))
}

fn run_mix(args: MixArgs) -> Result<()> {
    let x = match &args.input {
        Some(path) => Seq::new(io::read_matrix(path)?)?,
        None => Seq::standard_normal(args.len, args.dim, args.seed)?,
    };
    let original_len = x.len();

    let selector = match (&args.selector, args.tau) {
        (Some(_), Some(_)) => bail!("--selector and --tau are mutually exclusive"),
        (Some(text), None) => Some(parse_selector(text, x.dim(), args.seed)?),
        (None, Some(tau)) => Some(SelectorConfig::new(tau, Scorer::L2Norm)),
        (None, None) => None,
    };
    let (x, kept) = match &selector {
        Some(cfg) => {
            let (pruned, kept) = select(&x, cfg)?;
            (pruned, kept.len())
        }
        None => {
            let kept = x.len();
            (x, kept)
        }
    };

    let kernel = args.kernel.as_deref().map(parse_kernel).transpose()?;
    let mixer = build_mixer(args.op, x.len(), x.dim(), args.heads, args.workers, args.seed, kernel)?;
    let (out, extra) = mixer.run(&x)?;
    io::write_matrix(&args.out, out.values())?;
    println!(
        "op={} len={} dim={} seed={} kept={}/{} max_abs={:.12e} out={}{}",
        args.op.as_str(),
        x.len(),
        x.dim(),
        args.seed,
        kept,
        original_len,
        out.values().max_abs(),
        args.out,
        extra
    );
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<()> {
    let results = verify::run_suite(args.seed, args.inject_fault)?;
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut failures = 0;
    for r in &results {
        let status = if r.pass() { "PASS" } else { "FAIL" };
        println!(
            "{status}  {name:<width$}  max_err={err:.3e}  tol={tol:.1e}",
            name = r.name,
            err = r.max_err,
            tol = r.tol,
        );
        if !r.pass() {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("verify: {failures} of {} identities failed (seed {})", results.len(), args.seed);
        std::process::exit(1);
    }
    println!("verify: all {} identities passed (seed {})", results.len(), args.seed);
    Ok(())
}

fn sweep_lengths(min_len: usize, max_len: usize) -> Result<Vec<usize>> {
    if !min_len.is_power_of_two() || !max_len.is_power_of_two() || min_len > max_len {
        bail!("sweep bounds must be powers of two with min <= max, got {min_len}..{max_len}");
    }
    Ok(std::iter::successors(Some(min_len), |l| Some(l * 2))
        .take_while(|&l| l <= max_len)
        .collect())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let sweep = sweep_lengths(args.min_len, args.max_len)?;
    let records = if args.op == Op::DistAttn {
        let cfg = ScalingConfig {
            dim: args.dim,
            heads: args.heads,
            workers: args.workers,
            repeats: args.repeats,
            budget: args.budget as usize,
            seed: args.seed,
        };
        scaling_bench(&sweep, &cfg)?
    } else {
        let mut records = Vec::new();
        for (i, &len) in sweep.iter().enumerate() {
            let x = Seq::standard_normal(len, args.dim, args.seed.wrapping_add(i as u64))?;
            let mixer = build_mixer(args.op, len, args.dim, args.heads, args.workers, args.seed, None)?;
            let wall_ms = median_time_ms(args.repeats, || {
                mixer.run(&x).expect("benchmarked mixer");
            });
            records.push(BenchRecord {
                op: args.op.as_str().into(),
                workers: 1,
                len,
                dim: args.dim,
                heads: if args.op == Op::Attn { args.heads } else { 0 },
                wall_ms,
                peak_score_elements: if args.op == Op::Attn { args.heads * len * len } else { 0 },
                bytes_shuffled: 0,
                max_feasible: 0,
            });
        }
        records
    };
    std::fs::write(&args.out, records_to_csv(&records))
        .with_context(|| format!("writing {}", args.out))?;

    // Fitted complexity exponents per op over the sweep.
    let mut ops: Vec<String> = Vec::new();
    for r in &records {
        if !ops.contains(&r.op) {
            ops.push(r.op.clone());
        }
    }
    for op in ops {
        let rows: Vec<&BenchRecord> = records.iter().filter(|r| r.op == op).collect();
        if rows.len() >= 2 {
            let sizes: Vec<f64> = rows.iter().map(|r| r.len as f64).collect();
            let times: Vec<f64> = rows.iter().map(|r| r.wall_ms.max(1e-6)).collect();
            let fit = log_log_fit(&sizes, &times);
            println!(
                "fit op={op} exponent={:.3} r2={:.4} points={} range={}..{}",
                fit.exponent,
                fit.r_squared,
                rows.len(),
                rows.first().unwrap().len,
                rows.last().unwrap().len
            );
        }
    }
    println!("bench: {} rows -> {}", records.len(), args.out);
    Ok(())
}

fn run_audit(args: AuditArgs) -> Result<()> {
    let sweep = sweep_lengths(args.min_len.max(args.k.next_power_of_two()), args.max_len)?;
    let ledgers = memory_audit(args.k, args.dim, &sweep)?;
    let mut csv = String::from("L,s,param_elements,kernel_elements\n");
    for l in &ledgers {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            l.len, l.scales, l.param_elements, l.kernel_elements
        ));
    }
    std::fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out))?;
    println!("audit-memory: k={} dim={} rows={} -> {}", args.k, args.dim, ledgers.len(), args.out);
    Ok(())
}
