//! Benchmark records, timing helpers, and the power-law fits used to check
//! complexity shape.

use std::time::Instant;

/// One benchmark observation. `peak_score_elements` counts the score-matrix
/// elements the run had to hold; `bytes_shuffled` and `max_feasible` are
/// populated by the sharded runs and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub op: String,
    pub workers: usize,
    pub len: usize,
    pub dim: usize,
    pub heads: usize,
    pub wall_ms: f64,
    pub peak_score_elements: usize,
    pub bytes_shuffled: usize,
    pub max_feasible: usize,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str =
        "op,workers,L,D,H,wall_ms,peak_score_elems,bytes_shuffled,max_feasible";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{},{},{}",
            self.op,
            self.workers,
            self.len,
            self.dim,
            self.heads,
            self.wall_ms,
            self.peak_score_elements,
            self.bytes_shuffled,
            self.max_feasible
        )
    }
}

/// Renders records as CSV with the stable header line first.
pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(BenchRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Milliseconds for one invocation of `f`.
pub fn time_once<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// Median wall time in milliseconds over `repeats` invocations.
pub fn median_time_ms(repeats: usize, mut f: impl FnMut()) -> f64 {
    assert!(repeats >= 1);
    let mut times: Vec<f64> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

/// Least-squares fit of `log t = exponent * log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Log-log regression of times against sizes; sizes and times must be
/// positive and of equal nonzero length >= 2.
pub fn log_log_fit(sizes: &[f64], times: &[f64]) -> PowerFit {
    assert!(sizes.len() == times.len() && sizes.len() >= 2, "need >= 2 points");
    let xs: Vec<f64> = sizes.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = times.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    PowerFit { exponent: slope, intercept, r_squared }
}

/// Constrained fit `t = c * x^exponent`; returns `(c, r_squared)` on the
/// linear scale.
pub fn fixed_power_fit(sizes: &[f64], times: &[f64], exponent: f64) -> (f64, f64) {
    assert!(sizes.len() == times.len() && !sizes.is_empty());
    let basis: Vec<f64> = sizes.iter().map(|v| v.powf(exponent)).collect();
    let num: f64 = basis.iter().zip(times).map(|(b, t)| b * t).sum();
    let den: f64 = basis.iter().map(|b| b * b).sum();
    let c = num / den;
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let ss_res: f64 = basis
        .iter()
        .zip(times)
        .map(|(b, t)| {
            let e = t - c * b;
            e * e
        })
        .sum();
    let ss_tot: f64 = times.iter().map(|t| (t - mean) * (t - mean)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (c, r_squared)
}
