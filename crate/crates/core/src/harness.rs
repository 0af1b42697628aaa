//! Random-circuit benchmark: optimise `count` circuits of one shape and
//! aggregate sizes, rule applications, timings and verification.

use std::fmt::Write as _;
use std::sync::Mutex;

use serde::Serialize;

use crate::circuit::{gate_matrix_product, random_clifford_circuit, Circuit};
use crate::optimiser::{optimise, OptimiseError, OptimiserConfig};
use crate::semantics::{scalar_free_equal, DEFAULT_TOL};

/// Semantics are checked on every run up to this width.
pub const VERIFY_MAX_WIDTH: usize = 4;

pub const CSV_HEADER: &str = "width,depth,count,seed,mean_in,mean_out,ratio,steps,ms_mean,ms_sigma,verified";

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub input_size: usize,
    pub output_size: usize,
    pub ratio: f64,
    pub steps: usize,
    pub millis: f64,
    /// `None` above [`VERIFY_MAX_WIDTH`].
    pub verified: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub width: usize,
    pub depth: usize,
    pub count: usize,
    pub seed: u64,
    pub mean_in: f64,
    pub mean_out: f64,
    pub ratio: f64,
    pub steps: f64,
    pub ms_mean: f64,
    pub ms_sigma: f64,
    /// Fraction of verified runs that passed (1.0 when none were checked).
    pub verified: f64,
    pub errors: usize,
    pub runs: Vec<RunRecord>,
}

fn run_one(width: usize, depth: usize, seed: u64, cfg: &OptimiserConfig) -> RunRecord {
    let c = random_clifford_circuit(width, depth, seed);
    let failed = |e: String| RunRecord {
        seed,
        input_size: 0,
        output_size: 0,
        ratio: 1.0,
        steps: 0,
        millis: 0.0,
        verified: (width <= VERIFY_MAX_WIDTH).then_some(false),
        error: Some(e),
    };
    let r = match optimise(&c, cfg) {
        Ok(r) => r,
        Err(e) => return failed(e.to_string()),
    };
    let verified = if width <= VERIFY_MAX_WIDTH {
        Some(check(&c, &r.circuit).unwrap_or(false))
    } else {
        None
    };
    let s = &r.stats;
    RunRecord {
        seed,
        input_size: s.input_size,
        output_size: s.output_size,
        ratio: if s.input_size == 0 { 1.0 } else { s.output_size as f64 / s.input_size as f64 },
        steps: s.rewrite_steps,
        millis: s.millis,
        verified,
        error: None,
    }
}

fn check(a: &Circuit, b: &Circuit) -> Result<bool, OptimiseError> {
    Ok(scalar_free_equal(&gate_matrix_product(a)?, &gate_matrix_product(b)?, DEFAULT_TOL)?)
}

fn mean(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
    (m, var.sqrt())
}

/// Run `count` circuits with seeds `seed + i` on `jobs` worker threads.
/// Results are ordered by seed, so reports only differ in timings.
pub fn bench(width: usize, depth: usize, count: usize, seed: u64, jobs: usize, cfg: &OptimiserConfig) -> BenchReport {
    let slots: Vec<Mutex<Option<RunRecord>>> = (0..count).map(|_| Mutex::new(None)).collect();
    let next = Mutex::new(0usize);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(count.max(1)) {
            s.spawn(|| loop {
                let i = {
                    let mut n = next.lock().unwrap();
                    let i = *n;
                    *n += 1;
                    i
                };
                if i >= count {
                    break;
                }
                let rec = run_one(width, depth, seed + i as u64, cfg);
                *slots[i].lock().unwrap() = Some(rec);
            });
        }
    });
    let runs: Vec<RunRecord> = slots.into_iter().map(|m| m.into_inner().unwrap().unwrap()).collect();
    let ok: Vec<&RunRecord> = runs.iter().filter(|r| r.error.is_none()).collect();
    let (mean_in, _) = mean(ok.iter().map(|r| r.input_size as f64));
    let (mean_out, _) = mean(ok.iter().map(|r| r.output_size as f64));
    let (ratio, _) = mean(ok.iter().map(|r| r.ratio));
    let (steps, _) = mean(ok.iter().map(|r| r.steps as f64));
    let (ms_mean, ms_sigma) = mean(ok.iter().map(|r| r.millis));
    let checked: Vec<bool> = runs.iter().filter_map(|r| r.verified).collect();
    let verified = if checked.is_empty() {
        1.0
    } else {
        checked.iter().filter(|b| **b).count() as f64 / checked.len() as f64
    };
    BenchReport {
        width,
        depth,
        count,
        seed,
        mean_in,
        mean_out,
        ratio,
        steps,
        ms_mean,
        ms_sigma,
        verified,
        errors: runs.len() - ok.len(),
        runs,
    }
}

impl BenchReport {
    pub fn all_verified(&self) -> bool {
        self.errors == 0 && self.verified == 1.0
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{:.3},{:.4},{:.1},{:.3},{:.3},{:.4}",
            self.width,
            self.depth,
            self.count,
            self.seed,
            self.mean_in,
            self.mean_out,
            self.ratio,
            self.steps,
            self.ms_mean,
            self.ms_sigma,
            self.verified
        )
    }
}

pub fn csv(reports: &[BenchReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Aligned text table, one row per report.
pub fn table(reports: &[BenchReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>5} {:>10} {:>11} {:>9} {:>11} {:>16} {:>8}",
        "width", "depth", "input size", "output size", "ratio", "proof steps", "time (ms) ± σ", "verified"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:>5} {:>5} {:>10.1} {:>11.1} {:>9.2} {:>11.1} {:>16} {:>7.0}%",
            r.width,
            r.depth,
            r.mean_in,
            r.mean_out,
            r.ratio,
            r.steps,
            format!("{:.1} ± {:.1}", r.ms_mean, r.ms_sigma),
            r.verified * 100.0
        );
    }
    out.push_str("times are wall-clock milliseconds per circuit; proof steps count rule applications\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_is_deterministic_apart_from_timing() {
        let cfg = OptimiserConfig::default();
        let a = bench(2, 8, 3, 11, 2, &cfg);
        let b = bench(2, 8, 3, 11, 1, &cfg);
        let strip = |r: &BenchReport| {
            r.runs
                .iter()
                .map(|x| (x.seed, x.input_size, x.output_size, x.steps, x.verified))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
        assert!(a.all_verified());
        assert_eq!(csv(&[a.clone()]).lines().next(), Some(CSV_HEADER));
        assert!(table(&[a]).contains("ms"));
    }
}
