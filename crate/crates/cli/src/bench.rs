//! Random-instance benchmark: subdivision cost per degree.

use std::io::Write;
use std::time::Instant;

use pvsub::poly::HomogeneousPolynomial;
use pvsub::randpoly::{derive_seed, sample_dobro, DobroSpec};
use pvsub::subdivide::pv_subdivide;
use pvsub::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

pub const BENCH_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub model: DobroSpec,
    pub n: usize,
    pub d_lo: u32,
    pub d_hi: u32,
    pub trials: usize,
    pub seed: u64,
    pub a: f64,
    pub mode: String,
    pub max_depth: u32,
    pub timing: bool,
}

/// One trial. The count fields are empty when the trial hit the depth limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: String,
    pub n: usize,
    pub d: u32,
    pub a: f64,
    pub trial: usize,
    pub seed: u64,
    pub leaf_count: Option<usize>,
    pub depth_max: Option<u32>,
    pub value_branch: Option<usize>,
    pub gradient_branch: Option<usize>,
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: String,
    pub n: usize,
    pub d: u32,
    pub trials: usize,
    pub completed: usize,
    pub max_depth_exceeded: usize,
    pub mean_leaf_count: Option<f64>,
    pub median_leaf_count: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOutput {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<SummaryRow>,
    /// Least-squares slope of `ln(mean leaf count)` against `ln d`.
    pub slope: Option<f64>,
}

/// Model label for the `model` column, e.g. `kss` or `prandom(p=3)`.
pub fn model_label(spec: &DobroSpec) -> pvsub::Result<String> {
    let name = spec.build()?.name();
    Ok(match spec.p {
        Some(p) => format!("{name}(p={p})"),
        None => name.into(),
    })
}

/// Seed of trial `trial` at degree `d`.
pub fn trial_seed(seed: u64, n: usize, d: u32, trial: usize) -> u64 {
    derive_seed(seed, &[n as u64, d as u64, trial as u64])
}

pub fn trial_instance(config: &BenchConfig, d: u32, trial: usize) -> pvsub::Result<HomogeneousPolynomial> {
    let model = config.model.build()?;
    sample_dobro(model.as_ref(), config.n, d, trial_seed(config.seed, config.n, d, trial))
}

fn run_trial(config: &BenchConfig, label: &str, d: u32, trial: usize) -> pvsub::Result<BenchRow> {
    let seed = trial_seed(config.seed, config.n, d, trial);
    let f = trial_instance(config, d, trial)?.dehomogenize();
    let start = Instant::now();
    let result = pv_subdivide(&f, config.a, &config.mode, config.max_depth);
    let runtime_ms = config.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    let mut row = BenchRow {
        model: label.into(),
        n: config.n,
        d,
        a: config.a,
        trial,
        seed,
        leaf_count: None,
        depth_max: None,
        value_branch: None,
        gradient_branch: None,
        runtime_ms,
    };
    match result {
        Ok(s) => {
            row.leaf_count = Some(s.stats.leaf_count);
            row.depth_max = Some(s.stats.max_depth_reached);
            row.value_branch = Some(s.stats.value_branch);
            row.gradient_branch = Some(s.stats.gradient_branch);
            Ok(row)
        }
        Err(Error::MaxDepthExceeded { .. }) => Ok(row),
        Err(e) => Err(e),
    }
}

fn median(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for chunk in rows.chunk_by(|x, y| x.d == y.d && x.model == y.model && x.n == y.n) {
        let mut counts: Vec<f64> = chunk.iter().filter_map(|r| r.leaf_count).map(|c| c as f64).collect();
        counts.sort_by(f64::total_cmp);
        let completed = counts.len();
        out.push(SummaryRow {
            model: chunk[0].model.clone(),
            n: chunk[0].n,
            d: chunk[0].d,
            trials: chunk.len(),
            completed,
            max_depth_exceeded: chunk.len() - completed,
            mean_leaf_count: (completed > 0).then(|| counts.iter().sum::<f64>() / completed as f64),
            median_leaf_count: (completed > 0).then(|| median(&counts)),
        });
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`; needs two distinct `x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run_bench(config: &BenchConfig) -> pvsub::Result<BenchOutput> {
    if config.d_lo == 0 || config.d_lo > config.d_hi {
        return Err(Error::InvalidParameter {
            name: "d_range",
            reason: format!("need 1 <= LO <= HI, got {}:{}", config.d_lo, config.d_hi),
        });
    }
    if config.trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            reason: "need at least one trial".into(),
        });
    }
    let label = model_label(&config.model)?;
    let jobs: Vec<(u32, usize)> = (config.d_lo..=config.d_hi)
        .flat_map(|d| (0..config.trials).map(move |t| (d, t)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(d, t)| run_trial(config, &label, d, t))
        .collect::<pvsub::Result<Vec<BenchRow>>>()?;
    rows.sort_by_key(|r| (r.d, r.trial));
    let summary = summarize(&rows);
    let means: Vec<(f64, f64)> = summary
        .iter()
        .filter_map(|s| s.mean_leaf_count.map(|m| (s.d as f64, m)))
        .collect();
    let slope = loglog_slope(&means);
    Ok(BenchOutput { rows, summary, slope })
}

pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
