//! Estimators of `E_{x ∈ [-a,a]^n} h(x)` for integrands that may be undefined
//! (singular) at isolated points.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BLOCKS: usize = 16;
pub const DEFAULT_POINTS_PER_AXIS: usize = 1 << 12;
pub const DEFAULT_SAMPLES: usize = 1 << 16;
/// Upper limit on the number of quadrature nodes.
pub const MAX_QUADRATURE_NODES: usize = 1 << 28;

/// The integrand: `None` marks a singular point.
pub type Integrand<'a> = dyn Fn(&[f64]) -> Option<f64> + Sync + 'a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub estimate: f64,
    /// Median-of-means: half the interquartile range of the block means.
    /// Quadrature: difference to the half-resolution rule.
    pub uncertainty: f64,
    pub samples: usize,
    pub singular_samples: usize,
    /// Set when the largest 1% of the samples carry more than half the sum.
    pub heavy_tail: bool,
    pub seed: Option<u64>,
}

pub trait ExpectationEstimator: Send + Sync {
    fn name(&self) -> &'static str;

    fn estimate(&self, h: &Integrand<'_>, n: usize, a: f64) -> Result<EstimateReport>;
}

/// Median of `blocks` block means of uniform samples; block `b` uses its own
/// ChaCha8 stream so the result is independent of scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MedianOfMeans {
    pub samples: usize,
    pub blocks: usize,
    pub seed: u64,
}

impl MedianOfMeans {
    pub fn new(samples: usize, seed: u64) -> MedianOfMeans {
        MedianOfMeans {
            samples,
            blocks: DEFAULT_BLOCKS,
            seed,
        }
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn heavy_tail(values: &mut [f64]) -> bool {
    if values.is_empty() {
        return false;
    }
    let total: f64 = values.iter().sum();
    let top = values.len().div_ceil(100);
    values.sort_by(|a, b| b.total_cmp(a));
    let head: f64 = values[..top].iter().sum();
    total > 0.0 && head > 0.5 * total
}

fn check_region(n: usize, a: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "need at least one variable".into(),
        });
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: format!("must be positive, got {a}"),
        });
    }
    Ok(())
}

impl ExpectationEstimator for MedianOfMeans {
    fn name(&self) -> &'static str {
        "mc"
    }

    fn estimate(&self, h: &Integrand<'_>, n: usize, a: f64) -> Result<EstimateReport> {
        check_region(n, a)?;
        if self.blocks == 0 || self.samples < self.blocks {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: format!("need at least {} samples, got {}", self.blocks, self.samples),
            });
        }
        let per_block = self.samples / self.blocks;
        let blocks: Vec<(Vec<f64>, usize)> = (0..self.blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(b as u64);
                let mut x = vec![0.0; n];
                let mut values = Vec::with_capacity(per_block);
                let mut singular = 0;
                for _ in 0..per_block {
                    for xi in x.iter_mut() {
                        *xi = rng.random_range(-a..a);
                    }
                    match h(&x) {
                        Some(v) => values.push(v),
                        None => singular += 1,
                    }
                }
                (values, singular)
            })
            .collect();

        let singular_samples = blocks.iter().map(|b| b.1).sum();
        let mut means: Vec<f64> = blocks
            .iter()
            .filter(|b| !b.0.is_empty())
            .map(|b| b.0.iter().sum::<f64>() / b.0.len() as f64)
            .collect();
        if means.is_empty() {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "every sample was singular".into(),
            });
        }
        means.sort_by(f64::total_cmp);
        let mut all: Vec<f64> = blocks.into_iter().flat_map(|b| b.0).collect();
        Ok(EstimateReport {
            estimator: self.name().into(),
            estimate: quantile(&means, 0.5),
            uncertainty: 0.5 * (quantile(&means, 0.75) - quantile(&means, 0.25)),
            samples: all.len(),
            singular_samples,
            heavy_tail: heavy_tail(&mut all),
            seed: Some(self.seed),
        })
    }
}

/// Tensor-product trapezoid rule with `points_per_axis` nodes per axis,
/// endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trapezoid {
    pub points_per_axis: usize,
}

impl Default for Trapezoid {
    fn default() -> Self {
        Trapezoid {
            points_per_axis: DEFAULT_POINTS_PER_AXIS,
        }
    }
}

struct QuadratureSum {
    weighted: f64,
    weight: f64,
    singular: usize,
    nodes: usize,
}

fn trapezoid_sum(h: &Integrand<'_>, n: usize, a: f64, m: usize) -> QuadratureSum {
    let node = |i: usize| -a + 2.0 * a * i as f64 / (m - 1) as f64;
    let weight = |i: usize| if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
    let rest = m.pow(n as u32 - 1);
    let rows: Vec<(f64, f64, usize)> = (0..m)
        .into_par_iter()
        .map(|i0| {
            let mut x = vec![0.0; n];
            x[0] = node(i0);
            let (mut sw, mut s, mut singular) = (0.0, 0.0, 0);
            for mut r in 0..rest {
                let mut w = weight(i0);
                for xi in x[1..].iter_mut().rev() {
                    let i = r % m;
                    r /= m;
                    *xi = node(i);
                    w *= weight(i);
                }
                match h(&x) {
                    Some(v) => {
                        sw += w * v;
                        s += w;
                    }
                    None => singular += 1,
                }
            }
            (sw, s, singular)
        })
        .collect();
    let mut out = QuadratureSum {
        weighted: 0.0,
        weight: 0.0,
        singular: 0,
        nodes: m.pow(n as u32),
    };
    for (sw, s, singular) in rows {
        out.weighted += sw;
        out.weight += s;
        out.singular += singular;
    }
    out
}

impl ExpectationEstimator for Trapezoid {
    fn name(&self) -> &'static str {
        "trapezoid"
    }

    fn estimate(&self, h: &Integrand<'_>, n: usize, a: f64) -> Result<EstimateReport> {
        check_region(n, a)?;
        let m = self.points_per_axis;
        let fits = m >= 2 && (m as f64).powi(n as i32) <= MAX_QUADRATURE_NODES as f64;
        if !fits {
            return Err(Error::InvalidParameter {
                name: "points_per_axis",
                reason: format!("{m}^{n} nodes is outside 2..={MAX_QUADRATURE_NODES}"),
            });
        }
        let fine = trapezoid_sum(h, n, a, m);
        if fine.weight == 0.0 {
            return Err(Error::InvalidParameter {
                name: "points_per_axis",
                reason: "every node was singular".into(),
            });
        }
        let estimate = fine.weighted / fine.weight;
        let uncertainty = if m / 2 >= 2 {
            let coarse = trapezoid_sum(h, n, a, m / 2);
            if coarse.weight > 0.0 {
                (estimate - coarse.weighted / coarse.weight).abs()
            } else {
                f64::INFINITY
            }
        } else {
            f64::INFINITY
        };
        Ok(EstimateReport {
            estimator: self.name().into(),
            estimate,
            uncertainty,
            samples: fine.nodes - fine.singular,
            singular_samples: fine.singular,
            heavy_tail: false,
            seed: None,
        })
    }
}

/// Settings from which registered estimators are built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    pub kind: String,
    pub samples: usize,
    pub blocks: usize,
    pub seed: u64,
    pub points_per_axis: usize,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings {
            kind: "mc".into(),
            samples: DEFAULT_SAMPLES,
            blocks: DEFAULT_BLOCKS,
            seed: 0,
            points_per_axis: DEFAULT_POINTS_PER_AXIS,
        }
    }
}

impl EstimatorSettings {
    pub fn monte_carlo(samples: usize, seed: u64) -> EstimatorSettings {
        EstimatorSettings {
            samples,
            seed,
            ..EstimatorSettings::default()
        }
    }

    pub fn trapezoid(points_per_axis: usize) -> EstimatorSettings {
        EstimatorSettings {
            kind: "trapezoid".into(),
            points_per_axis,
            ..EstimatorSettings::default()
        }
    }

    pub fn build(&self) -> Result<Arc<dyn ExpectationEstimator>> {
        EstimatorRegistry::default().get(self)
    }
}

type Factory = fn(&EstimatorSettings) -> Arc<dyn ExpectationEstimator>;

#[derive(Clone)]
pub struct EstimatorRegistry {
    by_name: BTreeMap<&'static str, Factory>,
    canonical: Vec<&'static str>,
}

impl EstimatorRegistry {
    pub fn empty() -> EstimatorRegistry {
        EstimatorRegistry {
            by_name: BTreeMap::new(),
            canonical: Vec::new(),
        }
    }

    pub fn register(&mut self, name: &'static str, aliases: &[&'static str], factory: Factory) {
        self.canonical.push(name);
        for n in std::iter::once(&name).chain(aliases) {
            self.by_name.insert(n, factory);
        }
    }

    pub fn get(&self, settings: &EstimatorSettings) -> Result<Arc<dyn ExpectationEstimator>> {
        let factory = self
            .by_name
            .get(settings.kind.as_str())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "estimator",
                name: settings.kind.clone(),
                available: self.canonical.join(", "),
            })?;
        Ok(factory(settings))
    }

    pub fn names(&self) -> &[&'static str] {
        &self.canonical
    }
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        let mut r = EstimatorRegistry::empty();
        r.register("mc", &["monte_carlo", "median_of_means"], |s| {
            Arc::new(MedianOfMeans {
                samples: s.samples,
                blocks: s.blocks,
                seed: s.seed,
            })
        });
        r.register("trapezoid", &["quadrature"], |s| {
            Arc::new(Trapezoid {
                points_per_axis: s.points_per_axis,
            })
        });
        r
    }
}
