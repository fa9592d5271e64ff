//! The subdivision loop: refine `[-a, a]^n` breadth-first until a
//! termination predicate holds on every cube.
//!
//! Passing cubes are frozen as leaves immediately; failing cubes are split
//! into their `2^n` children. Each level of the frontier is evaluated in
//! parallel and merged in order, so the result does not depend on the
//! thread count.

mod segments;
mod verify;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use segments::{extract_segments, render_svg, Segment, SegmentSet, SVG_SIZE};
pub use verify::{verify_subdivision, VerificationReport, Violation};

use crate::error::{Error, Result};
use crate::geometry::{Branch, Cube, NormalizedEvaluator, PredicateRegistry, TerminationPredicate};
use crate::poly::AffinePolynomial;

pub const DEFAULT_MAX_DEPTH: u32 = 40;
pub const DEFAULT_MODE: &str = "cprime";
/// Bumped whenever the JSON layout of [`Subdivision`] changes.
pub const SUBDIVISION_FORMAT_VERSION: u32 = 1;
/// Deepest level for which dyadic indices fit comfortably in `u64`.
pub const MAX_SUPPORTED_DEPTH: u32 = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub m: Vec<f64>,
    pub w: f64,
    pub branch: Branch,
}

impl Leaf {
    pub fn cube(&self) -> Result<Cube> {
        Cube::new(self.m.clone(), self.w)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionStats {
    pub leaf_count: usize,
    /// Number of predicate evaluations, leaves and internal cubes together.
    pub cubes_examined: usize,
    pub max_depth_reached: u32,
    /// `depth_histogram[k]` is the number of leaves of width `2a / 2^k`.
    pub depth_histogram: Vec<usize>,
    pub value_branch: usize,
    pub gradient_branch: usize,
}

impl SubdivisionStats {
    pub fn internal_count(&self) -> usize {
        self.cubes_examined - self.leaf_count
    }

    fn record(&mut self, depth: u32, branch: Branch) {
        let k = depth as usize;
        if self.depth_histogram.len() <= k {
            self.depth_histogram.resize(k + 1, 0);
        }
        self.depth_histogram[k] += 1;
        self.leaf_count += 1;
        self.max_depth_reached = self.max_depth_reached.max(depth);
        match branch {
            Branch::Value => self.value_branch += 1,
            Branch::Gradient => self.gradient_branch += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subdivision {
    pub format_version: u32,
    pub a: f64,
    pub n: usize,
    pub mode: String,
    pub leaves: Vec<Leaf>,
    pub stats: SubdivisionStats,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct DyadicKey {
    pub depth: u32,
    pub index: Vec<u64>,
}

impl DyadicKey {
    fn parent(&self) -> Option<DyadicKey> {
        (self.depth > 0).then(|| DyadicKey {
            depth: self.depth - 1,
            index: self.index.iter().map(|i| i / 2).collect(),
        })
    }

    fn cube(&self, a: f64) -> Cube {
        let w = 2.0 * a * 0.5f64.powi(self.depth as i32);
        let m = self.index.iter().map(|&i| -a + (i as f64 + 0.5) * w).collect();
        Cube::new(m, w).expect("dyadic cube of a valid region")
    }
}

/// Integer grid coordinates of `(m, w)` inside `[-a, a]^n`, if it is a dyadic cube.
pub(crate) fn dyadic_key(a: f64, m: &[f64], w: f64) -> Option<DyadicKey> {
    if !(w.is_finite() && w > 0.0) {
        return None;
    }
    let ratio = 2.0 * a / w;
    let depth = ratio.log2().round();
    if !(0.0..=MAX_SUPPORTED_DEPTH as f64).contains(&depth) {
        return None;
    }
    let depth = depth as u32;
    let expected = 2.0 * a * 0.5f64.powi(depth as i32);
    if (w - expected).abs() > 1e-12 * expected {
        return None;
    }
    let cells = 1u64 << depth;
    let mut index = Vec::with_capacity(m.len());
    for &c in m {
        let pos = (c + a) / expected - 0.5;
        let i = pos.round();
        if !(pos - i).abs().le(&1e-6) || i < 0.0 || i >= cells as f64 {
            return None;
        }
        index.push(i as u64);
    }
    Some(DyadicKey { depth, index })
}

impl Subdivision {
    pub fn leaf_cubes(&self) -> Result<Vec<Cube>> {
        self.leaves.iter().map(Leaf::cube).collect()
    }

    /// Every cube that was split, reconstructed from the leaves' ancestors,
    /// ordered by depth and then lexicographically.
    pub fn internal_cubes(&self) -> Result<Vec<Cube>> {
        let mut seen = BTreeSet::new();
        for (i, leaf) in self.leaves.iter().enumerate() {
            let key = dyadic_key(self.a, &leaf.m, leaf.w).ok_or_else(|| Error::InvalidParameter {
                name: "leaves",
                reason: format!("leaf {i} is not a dyadic cube of [-a, a]^n"),
            })?;
            let mut cur = key.parent();
            while let Some(k) = cur {
                cur = k.parent();
                if !seen.insert(k) {
                    break;
                }
            }
        }
        Ok(seen.into_iter().map(|k| k.cube(self.a)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Subdivision> {
        let sub: Subdivision = serde_json::from_str(s)?;
        if sub.format_version != SUBDIVISION_FORMAT_VERSION {
            return Err(Error::InvalidParameter {
                name: "format_version",
                reason: format!("expected {SUBDIVISION_FORMAT_VERSION}, found {}", sub.format_version),
            });
        }
        Ok(sub)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdivideOptions {
    pub max_depth: u32,
    /// Abort with [`Error::CubeBudgetExceeded`] once this many cubes would be examined.
    pub cube_budget: Option<usize>,
}

impl Default for SubdivideOptions {
    fn default() -> Self {
        SubdivideOptions {
            max_depth: DEFAULT_MAX_DEPTH,
            cube_budget: None,
        }
    }
}

/// Subdivides `[-a, a]^n` with the predicate registered under `mode`.
pub fn pv_subdivide(f: &AffinePolynomial, a: f64, mode: &str, max_depth: u32) -> Result<Subdivision> {
    let predicate = PredicateRegistry::default().get(mode)?;
    subdivide_with(
        f,
        a,
        predicate.as_ref(),
        &SubdivideOptions {
            max_depth,
            cube_budget: None,
        },
    )
}

pub fn subdivide_with(
    f: &AffinePolynomial,
    a: f64,
    predicate: &dyn TerminationPredicate,
    options: &SubdivideOptions,
) -> Result<Subdivision> {
    let eval = NormalizedEvaluator::new(f)?;
    if !(1..=MAX_SUPPORTED_DEPTH).contains(&options.max_depth) {
        return Err(Error::InvalidParameter {
            name: "max_depth",
            reason: format!("must lie in 1..={MAX_SUPPORTED_DEPTH}, got {}", options.max_depth),
        });
    }
    let mut frontier = vec![Cube::region(f.n(), a)?];
    let mut leaves = Vec::new();
    let mut stats = SubdivisionStats::default();

    for depth in 0.. {
        if frontier.is_empty() {
            break;
        }
        if let Some(budget) = options.cube_budget {
            if stats.cubes_examined + frontier.len() > budget {
                return Err(Error::CubeBudgetExceeded { budget });
            }
        }
        let verdicts: Vec<_> = frontier
            .par_iter()
            .with_min_len(64)
            .map(|c| predicate.evaluate(&eval, c))
            .collect();
        stats.cubes_examined += frontier.len();

        let failing = verdicts.iter().filter(|v| !v.passed).count();
        if failing > 0 && depth >= options.max_depth {
            return Err(Error::MaxDepthExceeded {
                max_depth: options.max_depth,
                failing,
                leaves_so_far: leaves.len(),
            });
        }
        let mut next = Vec::with_capacity(failing << f.n());
        for (cube, verdict) in frontier.into_iter().zip(verdicts) {
            match verdict.branch {
                Some(branch) if verdict.passed => {
                    stats.record(depth, branch);
                    leaves.push(Leaf {
                        m: cube.midpoint().to_vec(),
                        w: cube.width(),
                        branch,
                    });
                }
                _ => next.extend(cube.children()),
            }
        }
        frontier = next;
    }

    Ok(Subdivision {
        format_version: SUBDIVISION_FORMAT_VERSION,
        a,
        n: f.n(),
        mode: predicate.name().to_string(),
        leaves,
        stats,
    })
}
