use std::collections::HashMap;

use serde::Serialize;

use super::{dyadic_key, DyadicKey, Subdivision};
use crate::geometry::{Branch, IntervalPredicate, NormalizedEvaluator, PredicateRegistry, TerminationPredicate};
use crate::poly::AffinePolynomial;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    UnknownMode {
        mode: String,
    },
    DimensionMismatch {
        leaf: usize,
        expected: usize,
        got: usize,
    },
    NonDyadic {
        leaf: usize,
        w: f64,
    },
    Overlap {
        leaf: usize,
        other: usize,
    },
    Tiling {
        volume_sum: f64,
        expected: f64,
    },
    PredicateFailed {
        leaf: usize,
    },
    BranchMismatch {
        leaf: usize,
        recorded: Branch,
        recomputed: Branch,
    },
    /// A `cprime` leaf on which the interval predicate fails.
    CPrimeWithoutC {
        leaf: usize,
    },
    StatsMismatch {
        field: &'static str,
        recorded: usize,
        actual: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub leaves_checked: usize,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks tiling, dyadic structure, recorded statistics and the
/// predicate on every leaf of `s`.
pub fn verify_subdivision(s: &Subdivision, f: &AffinePolynomial) -> VerificationReport {
    let mut out = VerificationReport {
        leaves_checked: s.leaves.len(),
        violations: Vec::new(),
    };
    let v = &mut out.violations;

    let predicate = match PredicateRegistry::default().get(&s.mode) {
        Ok(p) => Some(p),
        Err(_) => {
            v.push(Violation::UnknownMode { mode: s.mode.clone() });
            None
        }
    };

    let mut keys: HashMap<DyadicKey, usize> = HashMap::with_capacity(s.leaves.len());
    let mut volume_sum = 0.0;
    for (i, leaf) in s.leaves.iter().enumerate() {
        if leaf.m.len() != s.n || f.n() != s.n {
            v.push(Violation::DimensionMismatch {
                leaf: i,
                expected: f.n(),
                got: leaf.m.len(),
            });
            continue;
        }
        volume_sum += leaf.w.powi(s.n as i32);
        match dyadic_key(s.a, &leaf.m, leaf.w) {
            None => v.push(Violation::NonDyadic { leaf: i, w: leaf.w }),
            Some(key) => {
                if let Some(&other) = keys.get(&key) {
                    v.push(Violation::Overlap { leaf: i, other });
                } else {
                    keys.insert(key, i);
                }
            }
        }
    }
    // Dyadic cubes are either nested or interior-disjoint, so checking the
    // ancestor chain of each leaf is an exact disjointness test.
    let mut overlaps: Vec<_> = keys
        .iter()
        .filter_map(|(key, &i)| {
            let mut cur = key.parent();
            while let Some(k) = cur {
                if let Some(&other) = keys.get(&k) {
                    return Some(Violation::Overlap { leaf: i, other });
                }
                cur = k.parent();
            }
            None
        })
        .collect();
    overlaps.sort_by_key(|o| match o {
        Violation::Overlap { leaf, .. } => *leaf,
        _ => 0,
    });
    v.extend(overlaps);

    let expected = (2.0 * s.a).powi(s.n as i32);
    let tiles = (volume_sum - expected).abs() <= 1e-9 * expected;
    if !tiles {
        v.push(Violation::Tiling { volume_sum, expected });
    }

    if let (Some(p), Ok(eval)) = (predicate, NormalizedEvaluator::new(f)) {
        let check_c = p.name() == "cprime";
        for (i, leaf) in s.leaves.iter().enumerate() {
            let Ok(cube) = leaf.cube() else { continue };
            if cube.dim() != f.n() {
                continue;
            }
            let verdict = p.evaluate(&eval, &cube);
            match verdict.branch {
                Some(b) if verdict.passed => {
                    if b != leaf.branch {
                        v.push(Violation::BranchMismatch {
                            leaf: i,
                            recorded: leaf.branch,
                            recomputed: b,
                        });
                    }
                }
                _ => v.push(Violation::PredicateFailed { leaf: i }),
            }
            if check_c && verdict.passed && !IntervalPredicate.evaluate(&eval, &cube).passed {
                v.push(Violation::CPrimeWithoutC { leaf: i });
            }
        }
    }

    let st = &s.stats;
    let value = s.leaves.iter().filter(|l| l.branch == Branch::Value).count();
    let mut histogram = Vec::new();
    for leaf in &s.leaves {
        if let Some(k) = dyadic_key(s.a, &leaf.m, leaf.w) {
            let k = k.depth as usize;
            if histogram.len() <= k {
                histogram.resize(k + 1, 0);
            }
            histogram[k] += 1;
        }
    }
    for (field, recorded, actual) in [
        ("leaf_count", st.leaf_count, s.leaves.len()),
        ("value_branch", st.value_branch, value),
        ("gradient_branch", st.gradient_branch, s.leaves.len() - value),
        (
            "depth_histogram",
            st.depth_histogram.iter().sum(),
            histogram.iter().sum(),
        ),
    ] {
        if recorded != actual {
            v.push(Violation::StatsMismatch {
                field,
                recorded,
                actual,
            });
        }
    }
    out
}
