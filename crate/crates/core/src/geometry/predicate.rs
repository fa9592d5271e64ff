//! Termination predicates for the subdivision loop.
//!
//! Each predicate is a strategy behind [`TerminationPredicate`]; the
//! [`PredicateRegistry`] maps names (as used on the command line) to them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Cube, IntervalBox, NormalizedEvaluator};
use crate::error::{Error, Result};
use crate::poly::{AffinePolynomial, MAX_VARS};

/// Which disjunct of a predicate fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Value,
    Gradient,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Value => "value",
            Branch::Gradient => "gradient",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub passed: bool,
    pub branch: Option<Branch>,
}

impl Verdict {
    pub const FAIL: Verdict = Verdict {
        passed: false,
        branch: None,
    };

    pub fn pass(branch: Branch) -> Verdict {
        Verdict {
            passed: true,
            branch: Some(branch),
        }
    }
}

pub trait TerminationPredicate: Send + Sync {
    /// Canonical name, e.g. `"cprime"`.
    fn name(&self) -> &'static str;

    /// Other names accepted by the registry.
    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }

    fn evaluate(&self, f: &NormalizedEvaluator<'_>, cube: &Cube) -> Verdict;
}

/// `C'_f(J)`: `|f̂(m)| > (1+√d)√n w` or `‖∂f̂(m)‖ > √2 (1+√(d-1)) n w`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CPrimePredicate;

impl TerminationPredicate for CPrimePredicate {
    fn name(&self) -> &'static str {
        "cprime"
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["c_prime", "c-prime"]
    }

    fn evaluate(&self, f: &NormalizedEvaluator<'_>, cube: &Cube) -> Verdict {
        let n = cube.dim() as f64;
        let w = cube.width();
        let m = cube.midpoint();
        let mut g = [0.0; MAX_VARS];
        let g = &mut g[..cube.dim()];
        let v = f.f_hat_and_gradient(m, g);
        if v.abs() > f.value_lipschitz() * n.sqrt() * w {
            return Verdict::pass(Branch::Value);
        }
        let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm > std::f64::consts::SQRT_2 * f.gradient_lipschitz() * n * w {
            return Verdict::pass(Branch::Gradient);
        }
        Verdict::FAIL
    }
}

/// `C_f(J)`: `0 ∉ □[f̂](J)` or `0 ∉ ⟨□[∂f̂](J), □[∂f̂](J)⟩`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntervalPredicate;

impl TerminationPredicate for IntervalPredicate {
    fn name(&self) -> &'static str {
        "interval"
    }

    fn evaluate(&self, f: &NormalizedEvaluator<'_>, cube: &Cube) -> Verdict {
        let mut g = [0.0; MAX_VARS];
        let g = &mut g[..cube.dim()];
        let v = f.f_hat_and_gradient(cube.midpoint(), g);
        let r = f.value_radius(cube);
        if !(v - r <= 0.0 && 0.0 <= v + r) {
            return Verdict::pass(Branch::Value);
        }
        let b = IntervalBox::centered(g, f.gradient_radius(cube));
        if !b.dot(&b).contains_zero() {
            return Verdict::pass(Branch::Gradient);
        }
        Verdict::FAIL
    }
}

/// `C_f` on an explicit value interval and gradient box.
pub fn predicate_c_with(value: super::Interval, grad: &IntervalBox) -> Verdict {
    if !value.contains_zero() {
        Verdict::pass(Branch::Value)
    } else if !grad.dot(grad).contains_zero() {
        Verdict::pass(Branch::Gradient)
    } else {
        Verdict::FAIL
    }
}

pub fn predicate_c(f: &AffinePolynomial, cube: &Cube) -> Result<Verdict> {
    let e = NormalizedEvaluator::new(f)?;
    e.check_point(cube.midpoint())?;
    Ok(IntervalPredicate.evaluate(&e, cube))
}

pub fn predicate_c_prime(f: &AffinePolynomial, cube: &Cube) -> Result<Verdict> {
    let e = NormalizedEvaluator::new(f)?;
    e.check_point(cube.midpoint())?;
    Ok(CPrimePredicate.evaluate(&e, cube))
}

#[derive(Clone)]
pub struct PredicateRegistry {
    by_name: BTreeMap<&'static str, Arc<dyn TerminationPredicate>>,
    canonical: Vec<&'static str>,
}

impl PredicateRegistry {
    pub fn empty() -> PredicateRegistry {
        PredicateRegistry {
            by_name: BTreeMap::new(),
            canonical: Vec::new(),
        }
    }

    pub fn register(&mut self, p: Arc<dyn TerminationPredicate>) {
        self.canonical.push(p.name());
        for name in std::iter::once(p.name()).chain(p.aliases().iter().copied()) {
            self.by_name.insert(name, p.clone());
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn TerminationPredicate>> {
        self.by_name.get(name).cloned().ok_or_else(|| Error::UnknownStrategy {
            kind: "predicate",
            name: name.to_string(),
            available: self.canonical.join(", "),
        })
    }

    pub fn names(&self) -> &[&'static str] {
        &self.canonical
    }
}

impl Default for PredicateRegistry {
    fn default() -> Self {
        let mut r = PredicateRegistry::empty();
        r.register(Arc::new(CPrimePredicate));
        r.register(Arc::new(IntervalPredicate));
        r
    }
}
