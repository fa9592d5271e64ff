//! Cubes, the sphere map, the normalized evaluators `f̂` and `∂f̂`, their
//! interval approximations and the termination predicates.

mod cube;
mod interval;
mod predicate;

pub use cube::Cube;
pub use interval::{Interval, IntervalBox};
pub use predicate::{
    predicate_c, predicate_c_prime, predicate_c_with, Branch, CPrimePredicate, IntervalPredicate, PredicateRegistry,
    TerminationPredicate, Verdict,
};

use crate::error::{Error, Result};
use crate::poly::{AffinePolynomial, MAX_VARS};

/// `φ(x) = (1, x) / sqrt(1 + ‖x‖²)`, a point of the upper half of `S^n`.
pub fn phi(x: &[f64]) -> Vec<f64> {
    let s = (1.0 + norm_sq(x)).sqrt();
    std::iter::once(1.0 / s).chain(x.iter().map(|v| v / s)).collect()
}

pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `f̂` and `∂f̂` for a fixed nonzero polynomial.
///
/// `f̂(x) = f(x) / (‖f‖ (1+‖x‖²)^{(d-1)/2})`,
/// `∂f̂(x) = ∂f(x) / (d ‖f‖ (1+‖x‖²)^{d/2-1})`.
/// They are `(1+√d)`- and `(1+√(d-1))`-Lipschitz respectively, and both
/// are bounded by `sqrt(1+‖x‖²)`.
#[derive(Clone, Debug)]
pub struct NormalizedEvaluator<'a> {
    f: &'a AffinePolynomial,
    norm: f64,
    d: f64,
}

impl<'a> NormalizedEvaluator<'a> {
    pub fn new(f: &'a AffinePolynomial) -> Result<NormalizedEvaluator<'a>> {
        let norm = f.weyl_norm();
        if norm == 0.0 {
            return Err(Error::ZeroPolynomial);
        }
        if f.d() == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "normalized evaluators need d >= 1".into(),
            });
        }
        Ok(NormalizedEvaluator {
            f,
            norm,
            d: f.d() as f64,
        })
    }

    pub fn polynomial(&self) -> &AffinePolynomial {
        self.f
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn degree(&self) -> f64 {
        self.d
    }

    pub fn weyl_norm(&self) -> f64 {
        self.norm
    }

    /// Lipschitz constant `1 + √d` of `f̂`.
    pub fn value_lipschitz(&self) -> f64 {
        1.0 + self.d.sqrt()
    }

    /// Lipschitz constant `1 + √(d-1)` of `∂f̂`.
    pub fn gradient_lipschitz(&self) -> f64 {
        1.0 + (self.d - 1.0).sqrt()
    }

    pub fn f_hat(&self, x: &[f64]) -> f64 {
        let s = 1.0 + norm_sq(x);
        self.f.value_at(x) / (self.norm * s.powf(0.5 * (self.d - 1.0)))
    }

    /// Writes `∂f̂(x)` into `grad` (length `n`) and returns `f̂(x)`.
    pub fn f_hat_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let s = 1.0 + norm_sq(x);
        let v = self.f.value_and_gradient_into(x, grad);
        let gscale = 1.0 / (self.d * self.norm * s.powf(0.5 * self.d - 1.0));
        for g in grad.iter_mut() {
            *g *= gscale;
        }
        v / (self.norm * s.powf(0.5 * (self.d - 1.0)))
    }

    pub fn grad_f_hat(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.f_hat_and_gradient(x, &mut g);
        g
    }

    /// `f̂(m(J)) + (1+√d)√n w(J) [-1/2, 1/2]`.
    pub fn interval_f(&self, cube: &Cube) -> Interval {
        let r = self.value_radius(cube);
        Interval::centered(self.f_hat(cube.midpoint()), r)
    }

    /// `∂f̂(m(J)) + (1+√(d-1))√n w(J) [-1/2, 1/2]^n`.
    pub fn interval_grad(&self, cube: &Cube) -> IntervalBox {
        let mut g = [0.0; MAX_VARS];
        let g = &mut g[..self.n()];
        self.f_hat_and_gradient(cube.midpoint(), g);
        IntervalBox::centered(g, self.gradient_radius(cube))
    }

    pub(crate) fn value_radius(&self, cube: &Cube) -> f64 {
        0.5 * self.value_lipschitz() * (cube.dim() as f64).sqrt() * cube.width()
    }

    pub(crate) fn gradient_radius(&self, cube: &Cube) -> f64 {
        0.5 * self.gradient_lipschitz() * (cube.dim() as f64).sqrt() * cube.width()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

pub fn f_hat(f: &AffinePolynomial, x: &[f64]) -> Result<f64> {
    let e = NormalizedEvaluator::new(f)?;
    e.check_point(x)?;
    Ok(e.f_hat(x))
}

pub fn grad_f_hat(f: &AffinePolynomial, x: &[f64]) -> Result<Vec<f64>> {
    let e = NormalizedEvaluator::new(f)?;
    e.check_point(x)?;
    Ok(e.grad_f_hat(x))
}

pub fn interval_f(f: &AffinePolynomial, cube: &Cube) -> Result<Interval> {
    let e = NormalizedEvaluator::new(f)?;
    e.check_point(cube.midpoint())?;
    Ok(e.interval_f(cube))
}

pub fn interval_grad(f: &AffinePolynomial, cube: &Cube) -> Result<IntervalBox> {
    let e = NormalizedEvaluator::new(f)?;
    e.check_point(cube.midpoint())?;
    Ok(e.interval_grad(cube))
}

#[cfg(test)]
mod tests;
