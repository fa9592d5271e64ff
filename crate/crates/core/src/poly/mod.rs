//! Dense real polynomials with the Weyl inner product.
//!
//! Coefficients are stored in graded lexicographic order (see
//! [`MonomialBasis`]). An [`AffinePolynomial`] in `n` variables with degree
//! bound `d` and its homogenization, a [`HomogeneousPolynomial`] in `n + 1`
//! variables, share the same coefficient vector; only the interpretation of
//! the monomials differs.

mod basis;
mod eval;
mod io;

use std::fmt;
use std::sync::Arc;

pub use basis::{MonomialBasis, MAX_VARS};
pub use io::{Polynomial, PolynomialDocument, Term};

use crate::error::{Error, Result};

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        MultiIndex(v.to_vec())
    }
}

/// Coordinates `f_α / sqrt(binom(d, α))` in which the Weyl product is Euclidean.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylCoordinates(Vec<f64>);

impl WeylCoordinates {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &WeylCoordinates) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone)]
struct Dense {
    basis: Arc<MonomialBasis>,
    coeffs: Vec<f64>,
    nested: Vec<f64>,
}

impl Dense {
    fn new(basis: Arc<MonomialBasis>, coeffs: Vec<f64>) -> Dense {
        let mut nested = vec![0.0; coeffs.len()];
        for (i, &c) in coeffs.iter().enumerate() {
            nested[basis.nested_position(i)] = c;
        }
        Dense { basis, coeffs, nested }
    }

    fn from_coeffs(n: usize, d: u32, coeffs: Vec<f64>) -> Result<Dense> {
        let basis = MonomialBasis::get(n, d)?;
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        Ok(Dense::new(basis, coeffs))
    }

    fn weyl_inner(&self, other: &Dense) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(self.basis.binoms())
            .map(|((a, b), w)| a * b / w)
            .sum())
    }

    fn weyl_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.basis.binoms())
            .map(|(c, w)| c * c / w)
            .sum::<f64>()
            .sqrt()
    }

    fn weyl_coordinates(&self) -> WeylCoordinates {
        WeylCoordinates(
            self.coeffs
                .iter()
                .zip(self.basis.binoms())
                .map(|(c, w)| c / w.sqrt())
                .collect(),
        )
    }

    fn check_same_space(&self, other: &Dense) -> Result<()> {
        if self.basis.n() != other.basis.n() || self.basis.d() != other.basis.d() {
            return Err(Error::SpaceMismatch {
                n1: self.basis.n(),
                d1: self.basis.d(),
                n2: other.basis.n(),
                d2: other.basis.d(),
            });
        }
        Ok(())
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Dense {
        Dense::new(self.basis.clone(), self.coeffs.iter().map(|&c| f(c)).collect())
    }

    fn zip_with(&self, other: &Dense, f: impl Fn(f64, f64) -> f64) -> Result<Dense> {
        self.check_same_space(other)?;
        Ok(Dense::new(
            self.basis.clone(),
            self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }
}

/// A real polynomial in `n` variables of degree at most `d`.
#[derive(Clone)]
pub struct AffinePolynomial(Dense);

/// A homogeneous polynomial of degree `d` in `X_0, X_1, ..., X_n`.
#[derive(Clone)]
pub struct HomogeneousPolynomial(Dense);

macro_rules! shared_api {
    ($ty:ident) => {
        impl $ty {
            /// Coefficients in graded lexicographic order.
            pub fn from_coeffs(n: usize, d: u32, coeffs: Vec<f64>) -> Result<$ty> {
                Dense::from_coeffs(n, d, coeffs).map($ty)
            }

            pub fn zero(n: usize, d: u32) -> Result<$ty> {
                let basis = MonomialBasis::get(n, d)?;
                let len = basis.len();
                Ok($ty(Dense::new(basis, vec![0.0; len])))
            }

            /// Number of affine variables `n`.
            pub fn n(&self) -> usize {
                self.0.basis.n()
            }

            pub fn d(&self) -> u32 {
                self.0.basis.d()
            }

            pub fn basis(&self) -> &Arc<MonomialBasis> {
                &self.0.basis
            }

            pub fn coeffs(&self) -> &[f64] {
                &self.0.coeffs
            }

            pub fn is_zero(&self) -> bool {
                self.0.coeffs.iter().all(|&c| c == 0.0)
            }

            pub fn weyl_norm(&self) -> f64 {
                self.0.weyl_norm()
            }

            pub fn weyl_inner(&self, other: &$ty) -> Result<f64> {
                self.0.weyl_inner(&other.0)
            }

            pub fn weyl_coordinates(&self) -> WeylCoordinates {
                self.0.weyl_coordinates()
            }

            pub fn scale(&self, lambda: f64) -> $ty {
                $ty(self.0.map(|c| lambda * c))
            }

            pub fn add(&self, other: &$ty) -> Result<$ty> {
                self.0.zip_with(&other.0, |a, b| a + b).map($ty)
            }

            pub fn sub(&self, other: &$ty) -> Result<$ty> {
                self.0.zip_with(&other.0, |a, b| a - b).map($ty)
            }
        }
    };
}

shared_api!(AffinePolynomial);
shared_api!(HomogeneousPolynomial);

impl AffinePolynomial {
    /// Builds a polynomial from `(α, coefficient)` pairs; repeated monomials accumulate.
    pub fn new<I, A>(n: usize, d: u32, terms: I) -> Result<AffinePolynomial>
    where
        I: IntoIterator<Item = (A, f64)>,
        A: AsRef<[u32]>,
    {
        let basis = MonomialBasis::get(n, d)?;
        let mut coeffs = vec![0.0; basis.len()];
        for (alpha, c) in terms {
            let alpha = alpha.as_ref();
            let idx = (alpha.len() == n)
                .then(|| basis.index_of(alpha))
                .flatten()
                .ok_or_else(|| Error::InvalidMonomial {
                    alpha: alpha.to_vec(),
                    n,
                    d,
                    homogeneous: false,
                })?;
            coeffs[idx] += c;
        }
        Ok(AffinePolynomial(Dense::new(basis, coeffs)))
    }

    /// The constant polynomial `c` viewed in degree bound `d`.
    pub fn constant(n: usize, d: u32, c: f64) -> Result<AffinePolynomial> {
        AffinePolynomial::new(n, d, [(vec![0; n], c)])
    }

    pub fn coeff(&self, alpha: &[u32]) -> f64 {
        self.0.basis.index_of(alpha).map_or(0.0, |i| self.0.coeffs[i])
    }

    /// Nonzero terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        let b = &self.0.basis;
        self.0
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(move |(i, &c)| (MultiIndex::from(b.exponents(i)), c))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.value_at(x))
    }

    pub fn evaluate_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let (_, g) = self.value_and_gradient_at(x);
        Ok(g)
    }

    /// Value without a dimension check; `x.len()` must equal `n`.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        eval::value(&self.0.basis, &self.0.nested, 1.0, x)
    }

    /// Value and gradient without a dimension check.
    pub fn value_and_gradient_at(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = eval::jet(&self.0.basis, &self.0.nested, 1.0, x);
        (v, g[1..=self.n()].to_vec())
    }

    /// Fills `grad` (length `n`) and returns the value.
    pub fn value_and_gradient_into(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (v, g) = eval::jet(&self.0.basis, &self.0.nested, 1.0, x);
        grad.copy_from_slice(&g[1..=self.n()]);
        v
    }

    /// `f^h = Σ f_α X_0^{d-|α|} X^α`.
    pub fn homogenize(&self) -> HomogeneousPolynomial {
        HomogeneousPolynomial(self.0.clone())
    }

    /// Partial derivatives `(∂f/∂x_1, ..., ∂f/∂x_n)`, each in degree bound `d - 1`.
    pub fn gradient_system(&self) -> Result<Vec<AffinePolynomial>> {
        let n = self.n();
        let d = self.d();
        if d == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "gradient system needs degree bound at least 1".into(),
            });
        }
        let target = MonomialBasis::get(n, d - 1)?;
        let src = &self.0.basis;
        let mut out = Vec::with_capacity(n);
        let mut alpha = vec![0u32; n];
        for var in 0..n {
            let mut coeffs = vec![0.0; target.len()];
            for (i, &c) in self.0.coeffs.iter().enumerate() {
                let e = src.exponents(i);
                if e[var] == 0 || c == 0.0 {
                    continue;
                }
                alpha.copy_from_slice(e);
                alpha[var] -= 1;
                let j = target.index_of(&alpha).expect("lowered monomial lies in degree d-1");
                coeffs[j] += e[var] as f64 * c;
            }
            out.push(AffinePolynomial(Dense::new(target.clone(), coeffs)));
        }
        Ok(out)
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

/// Joint Weyl norm `sqrt(Σ ‖f_i‖²)` of a polynomial system.
pub fn system_weyl_norm(system: &[AffinePolynomial]) -> f64 {
    system.iter().map(|p| p.weyl_norm().powi(2)).sum::<f64>().sqrt()
}

impl HomogeneousPolynomial {
    /// Builds from `(β, coefficient)` pairs where `β = (β_0, β_1, ..., β_n)` has `|β| = d`.
    pub fn new<I, A>(n: usize, d: u32, terms: I) -> Result<HomogeneousPolynomial>
    where
        I: IntoIterator<Item = (A, f64)>,
        A: AsRef<[u32]>,
    {
        let basis = MonomialBasis::get(n, d)?;
        let mut coeffs = vec![0.0; basis.len()];
        for (beta, c) in terms {
            let beta = beta.as_ref();
            let bad = || Error::InvalidMonomial {
                alpha: beta.to_vec(),
                n,
                d,
                homogeneous: true,
            };
            if beta.len() != n + 1 || beta.iter().sum::<u32>() != d {
                return Err(bad());
            }
            let idx = basis.index_of(&beta[1..]).ok_or_else(bad)?;
            coeffs[idx] += c;
        }
        Ok(HomogeneousPolynomial(Dense::new(basis, coeffs)))
    }

    pub fn coeff(&self, beta: &[u32]) -> f64 {
        if beta.len() != self.n() + 1 || beta.iter().sum::<u32>() != self.d() {
            return 0.0;
        }
        self.0.basis.index_of(&beta[1..]).map_or(0.0, |i| self.0.coeffs[i])
    }

    /// Nonzero terms as full exponent vectors `(β_0, ..., β_n)`.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        let b = &self.0.basis;
        let d = self.d();
        self.0
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(move |(i, &c)| {
                let e = b.exponents(i);
                let mut beta = Vec::with_capacity(e.len() + 1);
                beta.push(d - e.iter().sum::<u32>());
                beta.extend_from_slice(e);
                (MultiIndex(beta), c)
            })
    }

    /// `F(y)` for `y ∈ R^{n+1}`.
    pub fn evaluate(&self, y: &[f64]) -> Result<f64> {
        self.check_point(y)?;
        Ok(self.value_at(y))
    }

    pub fn evaluate_gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_point(y)?;
        Ok(self.value_and_gradient_at(y).1)
    }

    pub fn value_at(&self, y: &[f64]) -> f64 {
        eval::value(&self.0.basis, &self.0.nested, y[0], &y[1..])
    }

    /// Value and the full gradient `(∂_0 F, ..., ∂_n F)`.
    pub fn value_and_gradient_at(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = eval::jet(&self.0.basis, &self.0.nested, y[0], &y[1..]);
        (v, g[..=self.n()].to_vec())
    }

    /// Sets `X_0 = 1`.
    pub fn dehomogenize(&self) -> AffinePolynomial {
        AffinePolynomial(self.0.clone())
    }

    fn check_point(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n() + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n() + 1,
                got: y.len(),
            });
        }
        Ok(())
    }
}

/// `⟨f, g⟩_W = Σ_α binom(d, α)^{-1} f_α g_α`.
pub fn weyl_inner(f: &HomogeneousPolynomial, g: &HomogeneousPolynomial) -> Result<f64> {
    f.weyl_inner(g)
}

impl fmt::Debug for AffinePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffinePolynomial")
            .field("n", &self.n())
            .field("d", &self.d())
            .field("terms", &self.terms().map(|(a, c)| (a.0, c)).collect::<Vec<_>>())
            .finish()
    }
}

impl fmt::Debug for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousPolynomial")
            .field("n", &self.n())
            .field("d", &self.d())
            .field("terms", &self.terms().map(|(a, c)| (a.0, c)).collect::<Vec<_>>())
            .finish()
    }
}

impl PartialEq for AffinePolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n() && self.d() == other.d() && self.coeffs() == other.coeffs()
    }
}

impl PartialEq for HomogeneousPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n() && self.d() == other.d() && self.coeffs() == other.coeffs()
    }
}
