use serde::{Deserialize, Serialize};

use super::{AffinePolynomial, HomogeneousPolynomial};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub alpha: Vec<u32>,
    pub coeff: f64,
}

/// On-disk polynomial: `{"n", "d", "homogeneous", "terms": [{"alpha", "coeff"}]}`.
///
/// Unlisted monomials are zero. `alpha` has length `n` for affine
/// polynomials and `n + 1` (leading `X_0` exponent) for homogeneous ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialDocument {
    pub n: usize,
    pub d: u32,
    #[serde(default)]
    pub homogeneous: bool,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Polynomial {
    Affine(AffinePolynomial),
    Homogeneous(HomogeneousPolynomial),
}

impl Polynomial {
    pub fn from_document(doc: &PolynomialDocument) -> Result<Polynomial> {
        if doc.d == 0 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "degree bound must be at least 1".into(),
            });
        }
        if let Some(t) = doc.terms.iter().find(|t| !t.coeff.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "coeff",
                reason: format!("non-finite coefficient for monomial {:?}", t.alpha),
            });
        }
        let terms = doc.terms.iter().map(|t| (t.alpha.as_slice(), t.coeff));
        Ok(if doc.homogeneous {
            Polynomial::Homogeneous(HomogeneousPolynomial::new(doc.n, doc.d, terms)?)
        } else {
            Polynomial::Affine(AffinePolynomial::new(doc.n, doc.d, terms)?)
        })
    }

    pub fn to_document(&self) -> PolynomialDocument {
        let (n, d, homogeneous, terms): (usize, u32, bool, Vec<Term>) = match self {
            Polynomial::Affine(p) => (
                p.n(),
                p.d(),
                false,
                p.terms().map(|(a, coeff)| Term { alpha: a.0, coeff }).collect(),
            ),
            Polynomial::Homogeneous(p) => (
                p.n(),
                p.d(),
                true,
                p.terms().map(|(a, coeff)| Term { alpha: a.0, coeff }).collect(),
            ),
        };
        PolynomialDocument {
            n,
            d,
            homogeneous,
            terms,
        }
    }

    pub fn from_json(s: &str) -> Result<Polynomial> {
        let doc: PolynomialDocument = serde_json::from_str(s)?;
        Polynomial::from_document(&doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("polynomial document serializes")
    }

    /// The affine polynomial, dehomogenizing at `X_0 = 1` if needed.
    pub fn into_affine(self) -> AffinePolynomial {
        match self {
            Polynomial::Affine(p) => p,
            Polynomial::Homogeneous(p) => p.dehomogenize(),
        }
    }
}

impl From<AffinePolynomial> for Polynomial {
    fn from(p: AffinePolynomial) -> Self {
        Polynomial::Affine(p)
    }
}

impl From<HomogeneousPolynomial> for Polynomial {
    fn from(p: HomogeneousPolynomial) -> Self {
        Polynomial::Homogeneous(p)
    }
}
