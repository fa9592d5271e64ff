//! Random polynomial models with `sqrt(binom(d, α))`-scaled i.i.d.
//! coefficients, smoothed instances `f + σ‖f‖g`, and the subgaussian /
//! anti-concentration constants `(K, ρ)` of each model.
//!
//! Every coefficient is drawn from its own ChaCha8 stream keyed by
//! `(seed, α-index)`, so the result is independent of evaluation order.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::poly::{AffinePolynomial, HomogeneousPolynomial, MonomialBasis};

/// `K` and `ρ` as reported for a coefficient model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    #[serde(rename = "K")]
    pub k: f64,
    pub rho: f64,
    #[serde(rename = "K_rho")]
    pub k_rho: f64,
    pub note: String,
}

impl ModelParameters {
    fn new(k: f64, rho: f64, note: impl Into<String>) -> ModelParameters {
        ModelParameters {
            k,
            rho,
            k_rho: k * rho,
            note: note.into(),
        }
    }
}

/// Distribution of a single Weyl coordinate `c_α`.
pub trait CoefficientModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn p(&self) -> Option<f64> {
        None
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64;

    fn parameters(&self) -> ModelParameters;

    fn spec(&self) -> DobroSpec {
        DobroSpec {
            model: self.name().to_string(),
            p: self.p(),
        }
    }
}

/// Standard Gaussian coefficients.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kss;

impl CoefficientModel for Kss {
    fn name(&self) -> &'static str {
        "kss"
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        rng.sample(StandardNormal)
    }

    fn parameters(&self) -> ModelParameters {
        let rho = 2.0 / (2.0 * std::f64::consts::PI).sqrt();
        ModelParameters::new(
            0.5,
            rho,
            "rho = 2 * max density; K = 1/2 so that K*rho = 1/sqrt(2*pi) as stated for this model",
        )
    }
}

/// Coefficients uniform on `[-1, 1]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct WeylUniform;

impl CoefficientModel for WeylUniform {
    fn name(&self) -> &'static str {
        "weyl"
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        rng.random_range(-1.0..=1.0)
    }

    fn parameters(&self) -> ModelParameters {
        ModelParameters::new(
            0.5,
            1.0,
            "K = sup_q (E|X|^q)^(1/q)/sqrt(q) = 1/2 at q = 1; rho = 2 * max density = 1",
        )
    }
}

/// Coefficients with density `c_p exp(-|t|^p)`, `p >= 2`, sampled as
/// `±G^{1/p}` with `G ~ Gamma(1/p, 1)`.
#[derive(Clone, Debug)]
pub struct PRandom {
    p: f64,
    gamma: Gamma<f64>,
}

impl PRandom {
    pub fn new(p: f64) -> Result<PRandom> {
        if !(p.is_finite() && p >= 2.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("need a finite p >= 2, got {p}"),
            });
        }
        let gamma = Gamma::new(1.0 / p, 1.0).map_err(|e| Error::InvalidParameter {
            name: "p",
            reason: e.to_string(),
        })?;
        Ok(PRandom { p, gamma })
    }

    /// `E|X|^q = Γ((q+1)/p) / Γ(1/p)`.
    pub fn abs_moment(&self, q: f64) -> f64 {
        self.ln_abs_moment(q).exp()
    }

    fn ln_abs_moment(&self, q: f64) -> f64 {
        ln_gamma((q + 1.0) / self.p) - ln_gamma(1.0 / self.p)
    }

    /// `sup_{q >= 1} (E|X|^q)^{1/q} / sqrt(q)`, maximized on a grid over `q ∈ [1, 400]`.
    fn psi2_norm(&self) -> f64 {
        (0..=39_900)
            .map(|i| 1.0 + 0.01 * i as f64)
            .map(|q| (self.ln_abs_moment(q) / q).exp() / q.sqrt())
            .fold(0.0, f64::max)
    }
}

impl CoefficientModel for PRandom {
    fn name(&self) -> &'static str {
        "prandom"
    }

    fn p(&self) -> Option<f64> {
        Some(self.p)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let magnitude = self.gamma.sample(rng).powf(1.0 / self.p);
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }

    fn parameters(&self) -> ModelParameters {
        ModelParameters::new(
            self.psi2_norm(),
            self.p / gamma(1.0 / self.p),
            "K from the absolute moments Gamma((q+1)/p)/Gamma(1/p), maximized over q; rho = 2 * max density = p/Gamma(1/p)",
        )
    }
}

/// Serializable model selection, `{"model": "kss|weyl|prandom", "p": float?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DobroSpec {
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl DobroSpec {
    pub fn kss() -> DobroSpec {
        DobroSpec {
            model: "kss".into(),
            p: None,
        }
    }

    pub fn weyl() -> DobroSpec {
        DobroSpec {
            model: "weyl".into(),
            p: None,
        }
    }

    pub fn prandom(p: f64) -> DobroSpec {
        DobroSpec {
            model: "prandom".into(),
            p: Some(p),
        }
    }

    pub fn build(&self) -> Result<Arc<dyn CoefficientModel>> {
        ModelRegistry::default().get(&self.model, self.p)
    }
}

type Factory = fn(Option<f64>) -> Result<Arc<dyn CoefficientModel>>;

#[derive(Clone)]
pub struct ModelRegistry {
    by_name: BTreeMap<&'static str, Factory>,
    canonical: Vec<&'static str>,
}

impl ModelRegistry {
    pub fn empty() -> ModelRegistry {
        ModelRegistry {
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

    pub fn get(&self, name: &str, p: Option<f64>) -> Result<Arc<dyn CoefficientModel>> {
        let factory = self.by_name.get(name).ok_or_else(|| Error::UnknownStrategy {
            kind: "coefficient model",
            name: name.to_string(),
            available: self.canonical.join(", "),
        })?;
        factory(p)
    }

    pub fn names(&self) -> &[&'static str] {
        &self.canonical
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut r = ModelRegistry::empty();
        r.register("kss", &["gaussian"], |_| Ok(Arc::new(Kss)));
        r.register("weyl", &["uniform", "weyl_uniform"], |_| Ok(Arc::new(WeylUniform)));
        r.register("prandom", &["p_random", "p-random"], |p| {
            let p = p.ok_or_else(|| Error::InvalidParameter {
                name: "p",
                reason: "the prandom model needs an exponent p >= 2".into(),
            })?;
            Ok(Arc::new(PRandom::new(p)?))
        });
        r
    }
}

pub fn model_parameters(spec: &DobroSpec) -> Result<ModelParameters> {
    Ok(spec.build()?.parameters())
}

fn coefficient_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index as u64);
    r
}

/// Derives an independent seed from a base seed and a tuple of labels.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    for &label in labels {
        r.set_stream(label);
        r = ChaCha8Rng::seed_from_u64(r.random());
    }
    r.random()
}

/// A homogeneous polynomial of degree `d` in `n + 1` variables with
/// coefficients `sqrt(binom(d, α)) c_α`.
pub fn sample_dobro(model: &dyn CoefficientModel, n: usize, d: u32, seed: u64) -> Result<HomogeneousPolynomial> {
    let basis = MonomialBasis::get(n, d)?;
    let coeffs = (0..basis.len())
        .map(|i| basis.binom(i).sqrt() * model.sample(&mut coefficient_rng(seed, i)))
        .collect();
    HomogeneousPolynomial::from_coeffs(n, d, coeffs)
}

/// The dehomogenization at `X_0 = 1` of [`sample_dobro`].
pub fn sample_dobro_affine(model: &dyn CoefficientModel, n: usize, d: u32, seed: u64) -> Result<AffinePolynomial> {
    Ok(sample_dobro(model, n, d, seed)?.dehomogenize())
}

#[derive(Clone, Debug)]
pub struct SmoothingSpec {
    pub base: AffinePolynomial,
    pub sigma: f64,
    pub noise: DobroSpec,
}

/// `q_σ = f + σ‖f‖g` with `g` drawn from `spec.noise` under `seed`.
pub fn smoothed_instance(spec: &SmoothingSpec, seed: u64) -> Result<AffinePolynomial> {
    if !(spec.sigma.is_finite() && spec.sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be positive, got {}", spec.sigma),
        });
    }
    let norm = spec.base.weyl_norm();
    if norm == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let model = spec.noise.build()?;
    let g = sample_dobro_affine(model.as_ref(), spec.base.n(), spec.base.d(), seed)?;
    spec.base.add(&g.scale(spec.sigma * norm))
}

#[cfg(test)]
mod tests;
