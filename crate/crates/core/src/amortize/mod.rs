//! Continuous amortization and the closed-form complexity bounds.
//!
//! Two interval-approximation regimes are registered:
//!
//! * `lipschitz`: the Lipschitz-based approximations of the `C`/`C'`
//!   predicates, with local size bound `1 / (2^{5/2} d n κ)^n`;
//! * `bgt`: approximations satisfying the Taylor-type hypothesis, with
//!   local size bound `1 / (2^{3n} d² κ)^n`.
//!
//! Only the first regime has a subdivision engine behind it; the second is
//! evaluated as formulas. Logarithms in exponents are base 2.

mod estimate;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use estimate::{
    EstimateReport, EstimatorRegistry, EstimatorSettings, ExpectationEstimator, Integrand, MedianOfMeans, Trapezoid,
    DEFAULT_BLOCKS, DEFAULT_POINTS_PER_AXIS, DEFAULT_SAMPLES, MAX_QUADRATURE_NODES,
};

use crate::condition::{bgt_size_bound_from_kappa, size_bound_from_kappa, Kappa, KappaField};
use crate::error::{Error, Result};
use crate::poly::{AffinePolynomial, MonomialBasis};

pub const DEFAULT_REGIME: &str = "lipschitz";

fn log2n(n: usize) -> f64 {
    (n as f64).log2()
}

/// One interval-approximation regime and the bounds it implies.
pub trait BoundRegime: Send + Sync {
    fn name(&self) -> &'static str;

    fn aliases(&self) -> &'static [&'static str] {
        &[]
    }

    /// Rejects degrees the regime's size bound does not cover.
    fn check_degree(&self, _d: u32) -> Result<()> {
        Ok(())
    }

    fn local_size_bound(&self, n: usize, d: u32, kappa: Kappa) -> f64;

    /// `(2a)^n E[2^n / b_f]` rewritten in terms of `E[κ^n]`, with `a^n` replaced by `max{1, a^n}`.
    fn condition_cube_bound(&self, n: usize, d: u32, a: f64, e_kappa_n: f64) -> f64;

    /// The expected final cube count for a random input, given `c₁c₂Kρ`.
    fn average_bound(&self, n: usize, d: u32, a: f64, product: f64) -> f64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LipschitzRegime;

impl BoundRegime for LipschitzRegime {
    fn name(&self) -> &'static str {
        "lipschitz"
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["paper_intervals"]
    }

    fn local_size_bound(&self, n: usize, d: u32, kappa: Kappa) -> f64 {
        size_bound_from_kappa(n, d, kappa)
    }

    /// `d^n max{1,a^n} 2^{n log n + 9n/2} E[κ^n]`.
    fn condition_cube_bound(&self, n: usize, d: u32, a: f64, e_kappa_n: f64) -> f64 {
        let nf = n as f64;
        (d as f64).powi(n as i32) * a.powi(n as i32).max(1.0) * 2f64.powf(nf * log2n(n) + 4.5 * nf) * e_kappa_n
    }

    /// `d^{(n²+3n)/2} max{1,a^n} 2^{(n²+16 n log n)/2} (c₁c₂Kρ)^{n+1}`.
    fn average_bound(&self, n: usize, d: u32, a: f64, product: f64) -> f64 {
        let nf = n as f64;
        (d as f64).powi(((n * n + 3 * n) / 2) as i32)
            * a.powi(n as i32).max(1.0)
            * 2f64.powf((nf * nf + 16.0 * nf * log2n(n)) / 2.0)
            * product.powi(n as i32 + 1)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BgtRegime;

impl BoundRegime for BgtRegime {
    fn name(&self) -> &'static str {
        "bgt"
    }

    fn aliases(&self) -> &'static [&'static str] {
        &["bgt_intervals", "taylor"]
    }

    fn check_degree(&self, d: u32) -> Result<()> {
        if d <= 1 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: "the bgt regime needs d > 1".into(),
            });
        }
        Ok(())
    }

    fn local_size_bound(&self, n: usize, d: u32, kappa: Kappa) -> f64 {
        bgt_size_bound_from_kappa(n, d, kappa)
    }

    /// `d^{2n} max{1,a^n} 2^{3n²+2n} E[κ^n]`.
    fn condition_cube_bound(&self, n: usize, d: u32, a: f64, e_kappa_n: f64) -> f64 {
        (d as f64).powi(2 * n as i32) * a.powi(n as i32).max(1.0) * 2f64.powi((3 * n * n + 2 * n) as i32) * e_kappa_n
    }

    /// `d^{(n²+5n)/2} max{1,a^n} 2^{(7n²+9 n log n)/2} (c₁c₂Kρ)^{n+1}`.
    fn average_bound(&self, n: usize, d: u32, a: f64, product: f64) -> f64 {
        let nf = n as f64;
        (d as f64).powi(((n * n + 5 * n) / 2) as i32)
            * a.powi(n as i32).max(1.0)
            * 2f64.powf((7.0 * nf * nf + 9.0 * nf * log2n(n)) / 2.0)
            * product.powi(n as i32 + 1)
    }
}

#[derive(Clone)]
pub struct RegimeRegistry {
    by_name: BTreeMap<&'static str, Arc<dyn BoundRegime>>,
    canonical: Vec<&'static str>,
}

impl RegimeRegistry {
    pub fn empty() -> RegimeRegistry {
        RegimeRegistry {
            by_name: BTreeMap::new(),
            canonical: Vec::new(),
        }
    }

    pub fn register(&mut self, r: Arc<dyn BoundRegime>) {
        self.canonical.push(r.name());
        for name in std::iter::once(r.name()).chain(r.aliases().iter().copied()) {
            self.by_name.insert(name, r.clone());
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn BoundRegime>> {
        self.by_name.get(name).cloned().ok_or_else(|| Error::UnknownStrategy {
            kind: "regime",
            name: name.to_string(),
            available: self.canonical.join(", "),
        })
    }

    pub fn names(&self) -> &[&'static str] {
        &self.canonical
    }
}

impl Default for RegimeRegistry {
    fn default() -> Self {
        let mut r = RegimeRegistry::empty();
        r.register(Arc::new(LipschitzRegime));
        r.register(Arc::new(BgtRegime));
        r
    }
}

/// Parameters of the closed-form bounds. `c1`, `c2` are the unspecified
/// universal constants (default 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub n: usize,
    pub d: u32,
    pub a: f64,
    pub k_rho: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub regime: String,
}

impl BoundConfig {
    pub fn new(n: usize, d: u32, a: f64, k_rho: f64) -> BoundConfig {
        BoundConfig {
            n,
            d,
            a,
            k_rho,
            c1: 1.0,
            c2: 1.0,
            sigma: None,
            regime: DEFAULT_REGIME.into(),
        }
    }

    pub fn with_regime(mut self, regime: &str) -> BoundConfig {
        self.regime = regime.into();
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> BoundConfig {
        self.sigma = Some(sigma);
        self
    }

    pub fn validate(&self) -> Result<Arc<dyn BoundRegime>> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if self.n == 0 {
            return bad("n", "need n >= 1".into());
        }
        if self.d == 0 {
            return bad("d", "need d >= 1".into());
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return bad("a", format!("must be positive, got {}", self.a));
        }
        if !(self.k_rho.is_finite() && self.k_rho > 0.0) {
            return bad("krho", format!("must be positive, got {}", self.k_rho));
        }
        for (name, c) in [("c1", self.c1), ("c2", self.c2)] {
            if !(c.is_finite() && c >= 1.0) {
                return bad(name, format!("universal constants must be >= 1, got {c}"));
            }
        }
        if let Some(s) = self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return bad("sigma", format!("must be positive, got {s}"));
            }
        }
        let regime = RegimeRegistry::default().get(&self.regime)?;
        regime.check_degree(self.d)?;
        Ok(regime)
    }

    pub fn raw_product(&self) -> f64 {
        self.c1 * self.c2 * self.k_rho
    }

    /// `max{1, c₁c₂Kρ}`: the bounds are stated under `c₁c₂Kρ >= 1`.
    pub fn effective_product(&self) -> f64 {
        self.raw_product().max(1.0)
    }

    pub fn product_clamped(&self) -> bool {
        self.raw_product() < 1.0
    }

    /// `N = binom(n + d, n)`, the number of monomials.
    pub fn monomial_count(&self) -> Result<usize> {
        Ok(MonomialBasis::get(self.n, self.d)?.len())
    }
}

pub fn average_bound(config: &BoundConfig) -> Result<f64> {
    let regime = config.validate()?;
    Ok(regime.average_bound(config.n, config.d, config.a, config.effective_product()))
}

fn smoothing_factor(config: &BoundConfig) -> Result<f64> {
    let sigma = config.sigma.ok_or_else(|| Error::InvalidParameter {
        name: "sigma",
        reason: "smoothed bounds need sigma > 0".into(),
    })?;
    Ok((1.0 + 1.0 / sigma).powi(config.n as i32 + 1))
}

/// [`average_bound`] times `(1 + 1/σ)^{n+1}`.
pub fn smoothed_bound(config: &BoundConfig) -> Result<f64> {
    let base = average_bound(config)?;
    Ok(base * smoothing_factor(config)?)
}

/// `E_f E_x κ^n <= d^{(n²+n)/2} 2^{(n² + 3 log n + 9)/2} (c₁c₂Kρ)^{n+1}`.
pub fn expected_kappa_n_bound(config: &BoundConfig) -> Result<f64> {
    config.validate()?;
    let (n, nf) = (config.n, config.n as f64);
    Ok((config.d as f64).powi(((n * n + n) / 2) as i32)
        * 2f64.powf((nf * nf + 3.0 * log2n(n) + 9.0) / 2.0)
        * config.effective_product().powi(n as i32 + 1))
}

/// `P(κ^n >= t) <= 4 (c₁c₂Kρ sqrt(N) / sqrt(n(n+1)))^{n+1} ln(t)^{(n+1)/2} / t^{1+1/n}` for `t >= e^n`.
pub fn kappa_tail_bound(config: &BoundConfig, t: f64) -> Result<f64> {
    config.validate()?;
    let nf = config.n as f64;
    // Tolerate the last-bit difference between exp(n) and e.powi(n).
    if !(t.is_finite() && t >= nf.exp() * (1.0 - 4.0 * f64::EPSILON)) {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("the tail bound needs t >= e^n = {}, got {t}", nf.exp()),
        });
    }
    let big_n = config.monomial_count()? as f64;
    let base = config.effective_product() * big_n.sqrt() / (nf * (nf + 1.0)).sqrt();
    Ok(4.0 * base.powi(config.n as i32 + 1) * t.ln().powf((nf + 1.0) / 2.0) / t.powf(1.0 + 1.0 / nf))
}

/// [`kappa_tail_bound`] for the smoothed input, times `(1 + 1/σ)^{n+1}`.
pub fn smoothed_kappa_tail_bound(config: &BoundConfig, t: f64) -> Result<f64> {
    let base = kappa_tail_bound(config, t)?;
    Ok(base * smoothing_factor(config)?)
}

/// `E_{x ∈ [-a,a]^n} κ_aff(f, x)^n`; singular points are excluded and counted.
pub fn expectation_kappa_n(f: &AffinePolynomial, a: f64, settings: &EstimatorSettings) -> Result<EstimateReport> {
    let field = KappaField::new(f)?;
    let n = f.n() as i32;
    let h = move |x: &[f64]| field.kappa(x).finite().map(|k| k.powi(n));
    settings.build()?.estimate(&h, f.n(), a)
}

/// Median-of-means estimate with the default block count.
pub fn expectation_kappa_n_mc(f: &AffinePolynomial, a: f64, samples: usize, seed: u64) -> Result<EstimateReport> {
    expectation_kappa_n(f, a, &EstimatorSettings::monte_carlo(samples, seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmortizedBound {
    pub regime: String,
    /// `max{1, (2a)^n E[2^n / b_f]}`.
    pub bound: f64,
    pub report: EstimateReport,
}

/// `max{1, ∫_{[-a,a]^n} 2^n / b_f(x) dx}` with the integral estimated as
/// `(2a)^n` times the sample mean of `2^n / b_f`.
pub fn amortized_cube_bound(
    f: &AffinePolynomial,
    a: f64,
    regime: &str,
    settings: &EstimatorSettings,
) -> Result<AmortizedBound> {
    let regime = RegimeRegistry::default().get(regime)?;
    regime.check_degree(f.d())?;
    let field = KappaField::new(f)?;
    let (n, d) = (f.n(), f.d());
    let scale = 2f64.powi(n as i32);
    let r = regime.clone();
    let h = move |x: &[f64]| {
        let kappa = field.kappa(x);
        (!kappa.is_singular()).then(|| scale / r.local_size_bound(n, d, kappa))
    };
    let report = settings.build()?.estimate(&h, n, a)?;
    let bound = ((2.0 * a).powi(n as i32) * report.estimate).max(1.0);
    Ok(AmortizedBound {
        regime: regime.name().into(),
        bound,
        report,
    })
}
