use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::poly::{AffinePolynomial, MonomialBasis};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients uniform in `[-1, 1]`.
pub fn uniform_poly(rng: &mut ChaCha8Rng, n: usize, d: u32) -> AffinePolynomial {
    let basis = MonomialBasis::get(n, d).unwrap();
    let coeffs = (0..basis.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    AffinePolynomial::from_coeffs(n, d, coeffs).unwrap()
}

/// Gaussian Weyl coordinates, built without going through `randpoly`.
pub fn kss_poly(rng: &mut ChaCha8Rng, n: usize, d: u32) -> AffinePolynomial {
    let basis = MonomialBasis::get(n, d).unwrap();
    let coeffs = (0..basis.len())
        .map(|i| basis.binom(i).sqrt() * rng.sample::<f64, _>(StandardNormal))
        .collect();
    AffinePolynomial::from_coeffs(n, d, coeffs).unwrap()
}

pub fn point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..r)).collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
