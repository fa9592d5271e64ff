//! Local condition numbers and the local size bounds they induce.
//!
//! `κ_aff(f, x)` is computed along two independent routes:
//!
//! * [`kappa_direct`] evaluates `‖F‖ / sqrt(F(y)² + ‖∂_y F|_{T_y S^n}‖² / d)`
//!   with `F = f^h` and `y = φ(x)`;
//! * [`kappa_projection`] computes `‖f‖ / ‖P_x f‖`, the projection onto the
//!   orthogonal complement of the polynomials singular at `x`, by a Gram
//!   solve in Weyl-orthonormal coordinates.
//!
//! The two agree because `‖f‖ / κ_aff(f, x)` is the Weyl distance from `f`
//! to that singular subspace.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{phi, NormalizedEvaluator};
use crate::poly::{AffinePolynomial, MAX_VARS};

/// Denominators below this are treated as exact zeros.
pub const SINGULAR_THRESHOLD: f64 = 1e-300;

/// A condition number, or the marker for a point where `f` is singular.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kappa {
    Finite(f64),
    Singular,
}

impl Kappa {
    fn from_ratio(norm: f64, denom: f64) -> Kappa {
        if denom < SINGULAR_THRESHOLD {
            Kappa::Singular
        } else {
            Kappa::Finite(norm / denom)
        }
    }

    pub fn is_singular(self) -> bool {
        matches!(self, Kappa::Singular)
    }

    /// The value, with `+∞` for the singular marker.
    pub fn value(self) -> f64 {
        match self {
            Kappa::Finite(k) => k,
            Kappa::Singular => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Kappa::Finite(k) => Some(k),
            Kappa::Singular => None,
        }
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Finite(k) => write!(f, "{k}"),
            Kappa::Singular => f.write_str("singular"),
        }
    }
}

fn nonzero_norm(f: &AffinePolynomial) -> Result<f64> {
    let norm = f.weyl_norm();
    if norm == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    Ok(norm)
}

fn check_point(f: &AffinePolynomial, x: &[f64]) -> Result<()> {
    if x.len() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: x.len(),
        });
    }
    Ok(())
}

/// `κ(f^h, φ(x))` from the homogeneous value and tangential gradient.
pub fn kappa_direct(f: &AffinePolynomial, x: &[f64]) -> Result<Kappa> {
    check_point(f, x)?;
    let norm = nonzero_norm(f)?;
    Ok(kappa_direct_unchecked(f, norm, x))
}

/// Same as [`kappa_direct`] with the norm supplied and no argument checks.
pub fn kappa_direct_unchecked(f: &AffinePolynomial, norm: f64, x: &[f64]) -> Kappa {
    let big_f = f.homogenize();
    let y = phi(x);
    let (v, g) = big_f.value_and_gradient_at(&y);
    let radial: f64 = g.iter().zip(&y).map(|(a, b)| a * b).sum();
    let g2: f64 = g.iter().map(|a| a * a).sum();
    let tangential = (g2 - radial * radial).max(0.0);
    let denom = (v * v + tangential / f.d().max(1) as f64).sqrt();
    Kappa::from_ratio(norm, denom)
}

/// Allocation-free `κ_aff(f, ·)` for repeated evaluation.
///
/// Works from the affine value and gradient: with `s = 1 + ‖x‖²`,
/// `F(φ(x)) = s^{-d/2} f(x)` and `∂F(φ(x)) = s^{-(d-1)/2} (d f - ⟨x, ∂f⟩, ∂f)(x)`.
#[derive(Clone, Debug)]
pub struct KappaField<'a> {
    f: &'a AffinePolynomial,
    norm: f64,
    d: f64,
}

impl<'a> KappaField<'a> {
    pub fn new(f: &'a AffinePolynomial) -> Result<KappaField<'a>> {
        let norm = nonzero_norm(f)?;
        Ok(KappaField {
            f,
            norm,
            d: f.d().max(1) as f64,
        })
    }

    pub fn polynomial(&self) -> &AffinePolynomial {
        self.f
    }

    pub fn kappa(&self, x: &[f64]) -> Kappa {
        let mut g = [0.0; MAX_VARS];
        let g = &mut g[..x.len()];
        let v = self.f.value_and_gradient_into(x, g);
        let deg = self.f.d() as f64;
        let xg: f64 = x.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
        let s = 1.0 + x.iter().map(|a| a * a).sum::<f64>();
        let g0 = deg * v - xg;
        let full = g0 * g0 + g.iter().map(|a| a * a).sum::<f64>();
        // ⟨∂F(1,x), (1,x)⟩ = d f(x) by Euler's identity.
        let radial = deg * v;
        let tangential = (full - radial * radial / s).max(0.0);
        let scale = s.powf(-0.5 * deg);
        let value = v * scale;
        let tangential = tangential * s * scale * scale;
        Kappa::from_ratio(self.norm, (value * value + tangential / self.d).sqrt())
    }
}

/// `‖f‖ / ‖P_x f‖` with `P_x` the orthogonal projection onto the span of the
/// Riesz representers of `g ↦ g(x)` and `g ↦ ∂_i g(x)`.
pub fn kappa_projection(f: &AffinePolynomial, x: &[f64]) -> Result<Kappa> {
    check_point(f, x)?;
    let norm = nonzero_norm(f)?;
    let n = f.n();
    let basis = f.basis();
    let len = basis.len();

    // Rows are the functionals applied to the Weyl-orthonormal monomials
    // sqrt(binom(d, α)) x^α.
    let mut reps = DMatrix::<f64>::zeros(n + 1, len);
    for i in 0..len {
        let alpha = basis.exponents(i);
        let s = basis.binom(i).sqrt();
        let mono: f64 = alpha.iter().zip(x).map(|(&a, &xi)| xi.powi(a as i32)).product();
        reps[(0, i)] = s * mono;
        for k in 0..n {
            if alpha[k] == 0 {
                continue;
            }
            let partial: f64 = alpha
                .iter()
                .zip(x)
                .enumerate()
                .map(|(j, (&a, &xi))| {
                    if j == k {
                        a as f64 * xi.powi(a as i32 - 1)
                    } else {
                        xi.powi(a as i32)
                    }
                })
                .product();
            reps[(k + 1, i)] = s * partial;
        }
    }
    // Row scaling leaves the span unchanged and keeps the Gram matrix well scaled.
    for mut row in reps.row_iter_mut() {
        let r = row.norm();
        if r > 0.0 {
            row /= r;
        }
    }

    let u = DVector::from_vec(f.weyl_coordinates().into_vec());
    let b = &reps * &u;
    let gram = &reps * reps.transpose();
    let chol = gram.cholesky().ok_or(Error::RankDeficient)?;
    let z = chol.l().solve_lower_triangular(&b).ok_or(Error::RankDeficient)?;
    Ok(Kappa::from_ratio(norm, z.norm()))
}

/// Both condition numbers and the normalized quantities at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionSample {
    pub x: Vec<f64>,
    pub kappa_direct: Kappa,
    pub kappa_projection: Kappa,
    pub f_hat_value: f64,
    pub grad_hat_norm: f64,
}

impl ConditionSample {
    pub fn at(f: &AffinePolynomial, x: &[f64]) -> Result<ConditionSample> {
        let kd = kappa_direct(f, x)?;
        let kp = kappa_projection(f, x)?;
        let e = NormalizedEvaluator::new(f)?;
        let g = e.grad_f_hat(x);
        Ok(ConditionSample {
            x: x.to_vec(),
            kappa_direct: kd,
            kappa_projection: kp,
            f_hat_value: e.f_hat(x),
            grad_hat_norm: g.iter().map(|v| v * v).sum::<f64>().sqrt(),
        })
    }

    /// `|κ_proj - κ_direct| / κ_direct`; `None` if either is singular.
    pub fn relative_gap(&self) -> Option<f64> {
        let a = self.kappa_direct.finite()?;
        let b = self.kappa_projection.finite()?;
        Some((a - b).abs() / a)
    }
}

/// `1 / (2^{5/2} d n κ)^n`, a local size bound for the `C'`/interval predicates.
pub fn size_bound_from_kappa(n: usize, d: u32, kappa: Kappa) -> f64 {
    match kappa {
        Kappa::Singular => 0.0,
        Kappa::Finite(k) => {
            let scale = 2f64.powf(2.5 * n as f64);
            (scale * (d as f64 * n as f64 * k).powi(n as i32)).recip()
        }
    }
}

/// `1 / (2^{3n} d² κ)^n`, the condition-based lower bound on the
/// size bound for Taylor-type interval approximations.
pub fn bgt_size_bound_from_kappa(n: usize, d: u32, kappa: Kappa) -> f64 {
    match kappa {
        Kappa::Singular => 0.0,
        Kappa::Finite(k) => {
            let scale = 2f64.powi(3 * (n * n) as i32);
            (scale * ((d as f64).powi(2) * k).powi(n as i32)).recip()
        }
    }
}

pub fn local_size_bound(f: &AffinePolynomial, x: &[f64]) -> Result<f64> {
    Ok(size_bound_from_kappa(f.n(), f.d(), kappa_direct(f, x)?))
}

pub fn local_size_bound_bgt(f: &AffinePolynomial, x: &[f64]) -> Result<f64> {
    if f.d() <= 1 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: "the Taylor-regime size bound needs d > 1".into(),
        });
    }
    Ok(bgt_size_bound_from_kappa(f.n(), f.d(), kappa_direct(f, x)?))
}

/// At every point either `|f̂(x)|` or `‖∂f̂(x)‖` exceeds `1 / (2 sqrt(2d) κ_aff(f, x))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalGap {
    pub f_hat_abs: f64,
    pub grad_hat_norm: f64,
    pub threshold: f64,
}

impl FundamentalGap {
    pub fn holds_with_slack(&self, slack: f64) -> bool {
        self.f_hat_abs.max(self.grad_hat_norm) > slack * self.threshold
    }
}

pub fn fundamental_gap(f: &AffinePolynomial, x: &[f64]) -> Result<FundamentalGap> {
    let kappa = kappa_direct(f, x)?;
    let e = NormalizedEvaluator::new(f)?;
    let g = e.grad_f_hat(x);
    let d = f.d() as f64;
    Ok(FundamentalGap {
        f_hat_abs: e.f_hat(x).abs(),
        grad_hat_norm: g.iter().map(|v| v * v).sum::<f64>().sqrt(),
        threshold: 1.0 / (2.0 * (2.0 * d).sqrt() * kappa.value()),
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use rand::Rng;

    use super::*;
    use crate::geometry::{predicate_c_prime, Cube};
    use crate::testutil::{kss_poly, point, rng};

    fn x1_line() -> AffinePolynomial {
        AffinePolynomial::new(1, 1, [(vec![1], 1.0)]).unwrap()
    }

    fn sphere_plus_one() -> AffinePolynomial {
        AffinePolynomial::new(2, 2, [(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], 1.0)]).unwrap()
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa_direct(&x1_line(), &[0.0]).unwrap(), Kappa::Finite(1.0));
        assert_relative_eq!(
            kappa_projection(&x1_line(), &[0.0]).unwrap().value(),
            1.0,
            max_relative = 1e-15
        );

        let s3 = 3f64.sqrt();
        assert_relative_eq!(
            kappa_direct(&sphere_plus_one(), &[0.0, 0.0]).unwrap().value(),
            s3,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            kappa_projection(&sphere_plus_one(), &[0.0, 0.0]).unwrap().value(),
            s3,
            max_relative = 1e-15
        );
    }

    #[test]
    fn kappa_is_scale_invariant() {
        let mut r = rng(41);
        for _ in 0..200 {
            let n = r.random_range(1..=3);
            let d = r.random_range(1..=6);
            let f = kss_poly(&mut r, n, d);
            let x = point(&mut r, n, 1.0);
            let k = kappa_direct(&f, &x).unwrap().value();
            // Power-of-two scaling is exact in floating point.
            assert_eq!(kappa_direct(&f.scale(4.0), &x).unwrap().value(), k);
            assert_relative_eq!(
                kappa_direct(&f.scale(5.0), &x).unwrap().value(),
                k,
                max_relative = 1e-13
            );
            let kp = kappa_projection(&f, &x).unwrap().value();
            assert_relative_eq!(
                kappa_projection(&f.scale(5.0), &x).unwrap().value(),
                kp,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn direct_and_projection_agree() {
        let mut r = rng(43);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let n = r.random_range(1..=3);
            let d = r.random_range(1..=6);
            let f = kss_poly(&mut r, n, d);
            let x = point(&mut r, n, 1.0);
            let s = ConditionSample::at(&f, &x).unwrap();
            worst = worst.max(s.relative_gap().unwrap());
        }
        assert!(worst <= 1e-8, "worst relative gap {worst}");
    }

    #[test]
    fn kappa_field_matches_direct() {
        let mut r = rng(101);
        for _ in 0..2000 {
            let n = r.random_range(1..=4);
            let d = r.random_range(0..=8);
            let f = kss_poly(&mut r, n, d);
            let x = point(&mut r, n, 3.0);
            let field = KappaField::new(&f).unwrap();
            assert_relative_eq!(
                field.kappa(&x).value(),
                kappa_direct(&f, &x).unwrap().value(),
                max_relative = 1e-11
            );
        }
        let sing = AffinePolynomial::new(2, 2, [(vec![2, 0], 1.0)]).unwrap();
        assert_eq!(KappaField::new(&sing).unwrap().kappa(&[0.0, 0.3]), Kappa::Singular);
    }

    #[test]
    fn singular_subspace_members_are_flagged() {
        let f = AffinePolynomial::new(2, 2, [(vec![2, 0], 1.0)]).unwrap();
        assert_eq!(kappa_direct(&f, &[0.0, 0.0]).unwrap(), Kappa::Singular);
        assert_eq!(kappa_projection(&f, &[0.0, 0.0]).unwrap(), Kappa::Singular);
        assert_eq!(local_size_bound(&f, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(local_size_bound_bgt(&f, &[0.0, 0.0]).unwrap(), 0.0);
        // Off the singular line the polynomial is regular.
        assert!(!kappa_direct(&f, &[0.5, 0.0]).unwrap().is_singular());
    }

    #[test]
    fn kappa_errors() {
        let z = AffinePolynomial::zero(2, 3).unwrap();
        assert!(matches!(kappa_direct(&z, &[0.0, 0.0]), Err(Error::ZeroPolynomial)));
        assert!(matches!(kappa_projection(&z, &[0.0, 0.0]), Err(Error::ZeroPolynomial)));
        assert!(kappa_direct(&x1_line(), &[0.0, 1.0]).is_err());
    }

    #[test]
    fn kappa_blows_up_towards_the_singular_subspace() {
        let mut r = rng(47);
        let f = kss_poly(&mut r, 2, 4);
        let x = [0.3, -0.2];
        // g vanishes to second order at x.
        let u = AffinePolynomial::new(2, 4, [(vec![1, 0], 1.0), (vec![0, 0], -0.3)]).unwrap();
        let v = AffinePolynomial::new(2, 4, [(vec![0, 1], 1.0), (vec![0, 0], 0.2)]).unwrap();
        let sq = |p: &AffinePolynomial| -> AffinePolynomial {
            // (x1 - 0.3)^2 + (x2 + 0.2)^2 expanded by hand is avoided; build from the unit pieces.
            let c = p.coeffs();
            let basis = p.basis();
            let mut terms = Vec::new();
            for i in 0..basis.len() {
                for j in 0..basis.len() {
                    if c[i] != 0.0 && c[j] != 0.0 {
                        let a: Vec<u32> = basis
                            .exponents(i)
                            .iter()
                            .zip(basis.exponents(j))
                            .map(|(a, b)| a + b)
                            .collect();
                        terms.push((a, c[i] * c[j]));
                    }
                }
            }
            AffinePolynomial::new(2, 4, terms).unwrap()
        };
        let g = sq(&u).add(&sq(&v)).unwrap();
        assert!(kappa_direct(&g, &x).unwrap().value() > 1e12);

        let mut last = 0.0;
        for k in 1..=7 {
            let t = 1.0 - 10f64.powi(-k);
            let h = f.scale(1.0 - t).add(&g.scale(t)).unwrap();
            let kappa = kappa_direct(&h, &x).unwrap().value();
            assert!(kappa > last);
            last = kappa;
        }
        assert!(last > 1e5);
    }

    #[test]
    fn size_bound_formulas() {
        assert_eq!(size_bound_from_kappa(2, 2, Kappa::Finite(1.0)), 1.0 / 512.0);
        assert_eq!(bgt_size_bound_from_kappa(2, 2, Kappa::Finite(1.0)), 2f64.powi(-16));
        assert_eq!(size_bound_from_kappa(3, 4, Kappa::Singular), 0.0);
        let f = AffinePolynomial::new(2, 1, [(vec![1, 0], 1.0)]).unwrap();
        assert!(local_size_bound_bgt(&f, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn bgt_to_lipschitz_ratio_is_kappa_free() {
        let mut r = rng(53);
        for _ in 0..200 {
            let n = r.random_range(1..=3);
            let d = r.random_range(2..=6);
            let f = kss_poly(&mut r, n, d);
            let x = point(&mut r, n, 1.0);
            let ratio = local_size_bound_bgt(&f, &x).unwrap() / local_size_bound(&f, &x).unwrap();
            let (nf, df) = (n as f64, d as f64);
            let expected = (2f64.powf(2.5) * df * nf / (2f64.powf(3.0 * nf) * df * df)).powi(n as i32);
            assert_relative_eq!(ratio, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn fundamental_gap_examples() {
        let g = fundamental_gap(&x1_line(), &[0.0]).unwrap();
        assert_eq!(g.f_hat_abs, 0.0);
        assert_eq!(g.grad_hat_norm, 1.0);
        assert_relative_eq!(g.threshold, 1.0 / (2.0 * 2f64.sqrt()), max_relative = 1e-15);
        assert!(g.holds_with_slack(1.0));

        let sing = AffinePolynomial::new(2, 2, [(vec![2, 0], 1.0)]).unwrap();
        assert_eq!(fundamental_gap(&sing, &[0.0, 0.0]).unwrap().threshold, 0.0);
    }

    #[test]
    fn fundamental_gap_on_random_points() {
        let mut r = rng(59);
        for _ in 0..10_000 {
            let n = r.random_range(1..=3);
            let d = r.random_range(1..=7);
            let f = kss_poly(&mut r, n, d);
            let x = point(&mut r, n, 2.0);
            assert!(fundamental_gap(&f, &x).unwrap().holds_with_slack(1.0 - 1e-9));
        }
    }

    #[test]
    fn cubes_below_the_size_bound_pass_c_prime() {
        let mut r = rng(61);
        for _ in 0..500 {
            let n = r.random_range(1..=3);
            let d = r.random_range(1..=6);
            let f = kss_poly(&mut r, n, d);
            let x = point(&mut r, n, 1.0);
            let b = local_size_bound(&f, &x).unwrap();
            let w = (b * r.random_range(0.5..1.0)).powf(1.0 / n as f64);
            let m: Vec<f64> = x.iter().map(|&c| c + w * r.random_range(-0.5..0.5)).collect();
            let cube = Cube::new(m, w).unwrap();
            assert!(cube.contains(&x));
            assert!(predicate_c_prime(&f, &cube).unwrap().passed);
        }
    }
}
