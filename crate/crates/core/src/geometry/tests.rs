use approx::assert_relative_eq;
use rand::Rng;

use super::*;
use crate::testutil::{dist, kss_poly, norm, point, rng, uniform_poly};

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn x1(n: usize, d: u32) -> AffinePolynomial {
    let mut alpha = vec![0; n];
    alpha[0] = 1;
    AffinePolynomial::new(n, d, [(alpha, 1.0)]).unwrap()
}

fn sphere_plus_one() -> AffinePolynomial {
    AffinePolynomial::new(2, 2, [(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], 1.0)]).unwrap()
}

fn random_cube(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> Cube {
    let w = 10f64.powf(r.random_range(-3.0..0.3));
    Cube::new(point(r, n, 1.0), w).unwrap()
}

fn sample_in(r: &mut rand_chacha::ChaCha8Rng, cube: &Cube) -> Vec<f64> {
    cube.midpoint()
        .iter()
        .map(|&c| c + cube.width() * r.random_range(-0.5..=0.5))
        .collect()
}

#[test]
fn phi_examples() {
    assert_eq!(phi(&[0.0, 0.0]), vec![1.0, 0.0, 0.0]);
    let y = phi(&[1.0]);
    assert_relative_eq!(y[0], 1.0 / SQRT2, max_relative = 1e-15);
    assert_relative_eq!(y[1], 1.0 / SQRT2, max_relative = 1e-15);
    let mut r = rng(1);
    for _ in 0..100 {
        let y = phi(&point(&mut r, 3, 5.0));
        assert!(y[0] > 0.0);
        assert_relative_eq!(norm(&y), 1.0, max_relative = 1e-14);
    }
}

#[test]
fn phi_jacobian_norm_by_finite_differences() {
    let mut r = rng(2);
    let h = 1e-6;
    for _ in 0..50 {
        let n = r.random_range(1..=4);
        let x = point(&mut r, n, 2.0);
        let jac = nalgebra::DMatrix::from_fn(n + 1, n, |i, j| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            (phi(&xp)[i] - phi(&xm)[i]) / (2.0 * h)
        });
        let sigma_max = jac.singular_values().max();
        let s = 1.0 + norm(&x).powi(2);
        if n == 1 {
            // Only the radial direction exists; its stretch is 1/s <= 1/sqrt(s).
            assert_relative_eq!(sigma_max, 1.0 / s, max_relative = 1e-7);
        } else {
            assert_relative_eq!(sigma_max, 1.0 / s.sqrt(), max_relative = 1e-7);
        }
    }
}

#[test]
fn f_hat_examples() {
    let circle = AffinePolynomial::new(2, 2, [(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], -1.0)]).unwrap();
    assert_eq!(f_hat(&circle, &[1.0, 0.0]).unwrap(), 0.0);
    assert_relative_eq!(
        f_hat(&sphere_plus_one(), &[0.0, 0.0]).unwrap(),
        1.0 / 3f64.sqrt(),
        max_relative = 1e-15
    );
    assert!(matches!(
        f_hat(&AffinePolynomial::zero(2, 2).unwrap(), &[0.0, 0.0]),
        Err(Error::ZeroPolynomial)
    ));
    assert!(f_hat(&circle, &[0.0]).is_err());
}

#[test]
fn grad_f_hat_examples() {
    assert_eq!(grad_f_hat(&x1(2, 1), &[0.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    assert_eq!(grad_f_hat(&sphere_plus_one(), &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    assert!(grad_f_hat(&AffinePolynomial::zero(1, 3).unwrap(), &[0.0]).is_err());
}

#[test]
fn normalized_maps_are_bounded() {
    let mut r = rng(3);
    for _ in 0..2000 {
        let n = r.random_range(1..=3);
        let d = r.random_range(1..=8);
        let f = kss_poly(&mut r, n, d);
        let e = NormalizedEvaluator::new(&f).unwrap();
        let x = point(&mut r, n, 4.0);
        let bound = (1.0 + norm(&x).powi(2)).sqrt() * (1.0 + 1e-12);
        assert!(e.f_hat(&x).abs() <= bound);
        assert!(norm(&e.grad_f_hat(&x)) <= bound);
    }
}

#[test]
fn f_hat_through_the_sphere_map() {
    let mut r = rng(4);
    for _ in 0..1000 {
        let n = r.random_range(1..=4);
        let d = r.random_range(1..=9);
        let f = uniform_poly(&mut r, n, d);
        let x = point(&mut r, n, 3.0);
        let lhs = f_hat(&f, &x).unwrap();
        let rhs = (1.0 + norm(&x).powi(2)).sqrt() * f.homogenize().value_at(&phi(&x)) / f.weyl_norm();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-14, max_relative = 1e-10);
    }
}

#[test]
fn lipschitz_constants_hold_on_samples() {
    let mut r = rng(5);
    for _ in 0..3000 {
        let n = r.random_range(1..=3);
        let d = r.random_range(1..=8);
        let f = kss_poly(&mut r, n, d);
        let e = NormalizedEvaluator::new(&f).unwrap();
        let x = point(&mut r, n, 3.0);
        let scale = 10f64.powf(r.random_range(-4.0..0.5));
        let y: Vec<f64> = x.iter().map(|v| v + scale * r.random_range(-1.0..1.0)).collect();
        let dxy = dist(&x, &y);
        if dxy == 0.0 {
            continue;
        }
        let qv = (e.f_hat(&x) - e.f_hat(&y)).abs() / dxy;
        let qg = dist(&e.grad_f_hat(&x), &e.grad_f_hat(&y)) / dxy;
        assert!(qv <= e.value_lipschitz() * (1.0 + 1e-9), "value quotient {qv} (d={d})");
        assert!(
            qg <= e.gradient_lipschitz() * (1.0 + 1e-9),
            "gradient quotient {qg} (d={d})"
        );
    }
}

#[test]
fn interval_f_examples() {
    let f = x1(2, 1);
    let j = Cube::region(2, 1.0).unwrap();
    let i = interval_f(&f, &j).unwrap();
    assert_relative_eq!(i.lo, -2.0 * SQRT2, max_relative = 1e-15);
    assert_relative_eq!(i.hi, 2.0 * SQRT2, max_relative = 1e-15);
    assert_eq!(i.lo, -i.hi);
}

#[test]
fn interval_grad_example() {
    let b = interval_grad(&x1(2, 1), &Cube::region(2, 1.0).unwrap()).unwrap();
    assert_relative_eq!(b.0[0].lo, 1.0 - SQRT2, max_relative = 1e-14);
    assert_relative_eq!(b.0[0].hi, 1.0 + SQRT2, max_relative = 1e-14);
    assert_relative_eq!(b.0[1].lo, -SQRT2, max_relative = 1e-14);
    assert_relative_eq!(b.0[1].hi, SQRT2, max_relative = 1e-14);

    let b = interval_grad(&sphere_plus_one(), &Cube::new(vec![0.0, 0.0], 0.5).unwrap()).unwrap();
    assert!(b.0.iter().all(|i| i.lo == -i.hi));
}

#[test]
fn interval_approximations_are_conservative() {
    let mut r = rng(6);
    for _ in 0..1000 {
        let n = r.random_range(1..=3);
        let d = r.random_range(1..=7);
        let f = kss_poly(&mut r, n, d);
        let e = NormalizedEvaluator::new(&f).unwrap();
        let j = random_cube(&mut r, n);
        let vi = e.interval_f(&j);
        let gb = e.interval_grad(&j);
        for _ in 0..10 {
            let y = sample_in(&mut r, &j);
            assert!(vi.contains(e.f_hat(&y)));
            assert!(gb.contains(&e.grad_f_hat(&y)));
        }
    }
}

#[test]
fn predicate_c_examples() {
    let any_box = IntervalBox(vec![Interval::new(-1.0, 1.0)]);
    assert_eq!(
        predicate_c_with(Interval::new(0.5, 1.5), &any_box),
        Verdict::pass(Branch::Value)
    );

    let straddling = IntervalBox(vec![
        Interval::new(1.0 - SQRT2, 1.0 + SQRT2),
        Interval::new(-SQRT2, SQRT2),
    ]);
    assert!(straddling.dot(&straddling).contains_zero());
    assert_eq!(predicate_c_with(Interval::new(-1.0, 1.0), &straddling), Verdict::FAIL);

    let tight = IntervalBox(vec![Interval::new(0.9, 1.1), Interval::new(-0.05, 0.05)]);
    assert!(tight.dot(&tight).lo > 0.0);
    assert_eq!(
        predicate_c_with(Interval::new(-1.0, 1.0), &tight),
        Verdict::pass(Branch::Gradient)
    );

    // The whole-region cube for x1 fails both parts.
    assert_eq!(
        predicate_c(&x1(2, 1), &Cube::region(2, 1.0).unwrap()).unwrap(),
        Verdict::FAIL
    );
}

#[test]
fn predicate_c_prime_examples() {
    let one = AffinePolynomial::constant(2, 2, 1.0).unwrap();
    let j = Cube::new(vec![0.0, 0.0], 0.1).unwrap();
    assert_eq!(predicate_c_prime(&one, &j).unwrap(), Verdict::pass(Branch::Value));

    assert_eq!(
        predicate_c_prime(&x1(2, 1), &Cube::region(2, 1.0).unwrap()).unwrap(),
        Verdict::FAIL
    );
}

#[test]
fn c_prime_implies_c() {
    let mut r = rng(7);
    let mut fired = 0;
    for _ in 0..10_000 {
        let n = r.random_range(1..=3);
        let d = r.random_range(1..=7);
        let f = kss_poly(&mut r, n, d);
        let e = NormalizedEvaluator::new(&f).unwrap();
        let j = random_cube(&mut r, n);
        let cp = CPrimePredicate.evaluate(&e, &j);
        if cp.passed {
            fired += 1;
            assert!(IntervalPredicate.evaluate(&e, &j).passed);
        }
    }
    assert!(fired > 1000);
}

#[test]
fn inner_products_are_positive_near_a_point() {
    let mut r = rng(8);
    for _ in 0..10_000 {
        let n = r.random_range(1..=5);
        let x = point(&mut r, n, 3.0);
        let rad = norm(&x) / SQRT2;
        if rad == 0.0 {
            continue;
        }
        let mut ball = || loop {
            let u = point(&mut r, n, 1.0);
            if norm(&u) < 1.0 {
                return x.iter().zip(&u).map(|(a, b)| a + rad * b).collect::<Vec<f64>>();
            }
        };
        let v = ball();
        let w = ball();
        assert!(v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() > 0.0);
    }
}

#[test]
fn registry_lookup() {
    let reg = PredicateRegistry::default();
    assert_eq!(reg.get("cprime").unwrap().name(), "cprime");
    assert_eq!(reg.get("c_prime").unwrap().name(), "cprime");
    assert_eq!(reg.get("interval").unwrap().name(), "interval");
    assert_eq!(reg.names(), &["cprime", "interval"]);
    assert!(matches!(reg.get("taylor"), Err(Error::UnknownStrategy { .. })));
}
