use approx::assert_relative_eq;
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist, Normal};

use super::*;
use crate::poly::AffinePolynomial;

/// Weyl coordinates `c_α = f_α / sqrt(binom)` of draws with seeds `0..count`.
fn coordinates(model: &dyn CoefficientModel, n: usize, d: u32, count: u64) -> Vec<Vec<f64>> {
    let basis = MonomialBasis::get(n, d).unwrap();
    let mut cols = vec![Vec::with_capacity(count as usize); basis.len()];
    for seed in 0..count {
        let f = sample_dobro(model, n, d, seed).unwrap();
        for (i, c) in f.coeffs().iter().enumerate() {
            cols[i].push(c / basis.binom(i).sqrt());
        }
    }
    cols
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Kolmogorov-Smirnov statistic of `xs` against `cdf`.
fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

fn prandom_cdf(p: f64) -> impl Fn(f64) -> f64 {
    let g = GammaDist::new(1.0 / p, 1.0).unwrap();
    move |t: f64| 0.5 + 0.5 * t.signum() * g.cdf(t.abs().powf(p))
}

#[test]
fn kss_moments() {
    for col in coordinates(&Kss, 1, 2, 100_000) {
        let (m, v) = mean_var(&col);
        assert!(m.abs() <= 0.01, "mean {m}");
        assert!((0.98..=1.02).contains(&v), "variance {v}");
    }
}

#[test]
fn weyl_uniform_range_and_ks() {
    let cols = coordinates(&WeylUniform, 2, 3, 10_000);
    for col in &cols {
        assert!(col.iter().all(|c| (-1.0..=1.0).contains(c)));
        assert!(ks_statistic(col, |t| ((t + 1.0) / 2.0).clamp(0.0, 1.0)) < ks_critical(col.len()));
    }
}

#[test]
fn weyl_coordinates_are_iid_per_model() {
    let normal = Normal::new(0.0, 1.0).unwrap();
    for col in coordinates(&Kss, 2, 3, 10_000) {
        assert!(ks_statistic(&col, |t| normal.cdf(t)) < ks_critical(col.len()));
    }
    for p in [2.0, 3.0, 6.0] {
        let model = PRandom::new(p).unwrap();
        for col in coordinates(&model, 1, 3, 10_000) {
            assert!(ks_statistic(&col, prandom_cdf(p)) < ks_critical(col.len()), "p = {p}");
        }
    }
}

#[test]
fn p2_variance_is_one_half() {
    let model = PRandom::new(2.0).unwrap();
    assert_relative_eq!(model.abs_moment(2.0), 0.5, max_relative = 1e-12);
    for col in coordinates(&model, 1, 2, 100_000) {
        let (m, v) = mean_var(&col);
        assert!(m.abs() <= 0.01);
        assert!((v - 0.5).abs() <= 0.01, "variance {v}");
    }
}

#[test]
fn anti_concentration_smoke_test() {
    let models: Vec<Arc<dyn CoefficientModel>> = vec![
        Arc::new(Kss),
        Arc::new(WeylUniform),
        Arc::new(PRandom::new(3.0).unwrap()),
    ];
    for model in models {
        let rho = model.parameters().rho;
        let mut xs = coordinates(model.as_ref(), 1, 1, 100_000).concat();
        xs.sort_by(f64::total_cmp);
        let count_within = |lo: f64, hi: f64| xs.partition_point(|&x| x <= hi) - xs.partition_point(|&x| x < lo);
        for eps in [0.1, 0.01] {
            let worst = (-300..=300)
                .map(|k| 0.01 * k as f64)
                .map(|u| count_within(u - eps, u + eps) as f64 / xs.len() as f64)
                .fold(0.0, f64::max);
            assert!(
                worst <= 1.15 * rho * eps,
                "{}: {worst} > rho*eps = {}",
                model.name(),
                rho * eps
            );
        }
    }
}

#[test]
fn sampling_is_seed_deterministic() {
    for spec in [DobroSpec::kss(), DobroSpec::weyl(), DobroSpec::prandom(4.0)] {
        let m = spec.build().unwrap();
        let a = sample_dobro(m.as_ref(), 3, 4, 17).unwrap();
        assert_eq!(a, sample_dobro(m.as_ref(), 3, 4, 17).unwrap());
        assert_ne!(a, sample_dobro(m.as_ref(), 3, 4, 18).unwrap());
        assert_eq!(sample_dobro_affine(m.as_ref(), 3, 4, 17).unwrap(), a.dehomogenize());
    }
    // Per-coefficient streams: the shared monomials of two degrees get the same draws.
    let lo = sample_dobro(&Kss, 2, 2, 5).unwrap();
    let hi = sample_dobro(&Kss, 2, 3, 5).unwrap();
    let (bl, bh) = (lo.basis(), hi.basis());
    assert_eq!(lo.coeffs()[0] / bl.binom(0).sqrt(), hi.coeffs()[0] / bh.binom(0).sqrt());
}

#[test]
fn derived_seeds_differ() {
    let a = derive_seed(1, &[2, 0]);
    assert_eq!(a, derive_seed(1, &[2, 0]));
    assert_ne!(a, derive_seed(1, &[2, 1]));
    assert_ne!(a, derive_seed(1, &[3, 0]));
    assert_ne!(a, derive_seed(2, &[2, 0]));
}

#[test]
fn invalid_models() {
    assert!(PRandom::new(1.5).is_err());
    assert!(PRandom::new(f64::NAN).is_err());
    assert!(DobroSpec {
        model: "prandom".into(),
        p: None
    }
    .build()
    .is_err());
    assert!(matches!(
        DobroSpec {
            model: "bernoulli".into(),
            p: None
        }
        .build(),
        Err(Error::UnknownStrategy { .. })
    ));
    assert_eq!(ModelRegistry::default().names(), &["kss", "weyl", "prandom"]);
    assert_eq!(ModelRegistry::default().get("gaussian", None).unwrap().name(), "kss");
}

#[test]
fn documented_parameters() {
    let kss = model_parameters(&DobroSpec::kss()).unwrap();
    assert_relative_eq!(
        kss.k_rho,
        1.0 / (2.0 * std::f64::consts::PI).sqrt(),
        max_relative = 1e-15
    );
    assert_relative_eq!(kss.k_rho, 0.3989422804014327, max_relative = 1e-15);
    let weyl = model_parameters(&DobroSpec::weyl()).unwrap();
    assert!(weyl.k_rho <= 1.0);
    for p in [2.0, 2.5, 3.0, 8.0, 40.0] {
        let params = model_parameters(&DobroSpec::prandom(p)).unwrap();
        assert!(params.k_rho >= 0.25, "p = {p}");
        assert!(params.k > 0.0 && params.rho > 0.0);
    }
    // p = 2 is N(0, 1/2): K is attained at q = 1, E|X| = 1/sqrt(pi); rho = 2/sqrt(pi).
    let p2 = model_parameters(&DobroSpec::prandom(2.0)).unwrap();
    let sqrt_pi = std::f64::consts::PI.sqrt();
    assert_relative_eq!(p2.k, 1.0 / sqrt_pi, max_relative = 1e-12);
    assert_relative_eq!(p2.rho, 2.0 / sqrt_pi, max_relative = 1e-12);
    for params in [kss, weyl] {
        assert!(params.k_rho >= 0.25);
    }
}

#[test]
fn empirical_psi2_norms_do_not_exceed_weyl_k() {
    let xs = coordinates(&WeylUniform, 1, 1, 50_000).concat();
    let k = WeylUniform.parameters().k;
    for q in [1.0, 2.0, 4.0, 8.0] {
        let m = (xs.iter().map(|x| x.abs().powf(q)).sum::<f64>() / xs.len() as f64).powf(1.0 / q) / f64::sqrt(q);
        assert!(m <= k * 1.01, "q = {q}: {m}");
    }
}

fn base_poly() -> AffinePolynomial {
    AffinePolynomial::new(2, 3, [(vec![3, 0], 1.0), (vec![0, 1], -2.0), (vec![0, 0], 0.5)]).unwrap()
}

#[test]
fn smoothed_instance_limits_and_identity() {
    let f = base_poly();
    let tiny = SmoothingSpec {
        base: f.clone(),
        sigma: 1e-12,
        noise: DobroSpec::kss(),
    };
    let q = smoothed_instance(&tiny, 3).unwrap();
    assert!(q.sub(&f).unwrap().weyl_norm() <= 1e-10 * f.weyl_norm());

    for (seed, noise) in [
        (1, DobroSpec::kss()),
        (2, DobroSpec::weyl()),
        (3, DobroSpec::prandom(3.0)),
    ] {
        let spec = SmoothingSpec {
            base: f.clone(),
            sigma: 0.3,
            noise: noise.clone(),
        };
        let q = smoothed_instance(&spec, seed).unwrap();
        let g = sample_dobro_affine(noise.build().unwrap().as_ref(), 2, 3, seed).unwrap();
        let lhs = q.sub(&f).unwrap().weyl_norm() / (0.3 * f.weyl_norm());
        assert_relative_eq!(lhs, g.weyl_norm(), max_relative = 1e-12);
    }

    let bad = SmoothingSpec {
        base: f.clone(),
        sigma: 0.0,
        noise: DobroSpec::kss(),
    };
    assert!(smoothed_instance(&bad, 0).is_err());
    let zero = SmoothingSpec {
        base: AffinePolynomial::zero(2, 3).unwrap(),
        sigma: 1.0,
        noise: DobroSpec::kss(),
    };
    assert!(matches!(smoothed_instance(&zero, 0), Err(Error::ZeroPolynomial)));
}

#[test]
fn smoothed_perturbation_energy() {
    let f = base_poly();
    let sigma = 0.5;
    let spec = SmoothingSpec {
        base: f.clone(),
        sigma,
        noise: DobroSpec::kss(),
    };
    let draws = 10_000;
    let mean = (0..draws)
        .map(|seed| {
            smoothed_instance(&spec, seed)
                .unwrap()
                .sub(&f)
                .unwrap()
                .weyl_norm()
                .powi(2)
        })
        .sum::<f64>()
        / draws as f64;
    let expected = sigma * sigma * f.weyl_norm().powi(2) * f.basis().len() as f64;
    assert!((mean / expected - 1.0).abs() <= 0.05, "{mean} vs {expected}");
}
