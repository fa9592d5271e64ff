use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pvsub::amortize::{
    amortized_cube_bound, average_bound, expectation_kappa_n, expected_kappa_n_bound, kappa_tail_bound, smoothed_bound,
    smoothed_kappa_tail_bound, BoundConfig, EstimatorSettings, RegimeRegistry,
};
use pvsub::condition::{kappa_direct, kappa_projection, local_size_bound, Kappa};
use pvsub::geometry::{f_hat, grad_f_hat, PredicateRegistry};
use pvsub::poly::{AffinePolynomial, Polynomial, PolynomialDocument};
use pvsub::randpoly::{
    model_parameters, sample_dobro, sample_dobro_affine, smoothed_instance, DobroSpec, SmoothingSpec,
};
use pvsub::subdivide::{extract_segments, render_svg, subdivide_with, verify_subdivision, SubdivideOptions};
use pvsub::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bench::{run_bench, write_rows, BenchConfig, BENCH_FORMAT_VERSION};
use crate::error::{exit, CliResult, Failure};
use crate::manifest::{manifest_path, RunManifest};
use crate::{BenchArgs, BoundArgs, KappaArgs, KappaMethod, MeshArgs, SampleArgs, MAX_D, MAX_N};

pub const REPORT_FORMAT_VERSION: u32 = 1;

fn check_space(n: usize, d: u32) -> CliResult<()> {
    if !(1..=MAX_N).contains(&n) || !(1..=MAX_D).contains(&d) {
        return Err(Failure::input(format!(
            "unsupported space n={n}, d={d}: need 1 <= n <= {MAX_N} and 1 <= d <= {MAX_D}"
        )));
    }
    Ok(())
}

pub fn read_polynomial(path: &Path) -> CliResult<AffinePolynomial> {
    let ctx = format!("reading polynomial {}", path.display());
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(exit::INPUT, e).context(ctx.clone()))?;
    let f = Polynomial::from_json(&text)
        .map_err(|e| Failure::from(e).context(ctx))?
        .into_affine();
    check_space(f.n(), f.d())?;
    Ok(f)
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::from(e).context(format!("writing {}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn finish_manifest(
    mut manifest: RunManifest,
    start: Instant,
    primary: Option<&Path>,
    outputs: Vec<PathBuf>,
) -> CliResult<()> {
    if let Some(primary) = primary {
        manifest.finish(start.elapsed(), outputs);
        manifest.write(&manifest_path(primary))?;
    }
    Ok(())
}

fn echo<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

pub fn mesh(args: &MeshArgs) -> CliResult<()> {
    let start = Instant::now();
    let manifest = RunManifest::new("mesh", echo(args), None);
    let f = read_polynomial(&args.poly)?;
    if args.svg.is_some() && f.n() != 2 {
        return Err(Failure::input(format!(
            "--svg needs a plane curve (n = 2), got n = {}",
            f.n()
        )));
    }
    let predicate = PredicateRegistry::default().get(&args.mode)?;
    let options = SubdivideOptions {
        max_depth: args.max_depth,
        cube_budget: args.cube_budget,
    };
    let s = subdivide_with(&f, args.a, predicate.as_ref(), &options)?;
    eprintln!(
        "{} leaves, {} cubes examined, max depth {}, value/gradient branch {}/{}",
        s.stats.leaf_count,
        s.stats.cubes_examined,
        s.stats.max_depth_reached,
        s.stats.value_branch,
        s.stats.gradient_branch
    );
    if args.verify {
        let report = verify_subdivision(&s, &f);
        if !report.is_ok() {
            eprintln!("{}", serde_json::to_string_pretty(&report)?);
            return Err(Failure::new(
                exit::FAILURE,
                anyhow::anyhow!("verification found {} violation(s)", report.violations.len()),
            ));
        }
        eprintln!("verified {} leaves", report.leaves_checked);
    }
    emit(args.out.as_deref(), &(s.to_json()? + "\n"))?;
    let mut outputs: Vec<PathBuf> = args.out.iter().cloned().collect();
    if let Some(svg) = &args.svg {
        let segments = extract_segments(&f, &s)?;
        emit(Some(svg), &render_svg(&s, Some(&segments))?)?;
        outputs.push(svg.clone());
    }
    let primary = args.out.as_deref().or(args.svg.as_deref());
    finish_manifest(manifest, start, primary, outputs)
}

fn kappa_json(k: Kappa) -> Value {
    match k {
        Kappa::Finite(v) => json!(v),
        Kappa::Singular => json!("singular"),
    }
}

pub fn kappa(args: &KappaArgs) -> CliResult<()> {
    let start = Instant::now();
    let manifest = RunManifest::new("kappa", echo(args), None);
    let f = read_polynomial(&args.poly)?;
    let x = &args.point;
    if x.len() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: x.len(),
        }
        .into());
    }
    let direct = match args.method {
        KappaMethod::Projection => None,
        _ => Some(kappa_direct(&f, x)?),
    };
    let projection = match args.method {
        KappaMethod::Direct => None,
        _ => Some(match kappa_projection(&f, x) {
            Err(Error::RankDeficient) => Kappa::Singular,
            k => k?,
        }),
    };
    let relative_gap = match (direct.and_then(Kappa::finite), projection.and_then(Kappa::finite)) {
        (Some(a), Some(b)) => Some((a - b).abs() / a.max(b)),
        _ => None,
    };
    let singular = direct.is_some_and(Kappa::is_singular) || projection.is_some_and(Kappa::is_singular);
    let grad = grad_f_hat(&f, x)?;
    let report = json!({
        "format_version": REPORT_FORMAT_VERSION,
        "n": f.n(),
        "d": f.d(),
        "point": x,
        "kappa_direct": direct.map(kappa_json),
        "kappa_projection": projection.map(kappa_json),
        "relative_gap": relative_gap,
        "f_hat": f_hat(&f, x)?,
        "grad_hat_norm": grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
        "local_size_bound": local_size_bound(&f, x)?,
        "singular": singular,
    });
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    finish_manifest(manifest, start, args.out.as_deref(), args.out.iter().cloned().collect())?;
    if singular {
        eprintln!("singular");
        return Err(Failure::new(exit::SINGULAR, anyhow::anyhow!("f is singular at {x:?}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleRecord<'a> {
    format_version: u32,
    model: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<&'a Path>,
}

/// A polynomial document with the draw that produced it; readable as a plain polynomial.
#[derive(Serialize)]
struct SampleDocument<'a> {
    #[serde(flatten)]
    polynomial: PolynomialDocument,
    sample: SampleRecord<'a>,
}

pub fn sample(args: &SampleArgs) -> CliResult<()> {
    let start = Instant::now();
    let manifest = RunManifest::new("sample", echo(args), Some(args.seed));
    let spec = DobroSpec {
        model: args.model.clone(),
        p: args.p,
    };
    let model = spec.build()?;
    check_space(args.n, args.d)?;
    let polynomial: Polynomial = match (&args.base, args.sigma) {
        (Some(base), Some(sigma)) => {
            let base = read_polynomial(base)?;
            if (base.n(), base.d()) != (args.n, args.d) {
                return Err(Failure::input(format!(
                    "--base has n={}, d={} but --n {} --d {} was given",
                    base.n(),
                    base.d(),
                    args.n,
                    args.d
                )));
            }
            smoothed_instance(
                &SmoothingSpec {
                    base,
                    sigma,
                    noise: spec.clone(),
                },
                args.seed,
            )?
            .into()
        }
        _ if args.homogeneous => sample_dobro(model.as_ref(), args.n, args.d, args.seed)?.into(),
        _ => sample_dobro_affine(model.as_ref(), args.n, args.d, args.seed)?.into(),
    };
    let doc = SampleDocument {
        polynomial: polynomial.to_document(),
        sample: SampleRecord {
            format_version: REPORT_FORMAT_VERSION,
            model: model.name(),
            p: model.p(),
            seed: args.seed,
            sigma: args.sigma,
            base: args.base.as_deref(),
        },
    };
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    finish_manifest(manifest, start, args.out.as_deref(), args.out.iter().cloned().collect())
}

fn resolve_space(args: &BoundArgs, f: Option<&AffinePolynomial>) -> CliResult<(usize, u32)> {
    let (n, d) = match f {
        Some(f) => {
            if args.n.is_some_and(|n| n != f.n()) || args.d.is_some_and(|d| d != f.d()) {
                return Err(Failure::input(format!(
                    "--n/--d disagree with --poly (n={}, d={})",
                    f.n(),
                    f.d()
                )));
            }
            (f.n(), f.d())
        }
        None => match (args.n, args.d) {
            (Some(n), Some(d)) => (n, d),
            _ => return Err(Failure::input("bound needs --n and --d, or --poly")),
        },
    };
    check_space(n, d)?;
    Ok((n, d))
}

pub fn bound(args: &BoundArgs) -> CliResult<()> {
    let start = Instant::now();
    let manifest = RunManifest::new(
        "bound",
        echo(args),
        (args.poly.is_some() && args.estimator != "trapezoid").then_some(args.seed),
    );
    let f = args.poly.as_deref().map(read_polynomial).transpose()?;
    let (n, d) = resolve_space(args, f.as_ref())?;
    let spec = DobroSpec {
        model: args.model.clone(),
        p: args.p,
    };
    let (k_rho, k_rho_source) = match args.krho {
        Some(k) => (k, "flag".to_string()),
        None => (
            model_parameters(&spec)?.k_rho,
            format!("model {}", crate::bench::model_label(&spec)?),
        ),
    };
    let mut config = BoundConfig::new(n, d, args.a, k_rho);
    config.c1 = args.c1;
    config.c2 = args.c2;
    config.sigma = args.sigma;
    config.validate()?;

    let registry = RegimeRegistry::default();
    let regimes: Vec<String> = match &args.regime {
        Some(r) => vec![registry.get(r)?.name().to_string()],
        None => registry.names().iter().map(|s| s.to_string()).collect(),
    };

    let settings = EstimatorSettings {
        kind: args.estimator.clone(),
        samples: args.samples,
        seed: args.seed,
        points_per_axis: args.points_per_axis,
        ..EstimatorSettings::default()
    };
    let expectation = f
        .as_ref()
        .map(|f| expectation_kappa_n(f, args.a, &settings))
        .transpose()?;

    let mut per_regime = serde_json::Map::new();
    for name in &regimes {
        let cfg = config.clone().with_regime(name);
        let regime = match cfg.validate() {
            Ok(r) => r,
            Err(e) if args.regime.is_none() => {
                per_regime.insert(name.clone(), json!({ "skipped": e.to_string() }));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let mut entry = json!({ "average_bound": average_bound(&cfg)? });
        if cfg.sigma.is_some() {
            entry["smoothed_bound"] = json!(smoothed_bound(&cfg)?);
        }
        if let (Some(f), Some(e)) = (&f, &expectation) {
            let amortized = amortized_cube_bound(f, args.a, name, &settings)?;
            entry["amortized_cube_bound"] = serde_json::to_value(&amortized)?;
            entry["condition_cube_bound"] = json!(regime.condition_cube_bound(n, d, args.a, e.estimate));
        }
        per_regime.insert(name.clone(), entry);
    }

    let t = args.t.unwrap_or((2.0 * n as f64).exp());
    let mut tail = json!({ "t": t, "bound": kappa_tail_bound(&config, t)? });
    if config.sigma.is_some() {
        tail["smoothed_bound"] = json!(smoothed_kappa_tail_bound(&config, t)?);
    }

    let mut config_json = serde_json::to_value(&config)?;
    if let Some(obj) = config_json.as_object_mut() {
        obj.remove("regime");
        obj.insert("regimes".into(), json!(regimes));
    }
    let mut report = json!({
        "format_version": REPORT_FORMAT_VERSION,
        "config": config_json,
        "k_rho_source": k_rho_source,
        "assumptions": {
            "c1": config.c1,
            "c2": config.c2,
            "c1_c2_k_rho": config.raw_product(),
            "effective_product": config.effective_product(),
            "product_clamped": config.product_clamped(),
            "note": "c1 and c2 are unspecified universal constants, 1 unless overridden; bounds use max(1, c1*c2*K_rho)",
        },
        "regimes": per_regime,
        "expected_kappa_n_bound": expected_kappa_n_bound(&config)?,
        "kappa_tail": tail,
    });
    if let Some(e) = expectation {
        report["expectation_kappa_n"] = serde_json::to_value(&e)?;
    }
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    finish_manifest(manifest, start, args.out.as_deref(), args.out.iter().cloned().collect())
}

pub fn bench(args: &BenchArgs) -> CliResult<()> {
    let start = Instant::now();
    let mut config_echo = echo(args);
    config_echo["bench_format_version"] = json!(BENCH_FORMAT_VERSION);
    let manifest = RunManifest::new("bench", config_echo, Some(args.seed));
    let (d_lo, d_hi) = args.d_range;
    check_space(args.n, d_lo.max(1))?;
    check_space(args.n, d_hi)?;
    let config = BenchConfig {
        model: DobroSpec {
            model: args.model.clone(),
            p: args.p,
        },
        n: args.n,
        d_lo,
        d_hi,
        trials: args.trials,
        seed: args.seed,
        a: args.a,
        mode: args.mode.clone(),
        max_depth: args.max_depth,
        timing: args.timing,
    };
    let out = run_bench(&config)?;

    let mut rows = Vec::new();
    write_rows(&mut rows, &out.rows)?;
    emit(args.csv.as_deref(), std::str::from_utf8(&rows).expect("csv is utf-8"))?;
    let mut outputs: Vec<PathBuf> = args.csv.iter().cloned().collect();
    let summary_path = args.summary_csv.clone().or_else(|| {
        args.csv.as_ref().map(|p| {
            let mut name = p.file_name().map(|s| s.to_os_string()).unwrap_or_default();
            name.push(".summary.csv");
            p.with_file_name(name)
        })
    });
    if let Some(path) = &summary_path {
        let file =
            std::fs::File::create(path).map_err(|e| Failure::from(e).context(format!("writing {}", path.display())))?;
        write_rows(file, &out.summary)?;
        outputs.push(path.clone());
    }
    for s in &out.summary {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |m| format!("{m:.1}"));
        eprintln!(
            "d={:>2}  mean={:>10}  median={:>10}  max_depth_exceeded={}",
            s.d,
            fmt(s.mean_leaf_count),
            fmt(s.median_leaf_count),
            s.max_depth_exceeded
        );
    }
    match out.slope {
        Some(slope) => eprintln!("log-log slope of mean leaf count vs d: {slope:.3}"),
        None => eprintln!("log-log slope undefined (fewer than two degrees with completed trials)"),
    }
    finish_manifest(manifest, start, args.csv.as_deref(), outputs)
}
