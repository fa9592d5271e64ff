//! Command-line front end: `mesh`, `kappa`, `sample`, `bound` and `bench`.

pub mod bench;
pub mod commands;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use error::{exit, CliResult, Failure};

/// Largest supported variable count for input polynomials.
pub const MAX_N: usize = 4;
/// Largest supported degree for input polynomials.
pub const MAX_D: u32 = 20;

#[derive(Debug, Parser)]
#[command(
    name = "pvsub",
    version,
    about = "Adaptive subdivision of real polynomial hypersurfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Subdivide [-a,a]^n until every cube passes the termination predicate.
    Mesh(MeshArgs),
    /// Condition numbers and normalized values at a point.
    #[command(alias = "analyze")]
    Kappa(KappaArgs),
    /// Draw a random polynomial.
    Sample(SampleArgs),
    /// Evaluate the closed-form complexity bounds.
    Bound(BoundArgs),
    /// Subdivide random instances over a degree range and tabulate the cost.
    #[command(alias = "benchmark")]
    Bench(BenchArgs),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct MeshArgs {
    /// Polynomial JSON file.
    #[arg(long)]
    pub poly: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Termination predicate: cprime or interval.
    #[arg(long, default_value = pvsub::subdivide::DEFAULT_MODE)]
    pub mode: String,
    #[arg(long, default_value_t = pvsub::subdivide::DEFAULT_MAX_DEPTH)]
    pub max_depth: u32,
    /// Abort after examining this many cubes.
    #[arg(long)]
    pub cube_budget: Option<usize>,
    /// Subdivision JSON output; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG drawing of the leaves and the curve approximation (n = 2 only).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Re-check the result and fail on any violation.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaMethod {
    Both,
    Direct,
    Projection,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct KappaArgs {
    #[arg(long)]
    pub poly: PathBuf,
    /// Comma-separated coordinates, e.g. `0.5,-0.25`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub point: Vec<f64>,
    #[arg(long, value_enum, default_value_t = KappaMethod::Both)]
    pub method: KappaMethod,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Coefficient model: kss, weyl or prandom.
    #[arg(long, default_value = "kss")]
    pub model: String,
    /// Exponent of the prandom model.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Perturb `--base` by `sigma‖base‖g` with `g` from the model.
    #[arg(long, requires = "base")]
    pub sigma: Option<f64>,
    /// Polynomial to perturb; its n and d must match.
    #[arg(long, requires = "sigma")]
    pub base: Option<PathBuf>,
    /// Write the homogeneous polynomial instead of its dehomogenization.
    #[arg(long, conflicts_with = "sigma")]
    pub homogeneous: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct BoundArgs {
    /// Variable count; taken from `--poly` when given.
    #[arg(long)]
    pub n: Option<usize>,
    /// Degree; taken from `--poly` when given.
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// The product Kρ; defaults to the value documented for `--model`.
    #[arg(long)]
    pub krho: Option<f64>,
    #[arg(long, default_value = "kss")]
    pub model: String,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    /// Smoothing parameter of the smoothed bounds.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Regime to evaluate (lipschitz or bgt); every applicable regime when absent.
    #[arg(long)]
    pub regime: Option<String>,
    /// Threshold of the tail bound; defaults to e^{2n}.
    #[arg(long)]
    pub t: Option<f64>,
    /// Also estimate the amortized cube bound of this polynomial.
    #[arg(long)]
    pub poly: Option<PathBuf>,
    /// Expectation estimator for `--poly`: mc or trapezoid.
    #[arg(long, default_value = "mc")]
    pub estimator: String,
    #[arg(long, default_value_t = pvsub::amortize::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = pvsub::amortize::DEFAULT_POINTS_PER_AXIS)]
    pub points_per_axis: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, default_value = "kss")]
    pub model: String,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Inclusive degree range `LO:HI`.
    #[arg(long, value_parser = parse_range, default_value = "2:10")]
    pub d_range: (u32, u32),
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value = pvsub::subdivide::DEFAULT_MODE)]
    pub mode: String,
    #[arg(long, default_value_t = pvsub::subdivide::DEFAULT_MAX_DEPTH)]
    pub max_depth: u32,
    /// Per-trial CSV; standard output when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Per-degree summary CSV; defaults to `<csv>.summary.csv`.
    #[arg(long)]
    pub summary_csv: Option<PathBuf>,
    /// Fill the runtime_ms column (makes the CSV machine-dependent).
    #[arg(long)]
    pub timing: bool,
}

/// Parses `LO:HI`.
pub fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("bad bound `{t}`: {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Mesh(a) => commands::mesh(&a),
        Command::Kappa(a) => commands::kappa(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Bound(a) => commands::bound(&a),
        Command::Bench(a) => commands::bench(&a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2:10"), Ok((2, 10)));
        assert_eq!(parse_range("3:3"), Ok((3, 3)));
        assert!(parse_range("5:2").is_err());
        assert!(parse_range("5").is_err());
        assert!(parse_range("a:2").is_err());
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["pvsub", "analyze", "--poly", "f.json", "--point", "-0.5,0.25"]).unwrap();
        match cli.command {
            Command::Kappa(k) => assert_eq!(k.point, vec![-0.5, 0.25]),
            c => panic!("{c:?}"),
        }
        let cli = Cli::try_parse_from(["pvsub", "benchmark", "--d-range", "2:4", "--trials", "3"]).unwrap();
        match cli.command {
            Command::Bench(b) => assert_eq!((b.d_range, b.trials, b.seed), ((2, 4), 3, 1)),
            c => panic!("{c:?}"),
        }
        assert!(Cli::try_parse_from(["pvsub", "sample", "--n", "2", "--d", "3", "--sigma", "1"]).is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
