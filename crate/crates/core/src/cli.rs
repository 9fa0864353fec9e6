//! Command-line experiments: `theory | solve | simulate | burgers | validate`.
//!
//! Parameters come from flags, then an optional JSON `--config` file, then
//! defaults. Outputs are CSV files in `--out`.
//!
//! Exit codes: 0 ok, 1 usage, 2 numerical failure, 3 hypothesis failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Deserialize;

use crate::burgers::{burgers_residual, semicircle_grid, semigroup_check, DensityFlow, SemigroupConfig};
use crate::cauchy::{stieltjes_invert, SolverConfig};
use crate::correction::{check_holder, correction_f, correction_value};
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::hilbert::PvQuadratureConfig;
use crate::io::{
    correction_rows, density_rows, eigenvalue_rows, residual_rows, semigroup_rows, shift_rows,
    write_csv_file, RunMetadata,
};
use crate::model::{validate_hypotheses, Example, ModelConfig, ModelSpec};
use crate::sim::{replicate_average, run_replicates, sample_perturbed};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "bandpert", version, about = "First-order spectral shift of band-perturbed diagonal matrices")]
pub struct Cli {
    /// Worker threads (default: available parallelism). Results do not
    /// depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log solver diagnostics to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the correction F and its derivative.
    Theory(TheoryArgs),
    /// Density of the perturbed limit law by Stieltjes inversion.
    Solve(SolveArgs),
    /// Monte Carlo eigenvalues and the replicate-averaged CDF shift.
    Simulate(SimulateArgs),
    /// Transport-equation residual and semigroup check for semicircle flows.
    Burgers(BurgersArgs),
    /// Check the model hypotheses.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON experiment file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// uniform-band | triangular-goe | semicircle
    #[arg(long)]
    pub example: Option<String>,
    /// Band width for uniform-band.
    #[arg(long)]
    pub ell: Option<f64>,
    /// Variance for semicircle.
    #[arg(long)]
    pub variance: Option<f64>,
    /// Model description (JSON) instead of a built-in example.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Start from the semicircle of this variance (shorthand for
    /// `--example semicircle --variance C`).
    #[arg(long = "semicircle-c")]
    pub semicircle_c: Option<f64>,
    /// Stieltjes inversion height.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Solver x-grid size.
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BurgersArgs {
    #[command(flatten)]
    pub common: Common,
    /// Initial semicircle variance.
    #[arg(long)]
    pub c: Option<f64>,
    /// Time slices `start:stop:step`.
    #[arg(long = "t-grid")]
    pub t_grid: Option<String>,
    /// Spatial step.
    #[arg(long)]
    pub ds: Option<f64>,
    /// Compare the solver against the semicircle of variance `c + t` instead.
    #[arg(long)]
    pub semigroup: bool,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sample points per direction.
    #[arg(long)]
    pub samples: Option<usize>,
}

/// Contents of a `--config` file. Every field is optional; unknown keys are
/// rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: Option<String>,
    pub ell: Option<f64>,
    pub variance: Option<f64>,
    /// Inline model description.
    pub model: Option<ModelConfig>,
    /// Model description file, relative to the config file.
    pub model_path: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub points: Option<usize>,
    pub eps: Option<f64>,
    pub eta: Option<f64>,
    pub nodes: Option<usize>,
    pub n: Option<usize>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub c: Option<f64>,
    pub t: Option<f64>,
    pub t_grid: Option<String>,
    pub ds: Option<f64>,
    pub semigroup: Option<bool>,
    pub samples: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let (Some(p), Some(dir)) = (&cfg.model_path, path.parent()) {
            cfg.model_path = Some(dir.join(p));
        }
        Ok(cfg)
    }

    fn from_common(common: &Common) -> Result<Self> {
        match &common.config {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    fn out_dir(&self, common: &Common) -> PathBuf {
        common
            .out
            .clone()
            .or_else(|| self.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    fn model(&self, args: &ModelArgs) -> Result<ModelSpec> {
        if let Some(path) = args.model.as_ref().or(self.model_path.as_ref()) {
            return ModelSpec::from_config(&ModelConfig::load(path)?);
        }
        if args.example.is_none() {
            if let Some(m) = &self.model {
                return ModelSpec::from_config(m);
            }
        }
        let name = args.example.clone().or_else(|| self.example.clone()).ok_or_else(|| {
            Error::InvalidParameter("no model given: use --example, --model or a config file".into())
        })?;
        let example = parse_example(&name, args.ell.or(self.ell), args.variance.or(self.variance))?;
        ModelSpec::example(example)
    }
}

pub fn parse_example(name: &str, ell: Option<f64>, variance: Option<f64>) -> Result<Example> {
    match name {
        "uniform-band" => Ok(Example::UniformBand {
            width: ell.unwrap_or(0.2),
        }),
        "triangular-goe" => Ok(Example::TriangularGoe),
        "semicircle" => Ok(Example::Semicircle {
            variance: variance.unwrap_or(1.0),
        }),
        other => Err(Error::InvalidParameter(format!(
            "unknown example '{other}' (expected uniform-band, triangular-goe or semicircle)"
        ))),
    }
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::InvalidParameter(format!("expected start:stop:step, got '{text}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, h) = (v[0], v[1], v[2]);
    if !(h > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    let steps = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=steps).map(|k| a + k as f64 * h).collect())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be >= {min}, got {v}")))
    }
}

fn grid(args: &GridArgs, cfg: &ExperimentConfig, default: (f64, f64, usize)) -> Result<UniformGrid> {
    let lo = args.lo.or(cfg.lo).unwrap_or(default.0);
    let hi = args.hi.or(cfg.hi).unwrap_or(default.1);
    let points = at_least("points", args.points.or(cfg.points).unwrap_or(default.2), 2)?;
    UniformGrid::new(lo, hi, points)
}

fn support_grid_default(model: &ModelSpec) -> (f64, f64, usize) {
    let (lo, hi) = model.support();
    (lo, hi, 201)
}

/// Support of `model` shrunk by 2% of its width on each side.
fn inner_grid_default(model: &ModelSpec) -> (f64, f64, usize) {
    let (lo, hi) = model.support();
    let w = hi - lo;
    (lo + 0.02 * w, hi - 0.02 * w, 200)
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub fn cmd_theory(args: &TheoryArgs) -> Result<PathBuf> {
    let cfg = ExperimentConfig::from_common(&args.common)?;
    let model = cfg.model(&args.model)?;
    let grid = grid(&args.grid, &cfg, support_grid_default(&model))?;
    let out = cfg.out_dir(&args.common);
    let table = correction_f(&model, &grid, &PvQuadratureConfig::for_model(&model))?;
    prepare_out(&out)?;
    let path = out.join("correction.csv");
    write_csv_file(&path, &correction_rows(&table))?;
    Ok(path)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<PathBuf> {
    let cfg = ExperimentConfig::from_common(&args.common)?;
    let model = match args.semicircle_c {
        Some(c) => ModelSpec::example(Example::Semicircle {
            variance: positive("semicircle-c", c)?,
        })?,
        None => cfg.model(&args.model)?,
    };
    let eps = non_negative("eps", args.eps.or(cfg.eps).unwrap_or(0.0))?;
    let (lo, hi) = model.support();
    let width = hi - lo;
    let eta = positive("eta", args.eta.or(cfg.eta).unwrap_or(1e-3 * width))?;
    // The perturbed law lives within 2 sqrt(ε ‖σ²‖) of the unperturbed support.
    let spread = 2.0 * (eps * model.profile().bound()).sqrt();
    let pad = spread + 0.1 * width;
    let grid = grid(&args.grid, &cfg, (lo - pad, hi + pad, 401))?;
    let solver = SolverConfig {
        nodes: at_least("nodes", args.nodes.or(cfg.nodes).unwrap_or(SolverConfig::default().nodes), 1)?,
        ..SolverConfig::default()
    };
    solver.validate()?;
    let out = cfg.out_dir(&args.common);
    let table = stieltjes_invert(&model, eps, &grid, eta, &solver)?;
    info!("mass {:.6}", table.mass());
    prepare_out(&out)?;
    let path = out.join("density.csv");
    write_csv_file(&path, &density_rows(&table))?;
    Ok(path)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<PathBuf> {
    let cfg = ExperimentConfig::from_common(&args.common)?;
    let model = cfg.model(&args.model)?;
    let n = at_least("n", args.n.or(cfg.n).unwrap_or(1000), 1)?;
    let eps = positive("eps", args.eps.or(cfg.eps).unwrap_or(0.01))?;
    let replicates = at_least("replicates", args.replicates.or(cfg.replicates).unwrap_or(20), 1)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let grid = grid(&args.grid, &cfg, inner_grid_default(&model))?;
    let out = cfg.out_dir(&args.common);

    let ensemble = model.ensemble();
    let baseline = sample_perturbed(n, 0.0, &ensemble, seed, 0)?;
    let samples = run_replicates(n, eps, &ensemble, seed, replicates)?;
    let shift = replicate_average(&samples, &baseline, &grid)?;
    check_holder(&model)?;
    let pv = PvQuadratureConfig::for_model(&model);
    let theory = grid
        .iter()
        .map(|s| correction_value(&model, s, &pv))
        .collect::<Result<Vec<_>>>()?;

    prepare_out(&out)?;
    write_csv_file(out.join("eigenvalues.csv"), &eigenvalue_rows(&samples))?;
    let path = out.join("shift.csv");
    write_csv_file(&path, &shift_rows(&shift, &theory))?;
    let meta = RunMetadata {
        command: "simulate".into(),
        n,
        eps,
        seed,
        replicates,
        model_hash: model.config().map(|c| c.hash()).unwrap_or_default(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    meta.write(out.join("metadata.json"))?;
    Ok(path)
}

pub fn cmd_burgers(args: &BurgersArgs) -> Result<PathBuf> {
    let cfg = ExperimentConfig::from_common(&args.common)?;
    let c = args
        .c
        .or(cfg.c)
        .ok_or_else(|| Error::InvalidParameter("--c is required".into()))?;
    let c = positive("c", c)?;
    let out = cfg.out_dir(&args.common);
    if args.semigroup || cfg.semigroup.unwrap_or(false) {
        let t = positive("t", args.t.or(cfg.t).unwrap_or(0.25))?;
        let sg = SemigroupConfig {
            smoothing_eta: positive("eta", args.eta.or(cfg.eta).unwrap_or(1e-3))?,
            points: at_least("points", args.points.or(cfg.points).unwrap_or(401), 2)?,
            ..SemigroupConfig::default()
        };
        let report = semigroup_check(c, t, &sg)?;
        println!("semigroup c = {c} t = {t}: sup error {:.3e}", report.sup_error);
        prepare_out(&out)?;
        let path = out.join("semigroup.csv");
        write_csv_file(&path, &semigroup_rows(&report))?;
        return Ok(path);
    }
    let times = parse_range(args.t_grid.as_deref().or(cfg.t_grid.as_deref()).unwrap_or("0:0.2:0.05"))?;
    let ds = positive("ds", args.ds.or(cfg.ds).unwrap_or(0.01))?;
    let t_max = *times.last().expect("range is non-empty");
    let grid = semicircle_grid(c + t_max, ds)?;
    let flow = DensityFlow::semicircle(c, &times, &grid)?;
    let table = burgers_residual(&flow, &PvQuadratureConfig::for_width(4.0 * (c + t_max).sqrt()))?;
    println!("burgers c = {c}: max interior residual {:.3e}", table.max_abs());
    prepare_out(&out)?;
    let path = out.join("residual.csv");
    write_csv_file(&path, &residual_rows(&table))?;
    Ok(path)
}

/// Returns `Err(Error::Hypothesis)` when any check fails, after printing the
/// report.
pub fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let cfg = ExperimentConfig::from_common(&args.common)?;
    let model = cfg.model(&args.model)?;
    let samples = at_least("samples", args.samples.or(cfg.samples).unwrap_or(200), 2)?;
    let report = validate_hypotheses(&model, samples);
    print!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        Err(Error::Hypothesis(format!("failed checks: {}", names.join(", "))))
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::Config(_) | Error::Json(_) => EXIT_USAGE,
        Error::Hypothesis(_)
        | Error::AsymmetricProfile(_)
        | Error::InconsistentKernel(_)
        | Error::NonMonotoneSymbol(_)
        | Error::InvalidDensity(_) => EXIT_HYPOTHESIS,
        _ => EXIT_NUMERICAL,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let dispatch = || -> Result<()> {
        match &cli.command {
            Command::Theory(a) => println!("wrote {}", cmd_theory(a)?.display()),
            Command::Solve(a) => println!("wrote {}", cmd_solve(a)?.display()),
            Command::Simulate(a) => println!("wrote {}", cmd_simulate(a)?.display()),
            Command::Burgers(a) => println!("wrote {}", cmd_burgers(a)?.display()),
            Command::Validate(a) => cmd_validate(a)?,
        }
        Ok(())
    };
    match cli.threads {
        Some(0) => Err(Error::InvalidParameter("--threads must be >= 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(dispatch),
        None => dispatch(),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.verbose { "debug" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
