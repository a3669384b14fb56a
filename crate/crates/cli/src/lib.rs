//! Command-line front end: scenario loading, analytic front curves, region
//! bounds, simulation and verification, with all artifacts written under
//! one output directory together with a `manifest.json`.

pub mod commands;
pub mod output;
pub mod verify;

use clap::{Args, Parser, Subcommand};
use richards_front::constitutive::PresetP;
use richards_front::scenario::{uniform_times, Scenario, ScenarioError, DEFAULT_OUTPUTS, PRESET_DOMAIN_FACTOR};
use richards_front::solver::Grid;
use std::path::PathBuf;
use thiserror::Error;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "RICHARDS_FRONT_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    /// 0 success, 1 verification or run failure, 2 configuration error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Runtime(_) | CliError::VerificationFailed(_) => 1,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "richards-front", version, about = "Wetting-front bounds and simulations for the degenerate Richards equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Front curves R^ω(t) for a fan of directions.
    Analyze(AnalyzeArgs),
    /// Region bound polylines at the requested times.
    Envelope(EnvelopeArgs),
    /// Run the solver and write fields and diagnostics.
    Simulate(RunArgs),
    /// Run the solver, then every verification check.
    Verify(VerifyArgs),
    /// List the built-in presets and the power-law family.
    Scenarios(ScenariosArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Built-in preset: p_invsqrt, p_const, p_linear or p_sqrt.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: Source,
    /// Single direction in radians; default is a fan.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Number of fan directions.
    #[arg(long, default_value_t = 36)]
    pub directions: usize,
    #[arg(long, default_value_t = 4.0)]
    pub t_max: f64,
    /// Number of time samples in [0, t_max].
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub source: Source,
    /// Times at which to emit bounds.
    #[arg(long = "t", value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
    pub times: Vec<f64>,
    /// Points per polyline arc.
    #[arg(long, default_value_t = 180)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    /// Quick resolution (256 cells in 1D, 128² in 2D, dt = 1e-3).
    #[arg(long)]
    pub quick: bool,
    /// Spatial dimension of preset runs.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dimension: u8,
    /// Overrides the horizon T.
    #[arg(long)]
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also repeat the run at ε ∈ {1e-5, 1e-6, 1e-7}.
    #[arg(long)]
    pub continuation: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScenariosArgs {
    /// Also write quick scenario files for every preset here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn parse_preset(name: &str) -> Result<PresetP, CliError> {
    name.parse::<PresetP>().map_err(|_| {
        let known: Vec<&str> = PresetP::ALL.iter().map(|p| p.name()).collect();
        CliError::Config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

/// Scenario from `--preset` or `--config`, with CLI overrides applied.
pub fn resolve_scenario(source: &Source, quick: bool, dimension: usize, t_max: Option<f64>) -> Result<Scenario, CliError> {
    let mut s = match (&source.preset, &source.config) {
        (Some(name), None) => {
            let p = parse_preset(name)?;
            if quick { Scenario::quick(p, dimension) } else { Scenario::full(p, dimension) }
        }
        (None, Some(path)) => Scenario::load(path)?,
        (None, None) => return Err(CliError::Config("one of --preset or --config is required".into())),
        (Some(_), Some(_)) => return Err(CliError::Config("--preset and --config are mutually exclusive".into())),
    };
    if let Some(t) = t_max {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("--t-max must be positive, got {t}")));
        }
        s.horizon = t;
        s.output_times = uniform_times(t, DEFAULT_OUTPUTS);
        if source.preset.is_some() {
            let model = s.model().map_err(|e| CliError::Config(e.to_string()))?;
            s.half_width = Some(PRESET_DOMAIN_FACTOR * Grid::required_half_width(&model, s.r0, t));
        }
    }
    Ok(s.validate()?)
}

/// Caps the rayon pool at `RICHARDS_FRONT_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    #[cfg(feature = "parallel")]
    {
        // A pool that already exists keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

/// Runs one parsed command line; the message is for stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::Envelope(a) => commands::envelope(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Scenarios(a) => commands::scenarios(&a),
    }
}

/// Parses `args` and runs, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
