//! Experiment driver for `nsc-core`: TOML configs in, CSV/checkpoints and a
//! hashed manifest out.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nsc_core::NscError;
use thiserror::Error;

use config::{Experiment, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] NscError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                NscError::Cfl { .. }
                | NscError::NonFinite { .. }
                | NscError::DivergenceViolation { .. }
                | NscError::RealityViolation { .. }
                | NscError::NonzeroVerticalMean { .. }
                | NscError::TooFewSamples { .. }
                | NscError::NonPositiveSample { .. }
                | NscError::ZeroMode
                | NscError::DimensionMismatch { .. } => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            },
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nsc-lab", version, about = "Rotating Navier-Stokes experiments on a periodic box")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Override the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Run the solver; writes monitors.csv, checkpoints and final.nscf.
    Simulate,
    /// Time-integrated L∞ norm of the linear flow over a sweep of Ω.
    Strichartz,
    /// sup of the dispersive kernel over an (A, B) sweep.
    KernelBound,
    /// Distance to the Oseen vortex in self-similar variables.
    OseenConvergence,
    /// Residuals of the energy inequalities along a run.
    EnergyCheck,
    /// Linear decay of the vertical fluctuation.
    RossbyDecay,
}

impl Command {
    pub fn experiment(self) -> Experiment {
        match self {
            Command::Simulate => Experiment::Simulate,
            Command::Strichartz => Experiment::Strichartz,
            Command::KernelBound => Experiment::KernelBound,
            Command::OseenConvergence => Experiment::OseenConvergence,
            Command::EnergyCheck => Experiment::EnergyCheck,
            Command::RossbyDecay => Experiment::RossbyDecay,
        }
    }
}

fn experiment_name(e: Experiment) -> String {
    toml::Value::try_from(e)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Execute one command; returns the manifest digest.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let exp = cli.command.experiment();
    let (mut config, base) = match &cli.config {
        Some(p) => (
            RunConfig::load(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (RunConfig::parse("")?, PathBuf::from(".")),
    };
    if let Some(e) = config.experiment {
        if e != exp {
            return Err(CliError::Config(format!(
                "config is for `{}`, not `{}`",
                experiment_name(e),
                experiment_name(exp)
            )));
        }
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    config.validate()?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| PathBuf::from("nsc-out"));

    // the echo must not depend on where the outputs go
    let mut echo = config.clone();
    echo.output_dir = None;
    echo.experiment = Some(exp);
    let echo = toml::to_string(&echo).map_err(|e| CliError::Output(e.to_string()))?;

    let mut out = output::Outputs::create(&out_dir)?;
    let ctx = commands::Context { config, base };
    let mut work = || commands::dispatch(exp, &ctx, &mut out);
    match cli.threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?
            .install(work)?,
        Some(_) => return Err(CliError::Config("--threads must be >= 1".into())),
        None => work()?,
    }
    out.finish(&experiment_name(exp), &echo)
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(digest) => {
            println!("{digest}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("nsc-lab: {e}");
            e.exit_code()
        }
    }
}
