//! `dsg`: kink profiles, trajectories, orbit classification, force curves and
//! equation-of-state tables for the double sine-Gordon chain.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dsg_core::DsgError;
use serde::Serialize;

use crate::config::resolve;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("forbidden pressure: {0}")]
    Forbidden(String),
    #[error("only {ok} of {total} grid points succeeded")]
    MostlyFailed { ok: usize, total: usize },
    #[error("integration failed: {0}")]
    Blowup(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn from_core(e: DsgError) -> Self {
        match e {
            DsgError::InvalidParams(_)
            | DsgError::InvalidConfig(_)
            | DsgError::MixedClasses { .. }
            | DsgError::BranchTooSmall { .. }
            | DsgError::TooFewRows { .. } => CliError::Config(e.to_string()),
            DsgError::NotPeriodic { .. } | DsgError::NotBounded { .. } | DsgError::NotPeriodicOrStepLike { .. } => {
                CliError::Forbidden(e.to_string())
            }
            DsgError::NonFiniteState { .. } | DsgError::StepLimitExceeded { .. } => CliError::Blowup(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Forbidden(_) => 3,
            CliError::MostlyFailed { .. } => 4,
            CliError::Blowup(_) => 5,
            CliError::Io(_) | CliError::Numerical(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "dsg", version, about = "Static solutions of the double sine-Gordon equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the exact kink or antikink (CSV: eps,x,phi,dphi,energy_density).
    Kink(KinkFlags),
    /// Integrate the field equation from phi = pi (CSV: x,phi,dphi,P_instant,H).
    Solve(SolveFlags),
    /// Classify one pressure and report its period, energy and density (JSON).
    Classify(ClassifyFlags),
    /// Energy and force per soliton over a pressure grid (CSV + JSON summary).
    Sweep(SweepFlags),
    /// Sweep plus compressibility and maximum density (CSV + JSON summary).
    Eos(SweepFlags),
}

/// Flags shared by every command.
#[derive(Args, Serialize)]
struct Common {
    /// Flat JSON object of flag names; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Worker threads, 0 = one per core.
    #[arg(long, env = "DSG_THREADS")]
    threads: Option<usize>,
    /// Output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct KinkFlags {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    /// Couplings, comma separated [default: 0,1,10]
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, value_enum)]
    polarity: Option<PolarityArg>,
    #[arg(long, allow_negative_numbers = true)]
    x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_max: Option<f64>,
    #[arg(long)]
    x_step: Option<f64>,
    /// Also write a JSON summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SolveFlags {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    /// First integral P; sets dphi at phi = pi.
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    /// Slope at phi = pi, instead of --p.
    #[arg(long, allow_negative_numbers = true)]
    dphi0: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Resample on a uniform x grid with this spacing.
    #[arg(long)]
    x_step: Option<f64>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ClassifyFlags {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SweepFlags {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, value_enum)]
    class: Option<ClassArg>,
    /// Explicit pressures, comma separated; replaces the default grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    p_values: Option<Vec<f64>>,
    #[arg(long)]
    edge_points: Option<usize>,
    #[arg(long)]
    interior_points: Option<usize>,
    #[arg(long)]
    separatrix_clip: Option<f64>,
    #[arg(long)]
    floor_clip: Option<f64>,
    #[arg(long)]
    edge_width: Option<f64>,
    #[arg(long)]
    step_like_max: Option<f64>,
    /// Also locate the critical coupling of harmonic n.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    find_eps_c: bool,
    /// JSON summary path (default stderr).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PolarityArg {
    Kink,
    Antikink,
}

#[derive(Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Rk4Fixed,
    Rkf45Adaptive,
}

#[derive(Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ClassArg {
    Periodic,
    StepLike,
}

fn with_threads<T>(threads: usize, f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Kink(f) => {
            let s: config::KinkSettings = resolve(f.common.config.as_deref(), &f)?;
            with_threads(s.threads, || commands::kink(&s))
        }
        Command::Solve(f) => {
            let s: config::SolveSettings = resolve(f.common.config.as_deref(), &f)?;
            with_threads(s.threads, || commands::solve(&s))
        }
        Command::Classify(f) => {
            let s: config::ClassifySettings = resolve(f.common.config.as_deref(), &f)?;
            with_threads(s.threads, || commands::classify_cmd(&s))
        }
        Command::Sweep(f) => {
            let s: config::SweepSettings = resolve(f.common.config.as_deref(), &f)?;
            with_threads(s.threads, || commands::sweep_cmd(&s, "sweep"))
        }
        Command::Eos(f) => {
            let s: config::SweepSettings = resolve(f.common.config.as_deref(), &f)?;
            with_threads(s.threads, || commands::sweep_cmd(&s, "eos"))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dsg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
