//! `autopr`: run single nested-sampling jobs, sweeps and the benchmark suites.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 sampler stall.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use autopr::experiments::Suite;
use autopr::repartition::BetaBoundsMethod;
use autopr::Mode;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Stalled(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Stalled(_) => 2,
            CliError::Config(_) | CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Stalled(m) => write!(f, "sampler stalled: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<autopr::Error> for CliError {
    fn from(e: autopr::Error) -> Self {
        use autopr::Error as E;
        match e {
            E::InvalidArgument(_) | E::Unsupported(_) | E::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            E::Stalled { .. } => CliError::Stalled(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "autopr",
    version,
    about = "Nested sampling with automatic power-prior repartitioning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundsFlag {
    /// Smallest and largest β sample.
    Extrema,
    /// 1st and 99th percentiles of the β samples.
    Percentile,
}

impl From<BoundsFlag> for BetaBoundsMethod {
    fn from(b: BoundsFlag) -> Self {
        match b {
            BoundsFlag::Extrema => BetaBoundsMethod::SampleExtrema,
            BoundsFlag::Percentile => BetaBoundsMethod::percentile_default(),
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nlive: Option<usize>,
    #[arg(long)]
    efr: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// `standard`, `autopr` or `fixed-beta:<b>`.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, value_enum)]
    beta_bounds: Option<BoundsFlag>,
    /// Output directory; overrides `out` in the config. Defaults to `run_out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Output directory. Per-repetition records go under `<out>/records` and
    /// let an interrupted batch resume.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Base seed; repetition `r` uses `seed + r`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_enum)]
    beta_bounds: Option<BoundsFlag>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and write summary.json, dead_points.csv and
    /// posterior_equal_weights.csv.
    Run(RunArgs),
    /// Run every case of a TOML sweep file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Run a built-in benchmark suite: univariate, bivariate or highdim.
    Replicate {
        suite: Suite,
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Write the density of the powered prior over a grid for several β.
    PriorCurve {
        /// TOML file with a `[prior]` table; defaults to N(0, 4²) on [-50, 50].
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [1.0, 0.5, 0.25, 0.01, 0.0])]
        betas: Vec<f64>,
        /// Grid range `lo,hi`; defaults to the prior support.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[arg(long, default_value = "prior_evolution.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::Sweep { config, batch } => commands::sweep(&config, batch),
        Command::Replicate { suite, batch } => commands::replicate(suite, batch),
        Command::PriorCurve {
            config,
            betas,
            range,
            points,
            out,
        } => commands::prior_curve(config.as_deref(), &betas, range.as_deref(), points, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("autopr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
