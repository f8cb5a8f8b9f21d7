mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, Settings};

/// Exit statuses; stable across versions.
const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(name = "nelson-tfd", version, about = "Thermal Nelson stochastic mechanics simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Dump sample paths and the moment time series.
    Simulate,
    /// Marginal histogram with analytic overlay and chi-square footer.
    Histogram,
    /// Uncertainty product table over a β̄ sweep.
    Uncertainty,
    /// Field-equation residuals of the equilibrium solution.
    Residuals,
}

#[derive(Args)]
struct Overrides {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "F")]
    beta_bar: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    paths: Option<usize>,
    #[arg(long, global = true, value_name = "F")]
    dt: Option<f64>,
    #[arg(long, global = true, value_name = "F")]
    horizon: Option<f64>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads; falls back to NELSON_TFD_THREADS, then all cores.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated β̄ values for `uncertainty`.
    #[arg(long, global = true, value_name = "LIST")]
    sweep: Option<String>,
}

impl Overrides {
    fn apply(&self, s: &mut Settings) {
        if let Some(v) = &self.beta_bar {
            s.set("beta_bar", v.clone());
        }
        if let Some(v) = self.paths {
            s.set("paths", v.to_string());
        }
        if let Some(v) = self.dt {
            s.set("dt", v.to_string());
        }
        if let Some(v) = self.horizon {
            s.set("horizon", v.to_string());
        }
        if let Some(v) = self.seed {
            s.set("seed", v.to_string());
        }
        if let Some(v) = self.threads {
            s.set("threads", v.to_string());
        }
        if let Some(v) = &self.out {
            s.set("out", v.display().to_string());
        }
        if let Some(v) = &self.sweep {
            s.set("sweep", v.clone());
        }
    }
}

/// Errors that map onto a documented exit status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Diverged(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
}

impl From<nelson_tfd::Error> for Failure {
    fn from(e: nelson_tfd::Error) -> Self {
        use nelson_tfd::Error::*;
        match e {
            StepDiverged | Diverged { .. } => Failure::Diverged(e.to_string()),
            GridTooCoarse { .. } | GridMismatch | NonPositiveDensity { .. } => Failure::Convergence(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Failure>() {
        Some(Failure::Config(_)) => EXIT_CONFIG,
        Some(Failure::Diverged(_)) => EXIT_DIVERGED,
        Some(Failure::Convergence(_)) => EXIT_CONVERGENCE,
        None => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut settings = match &cli.overrides.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    cli.overrides.apply(&mut settings);
    let cfg = RunConfig::resolve(&settings)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }

    let threads = match cfg.threads {
        Some(n) => Some(n),
        None => match std::env::var("NELSON_TFD_THREADS") {
            Ok(v) => Some(
                v.parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Failure::Config(format!("NELSON_TFD_THREADS: expected a positive integer, got `{v}`")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    let files: &[&str] = match cli.command {
        Command::Simulate => {
            commands::simulate_cmd(&cfg)?;
            &["paths.csv", "moments.csv"]
        }
        Command::Histogram => {
            commands::histogram_cmd(&cfg)?;
            &["histogram.csv", "analytic.csv"]
        }
        Command::Uncertainty => {
            commands::uncertainty_cmd(&cfg)?;
            &["uncertainty.csv"]
        }
        Command::Residuals => {
            commands::residuals_cmd(&cfg)?;
            &["residuals.csv"]
        }
    };
    eprintln!("wrote {}", commands::written(&cfg, files));
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
