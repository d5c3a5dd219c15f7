//! Batch experiment runner for `itoext`.
//!
//! Each experiment writes `<out>/<name>.csv` and a `<out>/<name>.json`
//! sidecar holding the resolved config, seed, version, verdict and summary.

pub mod config;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{load_config_file, Experiment, ExperimentConfig, Settings, DEFAULTS_HELP};
use output::{write_outcome, write_report, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_STAT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] itoext::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Parser)]
#[command(name = "itoext", version, about = "Stochastic integration experiments", after_help = DEFAULTS_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Poisson contrast: pathwise identity plus mean tests of both integrals
    PoissonExample(Settings),
    /// Itô isometry by Monte Carlo for one driver or all
    Isometry(Settings),
    /// Dyadic approximation error table and left-limit a.e. checks
    Project(Settings),
    /// Q-Wiener trace and isometry checks
    Qwiener(Settings),
    /// Poisson random measure counts, compensation and isometry
    Prm(Settings),
    /// Stochastic heat equation mode variances against the OU formula
    Spde(Settings),
    /// Run the experiment named in the config file
    Run(Settings),
    /// Aggregate the sidecars in an output directory
    Report {
        /// Directory holding earlier experiment outputs
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Resolve flags and the optional config file for `subcommand`.
pub fn resolve(subcommand: Option<Experiment>, flags: Settings) -> Result<ExperimentConfig, CliError> {
    let file = match &flags.config {
        Some(p) => load_config_file(p)?,
        None => Settings::default(),
    };
    if let (Some(sub), Some(named)) = (subcommand, file.experiment) {
        if sub != named {
            return Err(CliError::Config(format!("config file names experiment `{named}` but the subcommand is `{sub}`")));
        }
    }
    let flags = Settings { experiment: subcommand, ..flags };
    ExperimentConfig::resolve(file.overlay(flags))
}

fn execute(cli: Cli) -> Result<(Outcome, Option<PathBuf>), CliError> {
    let (sub, flags) = match cli.command {
        Command::PoissonExample(s) => (Some(Experiment::PoissonExample), s),
        Command::Isometry(s) => (Some(Experiment::Isometry), s),
        Command::Project(s) => (Some(Experiment::Project), s),
        Command::Qwiener(s) => (Some(Experiment::Qwiener), s),
        Command::Prm(s) => (Some(Experiment::Prm), s),
        Command::Spde(s) => (Some(Experiment::Spde), s),
        Command::Run(s) => (None, s),
        Command::Report { out } => return Ok((write_report(&out)?, None)),
    };
    let cfg = resolve(sub, flags)?;
    let outcome = experiments::run(&cfg)?;
    let path = write_outcome(&cfg, &outcome)?;
    Ok((outcome, Some(path)))
}

/// Parse `args`, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok((outcome, path)) => {
            if let Some(p) = path {
                println!("wrote {}", p.display());
            }
            println!("{}", if outcome.pass { "PASS" } else { "FAIL" });
            if outcome.pass {
                EXIT_OK
            } else {
                EXIT_STAT_FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
