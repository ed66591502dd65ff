//! Configuration-driven front end for the prsant simulation core.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{Overrides, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "prsant", version, about = "Graphene patch antenna with a partially reflecting surface")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and field updates.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// FDTD grid resolution in cells per micrometre.
    #[arg(long, global = true)]
    pub resolution: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Closed-form patch sizing and the working geometry.
    Design,
    /// Plane-wave reflection of the PRS unit cell and its LC sheet fit.
    Unitcell,
    /// Patch-to-PRS separation sweep.
    SweepZs,
    /// Full-wave run: S11, realized gain and run summary.
    Simulate,
    /// As `simulate`, plus pattern cuts at every far-field frequency.
    Farfield,
    /// Differences between two `simulate` output directories.
    Compare { run_a: PathBuf, run_b: PathBuf },
    /// Gathers the results in the output directory into one text report.
    Report,
}

impl Cli {
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let overrides = Overrides {
            out: self.out.clone(),
            resolution: self.resolution,
        };
        cfg.resolved(&overrides)
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if cli.workers == Some(0) {
        return Err(CliError::invalid("--workers must be at least 1"));
    }
    let cfg = cli.resolve_config()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Design => commands::cmd_design(&cfg).map(drop),
        Command::Unitcell => commands::cmd_unitcell(&cfg).map(drop),
        Command::SweepZs => commands::cmd_sweep_zs(&cfg).map(drop),
        Command::Simulate => commands::cmd_simulate(&cfg).map(drop),
        Command::Farfield => commands::cmd_farfield(&cfg).map(drop),
        Command::Compare { run_a, run_b } => commands::cmd_compare(&cfg, run_a, run_b).map(drop),
        Command::Report => commands::cmd_report(&cfg).map(drop),
    })
}
