//! `spiraldim` — simulate discrete spirals of planar polar normal-form maps,
//! estimate the box dimension of their orbits, analyse overlap sequences and
//! classify bifurcation scenarios.
//!
//! Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 classification
//! refused (resonant rotation angle).

mod commands;
mod config;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "spiraldim",
    version,
    about = "Discrete spirals near nonhyperbolic fixed points: simulation, box-dimension estimation, bifurcation classification"
)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.dir from the config; default "out").
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Monte Carlo seed (overrides estimator.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for ladder rungs (results are thread-count independent).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Tabular output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an orbit and write it with metadata.
    Simulate,
    /// Estimate the box dimension from an ε-ladder; writes ladder, report
    /// and an optional log-log SVG plot.
    Boxdim,
    /// Compute overlap-distance sequences y, z, w and the ordering regime.
    Overlap,
    /// Full chain: simulate, overlap analysis, dimension fit, scenario
    /// classification with verdict.
    Classify,
    /// Center-manifold reduction of a Cartesian [system] with the lifted
    /// orbit dimension.
    Centermanifold,
    /// Leading-order polar map of a [flow], with fitted coefficients.
    Hopfmap,
    /// Simulate the [map] across the sweep.mu parameter list.
    Sweep,
}

/// Errors mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2: configuration problems.
    Config(anyhow::Error),
    /// Exit 3: numeric failures.
    Numeric(anyhow::Error),
    /// Exit 4: classification refused.
    Refused(anyhow::Error),
}

impl CliError {
    pub fn config(e: anyhow::Error) -> Self {
        CliError::Config(e)
    }
    pub fn numeric<E: std::fmt::Display>(e: E) -> Self {
        CliError::Numeric(anyhow::anyhow!("{e}"))
    }
    /// Resonance refusals exit with 4, everything else is numeric.
    pub fn refused_or_numeric(e: spiraldim::Error) -> Self {
        match e {
            spiraldim::Error::ResonantAngle(_) => CliError::Refused(anyhow::anyhow!("{e}")),
            other => CliError::Numeric(anyhow::anyhow!("{other}")),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(e)) => {
            eprintln!("numeric error: {e:#}");
            ExitCode::from(3)
        }
        Err(CliError::Refused(e)) => {
            eprintln!("classification refused: {e:#}");
            ExitCode::from(4)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    let config_path = cli
        .config
        .ok_or_else(|| CliError::config(anyhow::anyhow!("--config PATH is required")))?;
    let mut cfg = RunConfig::load(&config_path).map_err(CliError::config)?;
    if let Some(seed) = cli.seed {
        cfg.estimator.seed = Some(seed);
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::config(anyhow::anyhow!("cannot create {}: {e}", out.display())))?;

    match cli.command {
        Command::Simulate => commands::cmd_simulate(&cfg, &out, cli.format),
        Command::Boxdim => commands::cmd_boxdim(&cfg, &out),
        Command::Overlap => commands::cmd_overlap(&cfg, &out),
        Command::Classify => commands::cmd_classify(&cfg, &out),
        Command::Centermanifold => commands::cmd_centermanifold(&cfg, &out),
        Command::Hopfmap => commands::cmd_hopfmap(&cfg, &out),
        Command::Sweep => commands::cmd_sweep(&cfg, &out, cli.format),
    }
}
