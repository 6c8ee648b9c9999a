//! Command-line front end for `sampledyn-core`.
//!
//! Every command reads a JSON configuration, writes its artifacts into an
//! output directory and prints a short summary. Outputs are deterministic
//! given the configuration and seed.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

mod commands;
pub mod config;
mod svg;

pub use config::{Model, RunConfig};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for malformed or inapplicable configurations.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical failures and output errors.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(field: &str, msg: &str) -> Self {
        CliError::Config(format!("{field}: {msg}"))
    }

    pub fn numeric(e: impl Display) -> Self {
        CliError::Numeric(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numeric(_) | CliError::Output { .. } => EXIT_NUMERIC,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sampledyn",
    version,
    about = "Sampling best-response dynamics for coordination games"
)]
#[command(long_about = "Sampling best-response dynamics for coordination games.\n\n\
Each run reads a JSON configuration (--config). The subcommand may be given on the command line or \
as the configuration's \"command\" field; if both are given they must agree. Flags override the \
corresponding configuration fields.\n\n\
Defaults: --out out, t_max 200 (oracle: 50), dt 0.01, resolution 51, seed 0, quiver 15, \
oracle n 10000, oracle samples 10000, oracle grid_points 20, search big_k 1000.\n\n\
Exit codes: 0 success, 2 configuration error, 3 numerical or output failure.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CommandName>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Random seed for Monte Carlo commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid points per axis for basins.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Integration horizon.
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Integration step.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandName {
    /// Stationary states, stability labels and condition reports.
    Analyze,
    /// Phase plot (SVG) and response curves (CSV).
    Phase,
    /// One trajectory of the mean-field dynamics.
    Trajectory,
    /// Basins of attraction on a grid of initial states.
    Basins,
    /// Finite-population simulation and empirical responses.
    Oracle,
    /// Stable-interior indicator and verdicts over a parameter grid.
    Sweep,
    /// Reduce a payoff matrix to normalized form.
    Normalize,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::Analyze => "analyze",
            CommandName::Phase => "phase",
            CommandName::Trajectory => "trajectory",
            CommandName::Basins => "basins",
            CommandName::Oracle => "oracle",
            CommandName::Sweep => "sweep",
            CommandName::Normalize => "normalize",
        }
    }

    fn parse(name: &str) -> Option<Self> {
        [
            CommandName::Analyze,
            CommandName::Phase,
            CommandName::Trajectory,
            CommandName::Basins,
            CommandName::Oracle,
            CommandName::Sweep,
            CommandName::Normalize,
        ]
        .into_iter()
        .find(|c| c.as_str() == name)
    }
}

/// Files and summary produced by a command.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
}

impl Output {
    pub fn file(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }
}

/// Apply command-line overrides to a parsed configuration.
fn apply_flags(cli: &Cli, cfg: &mut RunConfig) {
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.resolution.is_some() {
        cfg.resolution = cli.resolution;
    }
    if cli.tmax.is_some() {
        cfg.t_max = cli.tmax;
    }
    if cli.dt.is_some() {
        cfg.dt = cli.dt;
    }
}

/// Resolve the command and configuration, then run the command.
pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config", "missing"))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    apply_flags(cli, &mut cfg);
    let from_config = match &cfg.command {
        Some(name) => Some(
            CommandName::parse(name)
                .ok_or_else(|| CliError::config("command", &format!("unknown command {name:?}")))?,
        ),
        None => None,
    };
    let command = match (cli.command, from_config) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::config(
                "command",
                &format!(
                    "configuration says {:?} but the command line says {:?}",
                    b.as_str(),
                    a.as_str()
                ),
            ))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            return Err(CliError::config(
                "command",
                "give a subcommand or a \"command\" field",
            ))
        }
    };
    commands::run(command, &cfg)
}

/// Write the files of `output` into `dir`.
pub fn write_output(dir: &Path, output: &Output) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })?;
    for (name, contents) in &output.files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Output { path, source })?;
    }
    Ok(())
}

/// Run the CLI and return the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = execute(&cli).and_then(|out| {
        write_output(&cli.out, &out)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.summary);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
