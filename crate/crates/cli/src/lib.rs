//! Library side of the `tfv` binary: argument parsing, the subcommands and the
//! acceptance suite.

pub mod commands;
pub mod config;
pub mod report;
pub mod suite;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use tfv_core::GeomError;

use crate::config::{Flags, RunConfig};
use crate::report::Report;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, unknown names, inapplicable checks. Exit code 2.
    Config(String),
    /// A numerical failure that stopped the run. Exit code 1.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub fn geom(e: GeomError) -> CliError {
    match e {
        GeomError::Config(m) => CliError::Config(m),
        GeomError::Precondition(m) => CliError::Config(format!("precondition failed: {m}")),
        other => CliError::Numeric(other.to_string()),
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        geom(e)
    }
}

/// A report plus any side files (flow traces) to write next to it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<(PathBuf, String)>,
}

impl Outcome {
    pub fn report(report: Report) -> Self {
        Outcome { report, files: Vec::new() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tfv", version, about = "Numerical verification of torse-forming vector fields")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Classify a catalog field over sampled points
    Classify,
    /// Audit sectional curvature on a model space
    Curvature,
    /// Run the non-existence obstruction checks
    Theorem,
    /// Integrate the gradient flow of a scalar and check f(phi_t(p)) = f(p) + t
    Flow,
    /// Run every acceptance criterion
    Suite,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cmd {
        Command::Classify => commands::cmd_classify(cfg),
        Command::Curvature => commands::cmd_curvature(cfg),
        Command::Theorem => commands::cmd_theorem(cfg),
        Command::Flow => commands::cmd_flow(cfg),
        Command::Suite => suite::cmd_suite(cfg),
    }
}
