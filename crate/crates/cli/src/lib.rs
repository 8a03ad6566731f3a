//! Library side of the `tongues` binary: argument types, command runners and
//! report serialization.

pub mod commands;
pub mod range;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use range::RangeSpec;
use report::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] tongues_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(e) => match e {
                tongues_core::Error::InvalidParams(_) | tongues_core::Error::InvalidArgument(_) => {
                    2
                }
                tongues_core::Error::Integration(tongues_core::OdeError::InvalidConfig(_)) => 2,
                _ => 3,
            },
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tongues",
    version,
    about = "Rotation numbers and phase-locking tongues of x' = nu sin x + a + s sin t"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Coupling ν (nonzero).
    #[arg(long, global = true, default_value_t = 1.0, allow_hyphen_values = true)]
    pub nu: f64,
    /// Relative integration tolerance; the absolute tolerance is 1% of it.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Rotation number at one point.
    Rotnum {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, default_value_t = 1 << 16)]
        max_periods: usize,
    },
    /// Rotation numbers on an (a, s) grid.
    Grid {
        /// lo:hi:step
        #[arg(long, allow_hyphen_values = true)]
        a_range: RangeSpec,
        /// lo:hi:step
        #[arg(long, allow_hyphen_values = true)]
        s_range: RangeSpec,
        #[arg(long, default_value_t = 1 << 16)]
        max_periods: usize,
    },
    /// Boundaries of the r-tongue at one s or along a range.
    Tongue {
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "s_range")]
        s: Option<f64>,
        /// lo:hi:step
        #[arg(long, allow_hyphen_values = true)]
        s_range: Option<RangeSpec>,
        /// Tolerance on the boundary abscissas.
        #[arg(long, default_value_t = 1e-10)]
        a_tol: f64,
    },
    /// Adjacencies of the r-tongue with s in a range.
    Adjacency {
        #[arg(long, allow_hyphen_values = true)]
        r: i64,
        /// lo:hi
        #[arg(long, allow_hyphen_values = true)]
        s_range: RangeSpec,
        /// Skip the star condition evaluation at each adjacency.
        #[arg(long)]
        no_condition: bool,
    },
    /// Monodromy matrix of the complex linear system.
    Monodromy {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Run acceptance criteria (all, or the listed ids).
    Verify { criteria: Vec<u8> },
}
