//! Configuration, orchestration and output for the `optocool` binary.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod pipeline;

pub use config::RunConfig;
pub use pipeline::{compare, execute, Comparison, RunOutput};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Divergence(String),
    #[error("tolerance exceeded: max |dN_b| = {max_abs:.3e}, max relative = {max_rel:.3e}")]
    Tolerance { max_abs: f64, max_rel: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Engine(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Tolerance { .. } => 4,
            CliError::Io(_) | CliError::Engine(_) => 1,
        }
    }
}

impl From<optocool::Error> for CliError {
    fn from(e: optocool::Error) -> Self {
        use optocool::Error as E;
        match e {
            E::Divergence { .. } => CliError::Divergence(e.to_string()),
            E::DegenerateGrid(_)
            | E::InvalidParameter { .. }
            | E::InconsistentThermal { .. }
            | E::InvalidSchedule(_)
            | E::BandOutsideSupport { .. }
            | E::Unsupported(_) => CliError::Config(e.to_string()),
            E::GridMismatch(_) => CliError::Engine(e.to_string()),
        }
    }
}
