use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("inconsistent thermal initialization: m0 = {m0} requires temperature_ratio = {required}, got {given}")]
    InconsistentThermal { m0: f64, required: f64, given: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("band [{lo}, {hi}] lies outside the support of the spectral density")]
    BandOutsideSupport { lo: f64, hi: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical divergence: {guard} guard tripped at t = {t} (|value| = {value:e})")]
    Divergence { guard: &'static str, t: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
