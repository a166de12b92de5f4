//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by construction, validation, and experiment checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("band noise requires delta^2 < pi, got delta = {delta}")]
    BandDeltaTooLarge { delta: f64 },

    #[error("band half-width {halfwidth} under-resolved by radial spacing {h_x} (need >= 2 cells)")]
    BandUnresolved { halfwidth: f64, h_x: f64 },

    #[error("band noise requires height 1 on a radial cell boundary; closest boundary is {closest}")]
    BandMisaligned { closest: f64 },

    #[error("band noise requires the forward image of the unit constant curve: {0}")]
    BandDataNonConforming(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// A numerical check that an experiment promises to enforce did not hold.
    #[error("numerical check failed: {0}")]
    CheckFailed(String),

    #[error("{path}:{line}: {reason}")]
    Csv {
        path: String,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
