use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the analytical model and the simulator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: `{field}` {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit rejected: {reason} (at per-container rate {rho})")]
    FitRejected { reason: &'static str, rho: f64 },

    #[error("invalid trace row {row}: {reason}")]
    InvalidTraceRow { row: usize, reason: String },

    #[error("chain is not ergodic: {} closed classes {classes:?}", classes.len())]
    NonErgodic { classes: Vec<Vec<(usize, usize)>> },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.into(),
    }
}
