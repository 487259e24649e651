//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors raised by construction, validation, and the reachability recurrences.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Operands have incompatible dimensions or generator counts.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A named invariant on the input data is violated.
    #[error("{0}")]
    InvalidParameter(String),

    /// Evaluation time outside the system's interval of definition.
    #[error("time {t} outside [{t0}, {tf}]")]
    TimeOutOfRange { t: f64, t0: f64, tf: f64 },

    /// The recurrence produced a non-finite intermediate value, typically
    /// because exp(h * M_A) overflows for extreme bounds.
    #[error("numerical overflow in step {step}: {what}")]
    Overflow { step: usize, what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
