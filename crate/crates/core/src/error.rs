use thiserror::Error;

/// Errors produced by construction, validation, and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A channel vector is identically zero where a nonzero link is required.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(&'static str),

    /// A placement violates the region or minimum-spacing constraints.
    #[error("infeasible placement: {0}")]
    InfeasiblePlacement(String),

    /// No feasible placement could be constructed for the requested geometry.
    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    /// A linear system that should be well conditioned failed to solve.
    #[error("singular system: {0}")]
    SingularSystem(&'static str),

    /// Campaign configuration failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Underlying I/O failure while reading configs or writing results.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
