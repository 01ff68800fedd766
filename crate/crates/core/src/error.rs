//! Error type shared by the library.

/// Errors produced by model construction and the numeric operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A model specification fails validation (non-positive off-diagonal,
    /// empty period block, modulus >= 1, ...).
    #[error("invalid model ({field}): {message}")]
    InvalidModel { field: &'static str, message: String },

    /// A weight function evaluated to a negative or non-finite value at a
    /// quadrature node.
    #[error("weight not integrable: w({x}) = {value}")]
    BadWeight { x: f64, value: f64 },

    /// An iterative discretization stopped at its refinement cap while the
    /// result was still moving.
    #[error("discretization did not converge: residual {residual:.3e} at cap {cap}")]
    NonConvergent { residual: f64, cap: usize },

    /// A table-backed parameter set is too short for the requested operation.
    #[error("parameter table too short: need index {needed}, have {len}")]
    TableTooShort { needed: u32, len: u32 },

    /// An operation's entry conditions are not met (energy outside the zero
    /// hull, too few zeros in a window, degree out of range, ...).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A value left the representable range and the caller did not request
    /// the scaled (mantissa + exponent) variant.
    #[error("overflow: {0}; use the log-scaled variant")]
    Overflow(String),

    /// Adaptive refinement exceeded its depth cap.
    #[error("refinement cap exceeded: {0}")]
    RefinementCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
