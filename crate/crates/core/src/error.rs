//! Error type shared by every module of the crate.

use thiserror::Error;

/// Unified error type for construction, evaluation and integration failures.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A square matrix was required.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// Shapes of two operands are incompatible.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix failed a hermiticity check.
    #[error("matrix not hermitian: max |M - M^dag| = {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    /// A special-function argument left the supported domain.
    #[error("special function overflow: {0}")]
    SpecialFunctionOverflow(String),

    /// A constructor or operation received an invalid parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Correlation functions are only evaluated at non-negative lags.
    #[error("negative lag {0} passed to a correlation evaluation")]
    NegativeLag(f64),

    /// A quadrature did not reach the requested accuracy.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// The ODE integrator could not complete a trajectory.
    #[error("integrator failure: {0}")]
    IntegratorFailure(String),

    /// A lookup (hierarchy index, table entry, field label, ...) found nothing.
    #[error("missing entry: {0}")]
    MissingEntry(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
