use thiserror::Error;

/// Errors raised by the analytical model (fluid algebra, control law,
/// operating-point solver).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("{what} must be non-negative, got {value}")]
    Negative { what: &'static str, value: f64 },
    #[error("{what} must be strictly positive, got {value}")]
    NotPositive { what: &'static str, value: f64 },
    #[error("{what} must lie in [0, 1], got {value}")]
    OutOfUnitInterval { what: &'static str, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("relative rate reduction is undefined for a zero input rate")]
    UndefinedRrr,
    #[error("output rate {x_out} exceeds input rate {x_in}")]
    OutputExceedsInput { x_in: f64, x_out: f64 },
    #[error("zero loss probability implies an unbounded TCP rate")]
    InfiniteRate,
    #[error("no operating point in (0, {capacity}): {reason}")]
    NoOperatingPoint { capacity: f64, reason: String },
    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

pub(crate) fn finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonFinite { what, value })
    }
}

pub(crate) fn non_negative(what: &'static str, value: f64) -> Result<f64> {
    let value = finite(what, value)?;
    if value < 0.0 {
        Err(ModelError::Negative { what, value })
    } else {
        Ok(value)
    }
}

pub(crate) fn positive(what: &'static str, value: f64) -> Result<f64> {
    let value = finite(what, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(ModelError::NotPositive { what, value })
    }
}
