use thiserror::Error;

/// Errors raised by parameter validation and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value for {name}: {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("polar angle {theta} lies outside the collection cone (theta0 = {theta0})")]
    OutsideCone { theta: f64, theta0: f64 },

    #[error("probability row sums to {sum}, expected 1")]
    RowNotNormalized { sum: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error_estimate:e}")]
    QuadratureNotConverged { estimate: f64, error_estimate: f64 },

    #[error("root search failed: {0}")]
    NoBracket(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
