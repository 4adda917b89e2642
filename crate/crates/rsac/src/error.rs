//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in this crate.
///
/// The CLI maps these onto its exit-code scheme: invalid parameters and
/// domain violations are usage errors (exit 2), capacity problems exit 3
/// and quadrature convergence failures exit 4.
#[derive(Debug, Error)]
pub enum Error {
    /// A table build or query would need more than the configured resources.
    #[error("capacity: {0}")]
    Capacity(String),

    /// A query argument lies outside the range covered by the tables.
    #[error("query {value} out of range: tables cover 0..={limit}")]
    OutOfRange { value: u64, limit: u64 },

    /// A modulus was used that was not registered when the tables were built.
    #[error("modulus {0} not registered at table build time")]
    UnregisteredModulus(u64),

    /// An argument violates a function's domain.
    #[error("domain: {0}")]
    Domain(String),

    /// Adaptive quadrature could not meet the requested tolerance.
    ///
    /// Carries the best estimate obtained and the remaining error bound.
    #[error("quadrature did not converge: estimate {estimate} with error bound {error_bound}")]
    Convergence { estimate: f64, error_bound: f64 },

    /// A ratio whose denominator count is zero.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    /// A malformed or inconsistent parameter value.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A table cache file failed to load or validate.
    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code used by the command-line front end for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) | Error::OutOfRange { .. } => 3,
            Error::Convergence { .. } => 4,
            _ => 2,
        }
    }
}
