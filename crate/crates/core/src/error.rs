use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent arguments (grid mismatch, too few nodes, ...).
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The adaptive integrator could not continue.
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// An event was not found before the integration horizon.
    #[error("no event before horizon t = {horizon}")]
    Horizon { horizon: f64 },

    /// A requested target lies outside the attainable range.
    #[error("range error: {0}")]
    Range(String),

    /// An iterative solver exhausted its budget.
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    /// A hypothesis of a comparison check is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Linear algebra breakdown or non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
