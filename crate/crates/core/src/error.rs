//! Error type shared by all numerical modules.

use thiserror::Error;

/// Errors produced by the numerical kernels and the reactor model.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid bracket [{lo}, {hi}]: f values {f_lo} and {f_hi} do not enclose a sign change")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no convergence after {iterations} iterations ({context})")]
    NoConvergence { iterations: usize, context: String },

    #[error("singular matrix: pivot {pivot:e} at row {row}")]
    SingularMatrix { row: usize, pivot: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfDomain { what: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("invalid spectrum: principal eigenvalue {lambda0} is not negative")]
    InvalidSpectrum { lambda0: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("negative base {value} under non-integer exponent {exponent}")]
    NegativeBase { value: f64, exponent: f64 },

    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("concentration {value} below zero at t = {t} with non-integer reaction order")]
    NegativeConcentration { t: f64, value: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
