//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the recovery library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A model or dataset failed structural validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical routine failed to converge or produced garbage.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The exponential term e^{alpha^2/(4 beta)} exceeded the growth guard.
    /// Carries the offending angle and the exponent value.
    #[error("bounded-growth guard tripped at theta={theta}: exponent {exponent} exceeds ln(gamma1)")]
    BoundedGrowth { theta: f64, exponent: f64 },

    /// Sample mean hit +-1, so the inverse Q-function has no finite argument.
    #[error("sign mean saturated at index {index} (mu = {mu})")]
    Saturation { index: usize, mu: f64 },

    /// Q^{-1}((mu+1)/2) = 0, so the recovered variance diverges.
    #[error("variance recovery diverges at index {index} (mu = {mu})")]
    Divergence { index: usize, mu: f64 },

    /// Pade coefficient solve hit a singular Hankel system.
    #[error("pade fit degenerate on piece {piece} ({detail})")]
    PadeFit { piece: usize, detail: String },

    /// A scalar solver exhausted its options.
    #[error("solver failed: {0}")]
    Solver(String),

    /// Constrained MLE had no feasible seed point.
    #[error("threshold MLE infeasible: {0}")]
    Infeasible(String),

    /// Config file parsing or schema validation failure.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
