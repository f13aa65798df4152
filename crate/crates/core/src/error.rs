//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite coordinates ({x}, {y})")]
    NonFinitePoint { x: f64, y: f64 },

    /// An iterate overflowed f64. Orbit-level code catches this and reports
    /// escape; it only surfaces from a bare `apply` on an enormous input.
    #[error("numeric blowup during map evaluation")]
    NumericBlowup,

    /// The second-component map stopped being increasing near `t` while
    /// solving for a preimage, so the inverse is not defined there.
    #[error("inverse solve lost monotonicity near t = {0}")]
    MonotonicityLost(f64),

    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("origin is not a saddle for these parameters")]
    OriginNotSaddle,

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
