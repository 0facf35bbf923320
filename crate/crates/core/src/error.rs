use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{function}: argument {value} outside domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for support of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("observation {x} has zero marginal probability under the prior")]
    ZeroMarginal { x: usize },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: u128, cap: usize },

    #[error("divergent computation: {0}")]
    Divergent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(function: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        function,
        value,
        expected,
    }
}
