use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested truncation degree cannot be resolved by the quadrature.
    #[error("aliasing: degree {degree} needs more than {nodes} quadrature nodes")]
    Aliasing { degree: usize, nodes: usize },

    /// Vector lengths or truncation degrees disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A root finder for quadrature nodes failed to converge.
    #[error("quadrature node solver did not converge (Q = {order}, n = {n})")]
    NodeSolver { order: usize, n: usize },

    /// An adaptive procedure stopped before reaching its tolerance.
    #[error("accuracy not reached: requested {requested:e}, achieved {achieved:e} ({context})")]
    Accuracy {
        requested: f64,
        achieved: f64,
        context: String,
    },

    /// Two routes to the same quantity disagree beyond tolerance.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    /// Radius requested at the south pole.
    #[error("t = -1 maps to an infinite radius")]
    InfiniteRadius,

    #[error("zero function has no Rayleigh quotient")]
    ZeroFunction,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
