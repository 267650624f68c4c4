use thiserror::Error;

use crate::graph::EdgeId;

#[derive(Debug, Error)]
pub enum Error {
    /// The input does not describe a well-formed bipartite multigraph.
    #[error("structural error: {0}")]
    Structural(String),

    /// An internal invariant failed; the input was not what the caller claimed.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// An alternating step would push an edge weight outside [0, 1].
    #[error("step {step}/{denominator} leaves [0, 1] on edge {edge}")]
    Range {
        edge: EdgeId,
        step: u64,
        denominator: u64,
    },

    #[error("unsupported parameters d={d}, k={k}: a k-factor is only guaranteed when d is odd or k is even")]
    Unsupported { d: usize, k: usize },

    #[error(
        "a 2-factor needs an even degree, got d={d}; odd degrees go through the 1-factor step"
    )]
    OddDegree { d: usize },

    #[error("brute force refused: {edges} edges exceeds the limit of {limit}")]
    SizeGuard { edges: usize, limit: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
