use std::path::PathBuf;

use thiserror::Error;

use crate::graph::{Edge, Vertex};

/// Errors produced by the solver, the simulator and the experiment harness.
#[derive(Debug, Error)]
pub enum BapError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("vertex {0} is out of range")]
    VertexOutOfRange(Vertex),

    #[error("edge {0} is not an edge of the graph")]
    MissingEdge(Edge),

    #[error("not a matching: {0}")]
    NotAMatching(String),

    #[error("matching has cardinality {found} but a maximum-cardinality matching has {maximum}")]
    NotMaximum { found: usize, maximum: usize },

    #[error("not a path: {0}")]
    NotAPath(String),

    #[error("path is not augmenting relative to the matching")]
    NotAugmenting,

    #[error("matching is empty")]
    EmptyMatching,

    #[error("instance too large for exhaustive enumeration ({m} agents, {n} tasks)")]
    TooLarge { m: usize, n: usize },

    #[error("communication graph is not connected")]
    Disconnected,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BapError>;

impl BapError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        BapError::InvalidInput(msg.into())
    }

    /// True for errors caused by bad caller input, as opposed to IO failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, BapError::Io { .. } | BapError::Csv(_))
    }
}
