use thiserror::Error;

/// Errors produced by the simulation and inference routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not found: {0}")]
    NotFound(String),

    /// Evidence has zero probability under the network.
    #[error("inconsistent evidence: P(evidence) = 0")]
    InconsistentEvidence,

    /// A channel impulse response carries no energy.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    /// An i-hop path group is empty, so no delivery network can be built.
    #[error("no paths between {src} and {dst}")]
    NoPaths { src: String, dst: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("observation is missing source {0}")]
    IncompleteObservation(String),

    #[error("elimination width {width} exceeds cap {cap}")]
    WidthExceeded { width: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
