use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Input(String),

    /// Argument outside the domain of a formula (e.g. a moment order below -1).
    #[error("domain error: {0}")]
    Domain(String),

    /// Signpost data that does not describe a tree.
    #[error("reconstruction failed at cut-tree node {node}: {reason}")]
    Reconstruction { node: usize, reason: String },

    /// A quantity that would divide by a vanishing mass.
    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
