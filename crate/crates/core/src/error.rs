use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} in block {block} uses variables outside the block")]
    Support { what: String, block: usize },

    #[error("degree error: {0}")]
    Degree(String),

    #[error("dimension cap exceeded: {what} is {size}, cap is {cap}")]
    CapExceeded { what: String, size: usize, cap: usize },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("extraction failed: {0}")]
    Extraction(String),

    #[error("stitching refused: {0}")]
    Stitch(String),

    #[error("certificate error: {0}")]
    Certificate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
