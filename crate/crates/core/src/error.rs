use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource guard exceeded: {0}")]
    ResourceGuard(String),

    #[error("malformed fault assignment: {0}")]
    Assignment(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("missing malignancy report for order(s) {0:?}")]
    MissingOrders(Vec<usize>),

    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),

    #[error("interrupted after {0} chunk(s)")]
    Interrupted(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
