use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid probability vector: {0}")]
    InvalidProbVector(String),

    #[error("invalid label space: {0}")]
    InvalidLabelSpace(String),

    #[error("label space mismatch: {0}")]
    LabelSpaceMismatch(String),

    #[error("feature carries no information (H(F) = 0)")]
    NoInformation,

    #[error("inconsistent decomposition: {0}")]
    InconsistentDecomposition(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("gold labels differ between logs: {0}")]
    GoldMismatch(String),

    #[error("diverged; reduce learning_rate")]
    Diverged,

    #[error("insufficient replicates: {0} (need at least 100)")]
    InsufficientReplicates(usize),

    #[error("dimension mismatch: model expects {expected}, input has {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ordering violation: {0}; inspect estimator warnings")]
    OrderingViolation(String),

    #[error("pipeline order: {0}")]
    PipelineOrder(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
