use thiserror::Error;

/// Errors surfaced by grid, plane, and decomposition routines.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A frequency or level does not fit on the requested grid.
    #[error("resolution {resolution} too coarse: {what}")]
    ResolutionTooCoarse { resolution: u32, what: String },

    /// Two signals (or a signal and an operator) live on different grids.
    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: u32, right: u32 },

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A sequence of frequencies is empty after validation.
    #[error("empty frequency sequence: {0}")]
    EmptySequence(String),

    /// A bitile collection fails the order-convexity requirement.
    #[error("bitile set is not convex: {0}")]
    NotConvex(String),

    /// A documented precondition of an algorithm does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed tabular input.
    #[error("csv: {0}")]
    Csv(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
