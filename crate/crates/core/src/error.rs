use thiserror::Error;

/// Errors produced by the learning pipeline and its building blocks.
#[derive(Debug, Error)]
pub enum PgpuError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("length mismatch: {what} has {actual} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid label {0}: labels must be +1 or -1")]
    InvalidLabel(i64),

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("constant decision values: cannot fit a sigmoid")]
    ConstantDecisionValues,

    #[error("not enough observed positives: need {needed}, have {available}")]
    NotEnoughPositives { needed: usize, available: usize },

    #[error("relabelling produced one class")]
    OneClassRelabel,

    #[error("infeasible KMM constraints: upper bound {upper_bound} cannot reach mean {min_mean}")]
    InfeasibleKmm { upper_bound: f64, min_mean: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("missing latent labels: {0}")]
    MissingLatentLabels(String),

    #[error("no boundary candidate could be evaluated")]
    NoViableBoundary,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PgpuError>;

pub(crate) fn check_label(label: i8) -> Result<()> {
    if label == 1 || label == -1 {
        Ok(())
    } else {
        Err(PgpuError::InvalidLabel(label as i64))
    }
}
