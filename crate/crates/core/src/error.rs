use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("degree {degree} too large for round {round}")]
    DegreeTooLarge { degree: usize, round: usize },

    #[error("missing moment entry for subset {0}")]
    MissingMoment(String),

    #[error("matrix not PSD within tolerance: minimum eigenvalue {min_eigenvalue:e} < -{tol:e}")]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("subset {0} is not covered by the vector family")]
    Uncovered(String),

    #[error("empty grid: {0}")]
    EmptyGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("NaN detected in solver state at iteration {iteration} ({context})")]
    NanDetected { iteration: usize, context: String },

    #[error("constraint {index} cannot be encoded: {reason}")]
    Unencodable { index: usize, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("guard violated: {0}")]
    Guard(String),

    #[error("assignment does not satisfy constraint {0}")]
    NotSatisfying(usize),

    #[error("coverage gap: pair {0} missing from the Gram index")]
    CoverageGap(String),

    #[error("expander certification failed after {attempts} attempts (best bound {best_bound}, target {target})")]
    CertificationFailed {
        attempts: usize,
        best_bound: f64,
        target: f64,
    },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("provenance mismatch: {0}")]
    Provenance(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
