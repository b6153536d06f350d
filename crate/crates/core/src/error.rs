use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid intrinsic dimension {0}: need n >= 3")]
    InvalidDimension(usize),

    #[error("degenerate immersion: det g = {det:e}{}", fmt_index(.index))]
    DegenerateImmersion { det: f64, index: Option<Vec<usize>> },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("dense assembly refused: {points} grid points exceed cap {cap}; use Lanczos")]
    DenseCapExceeded { points: usize, cap: usize },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    SolverFailure {
        iterations: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("{bound}: need {need} eigenvalues, have {have}")]
    InsufficientEigenvalues {
        bound: String,
        need: usize,
        have: usize,
    },

    #[error("{bound} does not apply: {reason}")]
    DimensionGate { bound: String, reason: String },

    #[error("operator is not positive: lambda_1 = {0}")]
    PositivityViolation(f64),

    #[error("first eigenvalue is attained on distinct lines mu = {0} and mu = {1}")]
    AmbiguousFirstEigenfunction(f64, f64),

    #[error("degenerate coordinate configuration: {0}")]
    DegenerateCoordinates(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

fn fmt_index(index: &Option<Vec<usize>>) -> String {
    match index {
        Some(ix) => format!(" at grid index {ix:?}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
