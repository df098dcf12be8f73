use thiserror::Error;

/// Errors shared by every layer of the crate.
///
/// Contract violations (windows too small, vectors too short) are reported
/// eagerly so that a caller never receives silently truncated data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("off-diagonal entry a[{index}] must be positive, got {value}")]
    NonPositiveOffDiagonal { index: usize, value: f64 },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("coefficient arrays must have equal length, got len(a) = {a_len}, len(b) = {b_len}")]
    LengthMismatch { a_len: usize, b_len: usize },

    #[error("coefficient window of length {window} is too small, need at least {needed}")]
    WindowTooSmall { window: usize, needed: usize },

    #[error("kernel depth {depth} is too small, need at least {needed}")]
    KernelDepthTooSmall { depth: usize, needed: usize },

    #[error("response vector of length {len} is too short, need at least {needed}")]
    ResponseTooShort { len: usize, needed: usize },

    #[error("response vector must have odd length, got {len}")]
    EvenResponseLength { len: usize },

    #[error("matrix is not positive definite at leading dimension {k} (pivot {pivot})")]
    NotPositiveDefinite { k: usize, pivot: f64 },

    #[error("linear solve residual {residual} exceeds tolerance {tolerance}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("degenerate control at horizon {horizon}: every admissible source start vanishes")]
    DegenerateControl { horizon: usize },

    #[error("invalid response data at step {k}: recovered a[{k}]^2 = {value} is not positive")]
    InvalidRecoveredSquare { k: usize, value: f64 },

    #[error("invalid response data: leading entry {value} is not positive")]
    NonPositiveLeadingEntry { value: f64 },

    #[error("eigenvalue bisection failed to converge for index {index}")]
    EigenNonConvergence { index: usize },

    #[error("measure atom {index} has non-positive mass {value}")]
    NonPositiveMass { index: usize, value: f64 },

    #[error("measure support points must be distinct, {value} repeats")]
    DuplicateSupportPoint { value: f64 },

    #[error("cannot represent {value} as an exact rational")]
    NotRational { value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
