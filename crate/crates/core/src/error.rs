use thiserror::Error;

/// Errors raised by the lab's constructors and numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("matrix is not {kind} (defect {defect:.3e})")]
    NotSymmetric { kind: &'static str, defect: f64 },
    #[error("operator is singular or indefinite: {0}")]
    Singular(String),
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn domain(msg: impl Into<String>) -> LabError {
    LabError::Domain(msg.into())
}
