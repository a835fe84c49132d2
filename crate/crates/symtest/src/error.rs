use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("size limit exceeded: {0}")]
    Oversize(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("group error: {0}")]
    Group(String),
    #[error("acceptance is 1 (separable or symmetric input); ratio undefined")]
    Separable,
    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),
    #[error("unknown name: {0}")]
    Unknown(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SymError>;
