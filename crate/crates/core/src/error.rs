use thiserror::Error;

use crate::fock::Basis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("truncation too small: {what} needs n_max >= {needed}, have {have}")]
    TruncationTooSmall {
        what: &'static str,
        needed: usize,
        have: usize,
    },

    #[error("basis mismatch: expected {expected}, found {found}")]
    BasisMismatch { expected: Basis, found: Basis },

    #[error("A² coupling policy is required but none was configured")]
    PolicyMissing,

    #[error("coupling table does not cover g = {0}")]
    PolicyOutOfRange(f64),

    #[error("Δ_g is undefined: sqrt(ω_c / g C_g) = 2")]
    DegenerateDelta,

    #[error("negative radicand {0} in Δ_g")]
    NegativeRadicand(f64),

    #[error("approximant family does not match parameters: {0}")]
    FamilyParamMismatch(String),

    #[error("shifted resolvent solve failed: {0}")]
    SolveFailure(String),

    #[error("operator is not hermitian (relative residual {0:e})")]
    NotHermitian(f64),

    #[error("truncation ceiling n_max = {ceiling} reached with unconverged levels")]
    TruncationCeiling { ceiling: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("dump parse error at line {line}: {msg}")]
    DumpParse { line: usize, msg: String },
}
