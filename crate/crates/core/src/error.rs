use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("invalid argument `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("matrix is not symmetric (entry ({row}, {col}) differs from its transpose)")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("relative statement requires a positive lower bound on |E f|")]
    MissingMeanBound,

    #[error("integrand declares no Lipschitz constant")]
    MissingLipschitz,

    #[error("bound assumptions not met: {0}")]
    SpecMismatch(String),

    #[error("integrand produced non-finite value {value} at sample {index}")]
    NonFiniteEvaluation { index: usize, value: f64 },

    #[error("sample size plan exceeds the cap of 2^62 (required ≈ {required:e})")]
    Infeasible { required: f64 },

    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("malformed record at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        name,
        reason: reason.into(),
    }
}
