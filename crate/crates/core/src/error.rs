use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown case family `{0}`")]
    UnknownCase(String),

    #[error("inadmissible case `{case}`: {reason}")]
    Inadmissible { case: String, reason: String },

    #[error("case `{case}` has fixed rank {fixed}, requested n = {requested}")]
    FixedRank {
        case: String,
        fixed: usize,
        requested: usize,
    },

    #[error("invalid rank n = {0}")]
    InvalidRank(usize),

    #[error("case `{0}` has no matrix-model backend")]
    UnsupportedBackend(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("case mismatch: expected `{expected}`, found `{found}`")]
    CaseMismatch { expected: String, found: String },

    #[error("Levi element is numerically singular (condition number {condition:e})")]
    SingularLevi { condition: f64 },

    #[error("compact element fails unitarity check (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("k = {k} out of range for rank n = {n}")]
    RankOutOfRange { k: usize, n: usize },

    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),

    #[error("non-finite integrand value in chunk {chunk}, sample {index}")]
    PoisonedSample { chunk: usize, index: usize },

    #[error("integral diverges under domain doubling (trace: {trace:?})")]
    Divergent { trace: Vec<(f64, f64)> },

    #[error("capability limit: {0}")]
    Capability(String),

    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
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
