use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix data has {found} entries, expected {expected}")]
    DataLength { expected: usize, found: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace has imaginary part {imag:e}")]
    ComplexTrace { imag: f64 },

    #[error("state must have unit trace, found {trace}")]
    NonUnitTrace { trace: f64 },

    #[error("{name} = {value} outside allowed range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("Kraus map must contain at least one nonzero operator")]
    EmptyKrausMap,

    #[error("input has amplitude on path 2; vacuum must enter port 2")]
    PathTwoSupport,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("malformed JSON: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
