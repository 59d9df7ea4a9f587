use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular input{}: {reason}", index.map(|i| format!(" (matrix {i})")).unwrap_or_default())]
    SingularInput { index: Option<usize>, reason: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("index out of range: {0}")]
    BadIndex(String),

    #[error("bad direction resolution: {0}")]
    BadResolution(String),

    #[error("empty input")]
    EmptyInput,

    #[error("direction sets differ")]
    DirsetMismatch,

    #[error("degenerate body: every witness lies at the origin")]
    DegenerateBody,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("parse error at {location}: {message}")]
    ParseError { location: String, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every exceedance count is zero (eps too large for these walks)")]
    AllZeroCounts,
}

impl Error {
    /// Failures caused by floating-point routines rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalFailure(_) | Error::DegenerateBody)
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ParseError {
            location: location.into(),
            message: message.into(),
        }
    }
}
