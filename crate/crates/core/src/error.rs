use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("rating {value} outside scale [{min}, {max}]")]
    OutOfScale { value: f64, min: f64, max: f64 },

    #[error("unknown grade {0:?}")]
    UnknownGrade(String),

    #[error("criterion index {index} out of bounds (valid: 1..={k})")]
    CriterionOutOfBounds { index: usize, k: usize },

    #[error("invalid rating scale: {0}")]
    InvalidScale(String),

    #[error("invalid rank: {0}")]
    InvalidRank(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("tensor of {cells} cells exceeds the memory budget of {budget} cells")]
    MemoryBudget { cells: usize, budget: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn with_context(self, context: impl Into<String>) -> Error {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Error {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Strips `Context` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}
