use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("{value} is outside the tabulated range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("dimension mismatch: expected {expected} elements, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("reflection loss undefined for a zero-magnitude coefficient")]
    UndefinedLoss,

    #[error("dominance direction undefined for an all-zero pattern")]
    UndefinedDominance,

    #[error("malformed schedule: {0}")]
    Structure(String),

    #[error("bad parameter: {0}")]
    Parameter(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            _ => 2,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        }
    }
}
