use thiserror::Error;

/// Errors raised by the algebra, series and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("too many variables: {0} (at most 64 supported)")]
    TooManyVariables(usize),

    #[error("product of polynomials sharing variable x{0}")]
    NotMultilinear(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("series truncated at order {have}, order {need} required")]
    InsufficientOrder { have: isize, need: isize },

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite matrix entry at step {step}")]
    NonFinite { step: usize },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
