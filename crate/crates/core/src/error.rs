use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot factor zero")]
    FactorZero,
    #[error("{0} is even; expected an odd integer")]
    EvenArgument(i64),
    #[error("{0} is not squarefree")]
    NotSquarefree(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{what} = {value} exceeds the supported limit {limit}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("term cap of {0} exceeded")]
    TermCap(usize),
    #[error("consistency check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
