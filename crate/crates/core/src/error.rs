use thiserror::Error;

/// Errors raised by the laboratory. Variants mirror the failure classes of the
/// individual operations so callers (notably the CLI) can map them to exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid band: r0 = {r0} must be smaller than r1 = {r1} and positive")]
    InvalidBand { r0: f64, r1: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("fit unavailable: {0}")]
    FitUnavailable(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
