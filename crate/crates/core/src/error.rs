use thiserror::Error;

/// Errors raised by the codecs, decoders and the simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial {poly:#x} does not generate GF(2^{m})")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("invalid code parameters: {0}")]
    InvalidCode(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
