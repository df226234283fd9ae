use std::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    InvalidInput(String),
    /// An object was used in a state that does not permit the operation
    /// (e.g. backward on an already-consumed tape).
    InvalidState(String),
    /// The encoder was asked to code something its tables cannot represent.
    Coding(String),
    /// A bitstream or model file failed to parse or verify.
    Decode(String),
    /// Checksum mismatch between a bitstream and the loaded model.
    ChecksumMismatch { expected: u64, actual: u64 },
    /// Underlying I/O failure.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
            Error::Coding(msg) => write!(f, "coding error: {msg}"),
            Error::Decode(msg) => write!(f, "decode error: {msg}"),
            Error::ChecksumMismatch { expected, actual } => write!(
                f,
                "checksum mismatch: expected {expected:#018x}, got {actual:#018x}"
            ),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
