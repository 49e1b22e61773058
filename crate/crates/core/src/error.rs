use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which physical line of a two-line element set an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TleLine {
    One,
    Two,
}

impl fmt::Display for TleLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TleLine::One => f.write_str("line 1"),
            TleLine::Two => f.write_str("line 2"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Fixed-column layout violation. `column` is 1-based.
    #[error("TLE format error at {line}, column {column}: {message}")]
    Format {
        line: TleLine,
        column: usize,
        message: String,
    },

    #[error("TLE checksum mismatch on {line}: expected {expected}, found {found}")]
    Checksum {
        line: TleLine,
        expected: u8,
        found: char,
    },

    /// Malformed trace line. `offset` is a byte offset into the line.
    #[error("trace parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
