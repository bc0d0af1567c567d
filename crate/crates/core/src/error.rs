use thiserror::Error;

/// Errors raised by oracles, solvers, online runs and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for ground set of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{what}: enumeration budget exceeded ({size} > {limit})")]
    Budget {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("validation error at {location}: {message}")]
    Validation { location: String, message: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn validation(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn in_round(self, round: usize) -> Self {
        Error::Round {
            round,
            source: Box::new(self),
        }
    }

    /// True for errors caused by the caller's input rather than by I/O.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io(_) => false,
            Error::Round { source, .. } => source.is_input_error(),
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
