use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration field violates its invariant.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// A malformed row or line in an input file.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Structurally invalid input (empty file, wrong header, ordering).
    #[error("format error: {0}")]
    Format(String),

    #[error("capacitance bracket [{c_lo} F, {c_hi} F] does not straddle target {target}: availability {avail_lo} at c_lo, {avail_hi} at c_hi")]
    Bracket {
        c_lo: f64,
        c_hi: f64,
        avail_lo: f64,
        avail_hi: f64,
        target: f64,
    },

    #[error("availability is not monotone in capacitance: {available_lo} at {c_lo} F but {available_hi} at {c_hi} F")]
    NonMonotonic {
        c_lo: f64,
        c_hi: f64,
        available_lo: f64,
        available_hi: f64,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    /// I/O error annotated with the path it concerns.
    pub fn io_at(path: &std::path::Path, err: io::Error) -> Self {
        Error::Io(io::Error::new(
            err.kind(),
            format!("{}: {err}", path.display()),
        ))
    }

    /// True for failures caused by the filesystem rather than by content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        let message = err.to_string();
        match err.into_kind() {
            csv::ErrorKind::Io(e) => Error::Io(e),
            _ => Error::Parse { line, message },
        }
    }
}
