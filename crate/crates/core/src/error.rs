use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input that carries no usable geometry (empty clouds, empty files).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Every target point sits at one location, so no grid can be built.
    /// Callers are expected to fall back to the brute-force path.
    #[error("degenerate grid: all target points coincide; use the brute-force path")]
    DegenerateGrid,

    #[error("{path}: parse error at {location}: {message}")]
    Parse {
        path: PathBuf,
        location: Location,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A structure handed between pipeline stages broke its own invariant.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

/// Where in a file a parse error was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Offset(u64),
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Location::Line(l) => write!(f, "line {l}"),
            Location::Offset(o) => write!(f, "byte offset {o}"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
