use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("{what}: expected {expected}, found {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{}: non-finite value at row {row}, column {col}", path.display())]
    NonFinite { path: PathBuf, row: usize, col: usize },

    #[error(transparent)]
    Core(#[from] clustermap_core::Error),

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },

    /// An offline service query that the service would have refused.
    #[error("{message}")]
    Query { status: u16, message: String },

    #[error("service: {0}")]
    Service(io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status for the CLI. Usage errors (2) come from the
    /// argument parser itself.
    pub fn exit_code(&self) -> u8 {
        use clustermap_core::Error as C;
        match self {
            Error::Read { .. } | Error::Parse { .. } => 3,
            Error::Validation(_) => 4,
            Error::Shape { .. } => 5,
            Error::NonFinite { .. } => 6,
            Error::Core(C::ClassOutOfRange { .. }) => 4,
            Error::Core(C::Shape { .. }) => 5,
            Error::Core(C::NonFinite { .. }) => 6,
            Error::Core(_) => 7,
            Error::Write { .. } => 8,
            Error::Query { status: 404, .. } => 4,
            Error::Query { .. } => 7,
            Error::Service(_) => 1,
        }
    }
}
