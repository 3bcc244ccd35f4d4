use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {inner}")]
    InFile { path: PathBuf, inner: Box<Error> },
    #[error("invalid name: {0}")]
    InvalidName(String),
    #[error("unknown name component `{0}`")]
    UnknownComponent(String),
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("no events")]
    NoEvents,
    #[error("unknown node {0} in base-station list")]
    UnknownStation(u32),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("horizon {horizon} s is shorter than warm-up {warmup} s")]
    HorizonBeforeWarmup { horizon: u64, warmup: u64 },
}

impl Error {
    /// Attaches the file path to a parse or validation error.
    pub fn in_file(self, path: &Path) -> Error {
        match self {
            e @ (Error::Io { .. } | Error::InFile { .. }) => e,
            other => Error::InFile {
                path: path.to_path_buf(),
                inner: Box::new(other),
            },
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
