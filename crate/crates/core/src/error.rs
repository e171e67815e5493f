use std::path::PathBuf;

use crate::lattice::Site;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("two atoms occupy site {0}")]
    Occupancy(Site),
    #[error("site {0} lies outside the world box")]
    OutOfBounds(Site),
    #[error("choreography violation: {0}")]
    Choreography(String),
    #[error("mode function supported on vacant site {0}")]
    UnsupportedSite(Site),
    #[error("atom {0} is not present")]
    AtomAbsent(usize),
    #[error("invalid setup: {0}")]
    Setup(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
