use std::path::PathBuf;

/// Errors that stop a pipeline stage. Per-record problems (a malformed line,
/// a failed geocode) are counted instead and never surface here.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invalid index snapshot: {0}")]
    Snapshot(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("evaluation set is empty: no tweet has GPS coordinates and both text-derived locations")]
    EmptyEvalSet,

    #[error("hydration: {0}")]
    Hydrate(String),

    #[error("authentication failed: {0}")]
    Auth(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn read(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Read {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Write {
            path: path.into(),
            source,
        }
    }
}
