use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: no such file or directory")]
    NotFound { path: PathBuf },

    #[error("{path}:{line}: {message}")]
    Syntax { path: PathBuf, line: usize, message: String },

    #[error("{path}:{line}: invalid JSON record: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("dictionary phrases assigned to more than one category: {}", .0.join(", "))]
    DictionaryConflict(Vec<String>),

    #[error("invalid commit hash {0:?}")]
    InvalidHash(String),

    #[error("archive backend unusable: {0}")]
    BackendUnusable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` has not been run: missing {}", .path.display())]
    MissingPrerequisite { stage: &'static str, path: PathBuf },

    #[error("{0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound { path }
        } else {
            Error::Io { path, source }
        }
    }
}
