use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("not a snapshot file (bad magic bytes)")]
    BadMagic,
    #[error("snapshot format version {found_major}.{found_minor} is newer than the supported {supported}.x; upgrade the reader")]
    FutureVersion { found_major: u16, found_minor: u16, supported: u16 },
    #[error("snapshot checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")]
    Checksum { stored: u64, computed: u64 },
    #[error("snapshot truncated or malformed: {0}")]
    Malformed(String),
    #[error("time series: {0}")]
    Series(String),
    #[error(transparent)]
    Core(#[from] muskat_core::Error),
}

pub type Result<T> = std::result::Result<T, IoError>;

impl IoError {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::File { path: path.into(), source }
    }

    pub(crate) fn invalid(key: &str, message: impl Into<String>) -> Self {
        IoError::Invalid { key: key.to_string(), message: message.into() }
    }
}
