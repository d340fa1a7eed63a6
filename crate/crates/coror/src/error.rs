use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] coror_core::Error),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("corrupt descriptor file: {0}")]
    CorruptDescriptor(String),
    #[error("corrupt template database: {0}")]
    CorruptDb(String),
    #[error("{kind} version {found} is not supported (expected {expected})")]
    VersionMismatch {
        kind: &'static str,
        found: u32,
        expected: u32,
    },
    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },
    #[error("invalid config key `{key}`: {reason}")]
    ConfigValidation { key: String, reason: String },
    #[error("dataset {0} contains no usable fingerprint images")]
    EmptyDataset(String),
    #[error("bad file name `{0}`: expected <subject>_<finger>_<impression>.png|pgm")]
    BadFileName(String),
    #[error("cannot write template database: {0}")]
    DbWriteFailure(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }
}
