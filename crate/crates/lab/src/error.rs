use std::path::PathBuf;

/// Exit status for a successful run or a passed CHECK.
pub const EXIT_OK: i32 = 0;
/// Exit status for I/O and numerical failures.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for bad arguments or malformed input data.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when the CHECK phase aborts the protocol.
pub const EXIT_ABORT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] prqs_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Data {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Usage(_) | LabError::Data { .. } => EXIT_USAGE,
            LabError::Core(prqs_core::Error::Domain(_)) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}
