use std::path::PathBuf;

/// Harness errors, split by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] sff_core::Error),

    #[error("realization {index}: {source}")]
    Realization { index: u64, source: sff_core::Error },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{context}: {source}")]
    Json { context: String, source: serde_json::Error },

    #[error("checks failed: {0}")]
    ChecksFailed(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    /// 1 for bad input, 2 for a numerical failure.
    pub fn exit_code(&self) -> i32 {
        use sff_core::Error as E;
        let numerical = |e: &E| {
            matches!(
                e,
                E::EigenNoConvergence { .. } | E::PartitionUnderflow | E::ZeroEigenWeight { .. } | E::ZeroPairWeight { .. }
            )
        };
        match self {
            LabError::Core(e) if numerical(e) => 2,
            LabError::Realization { source, .. } if numerical(source) => 2,
            LabError::ChecksFailed(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }

    pub(crate) fn json(context: impl Into<String>) -> impl FnOnce(serde_json::Error) -> LabError {
        let context = context.into();
        move |source| LabError::Json { context, source }
    }
}
