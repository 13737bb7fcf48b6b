use std::path::PathBuf;

use spectral_threshold_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: CoreError,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Format(String),
    #[error("unknown library instance {0:?}")]
    UnknownInstance(String),
    #[error("input error: {0}")]
    Input(String),
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Format(e.to_string())
    }
}

impl HarnessError {
    pub fn stage(stage: &'static str) -> impl FnOnce(CoreError) -> HarnessError {
        move |source| HarnessError::Stage { stage, source }
    }

    /// Process exit code: 2 for internal invariant violations, 1 for
    /// everything caused by the input.
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            HarnessError::Core(e) | HarnessError::Stage { source: e, .. } => Some(e),
            _ => None,
        };
        match core {
            Some(CoreError::Invariant(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
