use lane_emden_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl HarnessError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config { path: path.into(), message: message.into() }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::Io { .. } | HarnessError::Csv(_) => 1,
            HarnessError::Core(e) => core_exit_code(e),
        }
    }
}

pub(crate) fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Domain(_) | CoreError::ShapeMismatch { .. } | CoreError::NotApplicable(_) | CoreError::Unsupported(_) => 2,
        CoreError::NonConvergence(_) | CoreError::LinearSolve { .. } | CoreError::Bracketing { .. } => 3,
        CoreError::Refused(_) => 4,
    }
}
