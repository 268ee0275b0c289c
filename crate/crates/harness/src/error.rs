use std::path::PathBuf;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failure at t = {time:.6}: {source}{}", dump.as_ref().map(|p| format!(" (state dumped to {})", p.display())).unwrap_or_default())]
    Solver {
        time: f64,
        #[source]
        source: torusflow_core::Error,
        dump: Option<PathBuf>,
    },

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("analysis failed: {0}")]
    Analysis(#[from] torusflow_core::Error),
}

impl HarnessError {
    /// Process exit code: 1 assertion, 2 solver, 3 configuration or input.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Assertion(_) => 1,
            HarnessError::Solver { .. } => 2,
            HarnessError::Config(_)
            | HarnessError::Io { .. }
            | HarnessError::Csv(_)
            | HarnessError::Json(_)
            | HarnessError::Analysis(_) => 3,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        HarnessError::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
