use std::io;

use conjunction_core::Error as CoreError;
use thiserror::Error;

use crate::kvn::KvnError;

pub type ToolResult<T> = Result<T, ToolError>;

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("{0}")]
    Kvn(#[from] KvnError),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("{0}")]
    Input(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl ToolError {
    pub fn core(context: impl Into<String>, source: CoreError) -> Self {
        ToolError::Core {
            context: context.into(),
            source,
        }
    }

    /// Process exit status: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Core { source, .. } if is_numerical(source) => 3,
            _ => 2,
        }
    }
}

impl From<CoreError> for ToolError {
    fn from(source: CoreError) -> Self {
        ToolError::core("computation failed", source)
    }
}

fn is_numerical(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::NotPositiveDefinite { .. }
            | CoreError::NonFinite
            | CoreError::NonFiniteObjective { .. }
            | CoreError::NoBracket { .. }
            | CoreError::QuadratureNotConverged { .. }
            | CoreError::DegenerateGeometry(_)
            | CoreError::EbInfeasible { .. }
    )
}
