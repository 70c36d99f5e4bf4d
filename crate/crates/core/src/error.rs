use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, TpmError>;

#[derive(Debug, Error)]
pub enum TpmError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("enumeration budget exceeded: {walks} walks > budget {budget}")]
    BudgetExceeded { walks: u128, budget: u128 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("cannot sample {needed} negative pairs: only {available} non-edges exist")]
    TooDense { needed: u64, available: u64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl TpmError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TpmError::Io {
            path: path.into(),
            source,
        }
    }
}
