use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("pool at {path}, line {line}: {msg}")]
    PoolParse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("pool too small: need {needed} candidates, have {available}")]
    Capacity { needed: usize, available: usize },

    #[error("training diverged at epoch {epoch}, step {step}: loss is not finite")]
    Training { epoch: usize, step: usize },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("checkpoint serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
