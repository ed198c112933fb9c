use std::path::PathBuf;

use thiserror::Error;

use crate::hypothesis::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema: {0}")]
    Schema(String),

    /// A malformed or inconsistent row in a nodes/edges file.
    #[error("{file}:{line}: {message}")]
    Input {
        file: String,
        line: usize,
        message: String,
    },

    #[error("graph: {0}")]
    Graph(String),

    #[error("hypothesis syntax error {0}")]
    Syntax(#[from] ParseError),

    /// The hypothesis is well formed but does not fit the graph schema.
    #[error("hypothesis: {0}")]
    Binding(String),

    #[error("evaluation: {0}")]
    Eval(String),

    #[error("sampler: {0}")]
    Sampler(String),

    #[error("path enumeration truncated after {limit} instances")]
    Truncated { limit: u64 },

    #[error("aggregate undefined: no relevant element in the graph")]
    UndefinedAggregate,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
