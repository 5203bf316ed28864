use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed line in an input file. `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("cannot resolve term `{0}` in the embedding store")]
    UnresolvedTerm(String),

    #[error("sense key `{0}` is not present in the embedding store")]
    MissingSense(String),

    #[error("lemma `{0}` has no sense embeddings")]
    NoSenses(String),

    #[error("vector length mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("zero-norm vector{0}")]
    ZeroVector(String),

    #[error("invalid bias spec `{name}`: {reason}")]
    InvalidSpec { name: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown word `{0}`")]
    UnknownWord(String),

    #[error("{0}")]
    Degenerate(String),

    #[error("invalid SSSB configuration: {0}")]
    Config(String),

    #[error("score join failed for pair `{pair_id}`: {reason}")]
    Join { pair_id: String, reason: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn within(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn parse(path: impl ToString, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}
