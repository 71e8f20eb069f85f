use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// No placement satisfies the ordering and window constraints.
    #[error("infeasible: item `{item}` cannot place step {step}")]
    Infeasible { item: String, step: usize },

    /// Too few template slots for a sequence.
    #[error("infeasible alignment: sequence of length {len} does not fit into {slots} slots")]
    TooFewSlots { len: usize, slots: usize },

    #[error("instance exceeds enumeration caps: {0}")]
    CapExceeded(String),

    #[error("unknown item id `{0}`")]
    UnknownItem(String),

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn schema(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach an item id to an infeasibility reported by a per-item routine.
    pub(crate) fn for_item(self, item_id: &str) -> Self {
        match self {
            Error::Infeasible { step, .. } => Error::Infeasible {
                item: item_id.to_string(),
                step,
            },
            other => other,
        }
    }
}
