use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no open transaction")]
    NoOpenTransaction,

    #[error("empty tx id")]
    EmptyTxId,

    #[error("transaction already open")]
    TransactionAlreadyOpen,

    #[error("invalid mutator id {0}")]
    InvalidMutatorId(u32),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown target {name:?} (valid targets: {valid})")]
    UnknownTarget { name: String, valid: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
