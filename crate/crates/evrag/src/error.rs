use std::path::PathBuf;

use evrag_core::eval::EvalError;
use evrag_core::{CorpusError, LoopError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Corpus {
        path: PathBuf,
        #[source]
        source: CorpusError,
    },
    #[error("{}: {source}", path.display())]
    Dataset {
        path: PathBuf,
        #[source]
        source: EvalError,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("writing table: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl ToString) -> Self {
        Self::Parse {
            path: path.into(),
            line,
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
