use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Stream(#[from] io::Error),

    // lexicon loading
    #[error("malformed lexicon row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("lexicon score {score} for {word:?} at line {line} outside [1, 9]")]
    ScoreOutOfRange { line: usize, word: String, score: f64 },
    #[error("duplicate lexicon word {word:?} at line {line}")]
    DuplicateWord { line: usize, word: String },

    // post ingestion
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("record at line {line} is missing required field {field:?}")]
    MissingField { line: usize, field: &'static str },

    #[error("no word survives the lexicon and lens")]
    NoCoverage,

    // classifiers
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),
    #[error("model file: {0}")]
    ModelFormat(String),

    // feed simulator
    #[error("sampling proportion undefined: nothing collected and nothing withheld")]
    Undefined,
    #[error("failed to bind {addr}: {source}")]
    BindFailure {
        addr: String,
        #[source]
        source: io::Error,
    },
    #[error("failed to connect to {addr}: {source}")]
    ConnectFailure {
        addr: String,
        #[source]
        source: io::Error,
    },
    #[error("protocol error: {0}")]
    ProtocolError(String),

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
