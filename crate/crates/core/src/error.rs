use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol:?} is not in the alphabet {alphabet:?}")]
    UnknownSymbol { symbol: String, alphabet: String },

    #[error("symbol index {0} is out of range for this alphabet")]
    SymbolIndex(usize),

    #[error("unknown language id {0:?}")]
    UnknownLanguage(String),

    #[error("prefix {prefix:?} is dead: no continuation is in {language}")]
    DeadPrefix { language: String, prefix: String },

    #[error("word {word:?} is not a member of {language}")]
    NotAMember { language: String, word: String },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("window [{lo}, {hi}] of {language} is too dense to enumerate ({reason}); use sampling instead")]
    TooDense {
        language: String,
        lo: usize,
        hi: usize,
        reason: String,
    },

    #[error("bin {bin} of {language} needs {wanted} distinct strings but only {achievable} could be produced")]
    InsufficientStrings {
        language: String,
        bin: usize,
        wanted: usize,
        achievable: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("sequence of length {len} exceeds the positional table size {max_len}")]
    SequenceTooLong { len: usize, max_len: usize },

    #[error("attention logits of a row differ; exact arithmetic cannot represent the softmax")]
    InexactAttention,

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
