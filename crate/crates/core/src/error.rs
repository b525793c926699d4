use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed article: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("input of {len} tokens cannot fit into {max_len} positions: {reason}")]
    TooLong {
        len: usize,
        max_len: usize,
        reason: &'static str,
    },

    #[error("model archive: {0}")]
    Archive(String),

    #[error("config: {0}")]
    Config(String),

    #[error("malformed RRID {0:?}, expected AB_<digits>")]
    MalformedRrid(String),

    #[error("agreement undefined: expected agreement equals 1")]
    UndefinedKappa,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Sqlite(#[from] rusqlite::Error),
}
