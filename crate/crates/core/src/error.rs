use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown behavior `{0}`")]
    UnknownBehavior(String),

    #[error("dimension mismatch: {agents} agents but ideal matrix is {matrix}x{matrix}")]
    DimensionMismatch { agents: usize, matrix: usize },

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid agent: {0}")]
    InvalidAgent(String),

    #[error("duplicate agent id `{0}`")]
    DuplicateAgent(String),

    #[error("no agent with id `{0}`")]
    MissingAgent(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed article: {0}")]
    MalformedArticle(String),

    #[error("feed error: {0}")]
    Feed(String),

    #[error("source error: {0}")]
    Source(String),

    #[error("output channel closed: {0}")]
    OutputClosed(#[source] std::io::Error),

    #[error("scraper control channel closed")]
    ControlClosed,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
