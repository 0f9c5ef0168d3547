use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown environment `{0}`")]
    UnknownEnv(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("action {action} out of range for {n_actions} actions")]
    ActionOutOfRange { action: usize, n_actions: usize },
    #[error("episode already finished; call reset first")]
    EpisodeFinished,
    #[error("operation requires a tabular environment, got `{0}`")]
    NotTabular(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("distribution is not normalized (mass {0})")]
    Unnormalized(f64),
    #[error("singular linear system")]
    Singular,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("training diverged at episode {episode}: {what}")]
    Diverged { episode: usize, what: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
