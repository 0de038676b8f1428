use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("state dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("window of {requested} states requested but only {available} are buffered")]
    WindowTooLarge { requested: usize, available: usize },

    #[error("{0} requires a non-empty input")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("goal is already satisfied by the current object position")]
    GoalImmediatelySatisfied,

    #[error("non-finite loss at epoch {epoch}, minibatch {minibatch}: {detail}")]
    NonFiniteLoss {
        epoch: usize,
        minibatch: usize,
        detail: String,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("metrics {path}: {reason}")]
    Metrics { path: PathBuf, reason: String },

    #[error("calibration: {0}")]
    Calibration(String),

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
