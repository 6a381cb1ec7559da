use std::path::PathBuf;

use thiserror::Error;

use crate::plant::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid plant config: {}", format_violations(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("no path from `{from}` to `{to}`")]
    Unreachable { from: String, to: String },

    #[error("speed must be positive, got {0}")]
    NonPositiveSpeed(f64),

    #[error("cannot schedule an event at t={at} before the clock t={clock}")]
    TimeTravel { at: f64, clock: f64 },

    #[error("action index {index} out of range (action count {count})")]
    ActionOutOfRange { index: usize, count: usize },

    #[error("no decision is pending")]
    NoPendingDecision,

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("cost matrix is empty")]
    EmptyMatrix,

    #[error("cost matrix is not rectangular or contains non-finite values")]
    MalformedMatrix,

    #[error("checkpoint does not fit: {0}")]
    CheckpointMismatch(String),

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error("checkpoint version {found} is not supported (expected {expected})")]
    CheckpointVersion { found: u32, expected: u32 },

    #[error("no deadlock-free source clock up to {hi} s")]
    NoSafeClock { hi: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("scenario `{0}` has no score parameters")]
    MissingScoreParams(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
