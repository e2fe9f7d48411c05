use thiserror::Error;

pub type Result<T, E = CostError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("content count must be at least 1")]
    EmptyCatalog,

    #[error("rank {rank} outside 1..={content_count}")]
    RankOutOfRange { rank: usize, content_count: usize },

    #[error("invalid cost parameter: {0}")]
    InvalidParams(String),

    #[error("event at step {time} is beyond the horizon of {horizon} steps")]
    EventBeyondHorizon { time: u64, horizon: u64 },

    #[error("schedule line {line}: {message}")]
    Schedule { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
