use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error(
        "{count} self-loop row(s) rejected (sender equals receiver), first at line {first_line}"
    )]
    SelfLoops { count: usize, first_line: u64 },

    #[error("line {line}: timestamp {timestamp} precedes previous timestamp {previous}; enable sorting to accept unordered input")]
    Unordered {
        line: u64,
        timestamp: i64,
        previous: i64,
    },

    #[error("column `{0}` not found in header")]
    UnknownColumn(String),

    #[error("self-loop event: node {0} cannot interact with itself")]
    SelfLoopEvent(u32),

    #[error("entropy is undefined for an empty state")]
    EmptyState,

    #[error("empty event sequence")]
    EmptySequence,

    #[error("invalid entropy order {0}; expected 1, 2 or 3")]
    InvalidOrder(u8),

    #[error("segment spec needs at least two boundaries")]
    EmptySegmentSpec,

    #[error("segment boundaries must be strictly increasing (index {0})")]
    UnsortedBoundaries(usize),

    #[error("randomized baseline needs at least 2 distinct nodes, found {0}")]
    TooFewNodes(usize),

    #[error("ensemble needs at least 2 replicas, got {0}")]
    TooFewReplicas(usize),

    #[error("invalid checkpoints: {0}")]
    InvalidCheckpoints(String),

    #[error("checkpoint mismatch: {0}")]
    CheckpointMismatch(String),

    #[error("trend fit needs at least 2 defined points, got {0}")]
    TooFewPoints(usize),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
