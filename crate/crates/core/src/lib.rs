//! Node, edge and succession entropy of temporal event sequences.
//!
//! * [`event`]: events, sequences, ingestion, validation and segmentation.
//! * [`entropy`]: O(1)-per-event streaming entropies, maxima and
//!   normalized values, plus a brute-force batch oracle.
//! * [`baseline`]: timestamp-preserving randomized replicas and K-replica
//!   ensemble statistics.
//! * [`stats`]: Z-scores against an ensemble and OLS trend fits.

pub mod baseline;
pub mod checkpoint;
pub mod entropy;
pub mod error;
pub mod event;
pub mod stats;

pub use baseline::{
    generate_random_sequence, replica_series, run_ensemble, CheckpointStats, EnsembleAccumulator,
    EnsembleConfig, EnsembleStats, NodeSelector, SelectorKind,
};
pub use checkpoint::Checkpoints;
pub use entropy::{
    batch_entropy, entropy_series, max_entropy, CountState, EntropySnapshot, Family, Measure,
    Order, Role,
};
pub use error::{Error, Result};
pub use event::{
    parse_events, segment, validate, ColumnRef, Event, EventSequence, Format, NodeId, SegmentSpec,
    ValidationReport, Violation,
};
pub use stats::{linear_trend, zscore, zscore_series, TrendAxis, TrendFit, ZScoreSeries};
