//! Randomized baselines that keep the real timestamps and node set but
//! redraw the sender and receiver of every event.
//!
//! Replica `r` of an ensemble is seeded with `master_seed + r` and streamed
//! straight into a [`CountState`]; no replica sequence is materialized.
//! Per-checkpoint mean and sample deviation are folded in replica-index
//! order, so the result does not depend on how replicas were scheduled.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoints;
use crate::entropy::{CountState, EntropySnapshot, Measure, Role};
use crate::error::{Error, Result};
use crate::event::{Event, EventSequence, Interner, NodeId};

const MEASURES: usize = Measure::ALL.len();

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorKind {
    #[default]
    Uniform,
    Normal,
    Exponential,
}

impl FromStr for SelectorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(SelectorKind::Uniform),
            "normal" => Ok(SelectorKind::Normal),
            "exponential" => Ok(SelectorKind::Exponential),
            other => Err(format!("unknown selector `{other}`")),
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectorKind::Uniform => "uniform",
            SelectorKind::Normal => "normal",
            SelectorKind::Exponential => "exponential",
        })
    }
}

#[derive(Debug, Clone)]
enum Law {
    Uniform,
    Normal(Normal<f64>),
    Exponential(Exp<f64>),
}

/// Seeded sampler of node indices in `0..n`.
///
/// Normal draws use mean `(n-1)/2` and deviation `n/6`; exponential draws
/// use rate `4/n`. Continuous draws are rounded to the nearest index and
/// redrawn when they fall outside `[0, n-1]`.
#[derive(Debug, Clone)]
pub struct NodeSelector {
    kind: SelectorKind,
    n: usize,
    law: Law,
    rng: ChaCha8Rng,
}

impl NodeSelector {
    pub fn new(kind: SelectorKind, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewNodes(0));
        }
        let nf = n as f64;
        let law = match kind {
            SelectorKind::Uniform => Law::Uniform,
            SelectorKind::Normal => {
                Law::Normal(Normal::new((nf - 1.0) / 2.0, nf / 6.0).expect("deviation is positive"))
            }
            SelectorKind::Exponential => {
                Law::Exponential(Exp::new(4.0 / nf).expect("rate is positive"))
            }
        };
        Ok(Self {
            kind,
            n,
            law,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn kind(&self) -> SelectorKind {
        self.kind
    }

    #[inline]
    pub fn sample(&mut self) -> u32 {
        let upper = (self.n - 1) as f64;
        match &self.law {
            Law::Uniform => self.rng.random_range(0..self.n as u32),
            Law::Normal(d) => loop {
                let x = d.sample(&mut self.rng).round();
                if (0.0..=upper).contains(&x) {
                    break x as u32;
                }
            },
            Law::Exponential(d) => loop {
                let x = d.sample(&mut self.rng).round();
                if x <= upper {
                    break x as u32;
                }
            },
        }
    }

    /// One `(sender, receiver)` pair; the receiver is redrawn until it
    /// differs from the sender. Needs `n >= 2`.
    #[inline]
    pub fn sample_pair(&mut self) -> (NodeId, NodeId) {
        let s = self.sample();
        let mut r = self.sample();
        while r == s {
            r = self.sample();
        }
        (NodeId(s), NodeId(r))
    }
}

/// Lazily generated replica events, in the real sequence's node-id space.
pub struct ReplicaEvents<'a> {
    timestamps: std::slice::Iter<'a, Event>,
    selector: NodeSelector,
}

impl Iterator for ReplicaEvents<'_> {
    type Item = Event;

    fn next(&mut self) -> Option<Event> {
        let t = self.timestamps.next()?.timestamp;
        let (s, r) = self.selector.sample_pair();
        Some(Event::new(s, r, t))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.timestamps.size_hint()
    }
}

impl ExactSizeIterator for ReplicaEvents<'_> {}

pub fn replica_events(
    real: &EventSequence,
    kind: SelectorKind,
    seed: u64,
) -> Result<ReplicaEvents<'_>> {
    let n = real.node_count();
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    Ok(ReplicaEvents {
        timestamps: real.events().iter(),
        selector: NodeSelector::new(kind, n, seed)?,
    })
}

/// A randomized copy of `real`: same length, same timestamps in the same
/// order, endpoints drawn from `real`'s node set, no self-loops.
pub fn generate_random_sequence(
    real: &EventSequence,
    kind: SelectorKind,
    seed: u64,
) -> Result<EventSequence> {
    let mut interner = Interner::new();
    let events = replica_events(real, kind, seed)?
        .map(|e| {
            let s = interner.intern(real.name(e.sender));
            let r = interner.intern(real.name(e.receiver));
            Event::new(s, r, e.timestamp)
        })
        .collect();
    Ok(EventSequence::from_parts_unchecked(
        events,
        interner.into_names(),
    ))
}

/// Entropy snapshots of one streamed replica at the given checkpoints.
pub fn replica_series(
    real: &EventSequence,
    kind: SelectorKind,
    seed: u64,
    role: Role,
    checkpoints: &Checkpoints,
) -> Result<Vec<EntropySnapshot>> {
    let points = checkpoints.resolve(real.len())?;
    let mut out = Vec::with_capacity(points.len());
    stream_replica(real, kind, seed, role, &points, |s| out.push(s))?;
    Ok(out)
}

fn stream_replica(
    real: &EventSequence,
    kind: SelectorKind,
    seed: u64,
    role: Role,
    points: &[usize],
    mut emit: impl FnMut(EntropySnapshot),
) -> Result<()> {
    let mut state = CountState::new();
    let mut next = points.iter().peekable();
    for (i, ev) in replica_events(real, kind, seed)?.enumerate() {
        state.ingest(&ev)?;
        if next.peek() == Some(&&(i + 1)) {
            next.next();
            emit(state.snapshot(role, i + 1, ev.timestamp));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub replicas: usize,
    pub selector: SelectorKind,
    pub role: Role,
    pub checkpoints: Checkpoints,
    pub master_seed: u64,
}

impl EnsembleConfig {
    pub fn seed_for(&self, replica: usize) -> u64 {
        self.master_seed.wrapping_add(replica as u64)
    }
}

/// Ensemble summary at one checkpoint. Arrays are indexed by
/// [`Measure::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub event_index: usize,
    pub timestamp: i64,
    pub mean: [f64; MEASURES],
    /// Sample deviation (divides by K-1).
    pub sd: [f64; MEASURES],
    pub min: [f64; MEASURES],
    pub max: [f64; MEASURES],
}

impl CheckpointStats {
    pub fn mean(&self, m: Measure) -> f64 {
        self.mean[m.index()]
    }

    pub fn sd(&self, m: Measure) -> f64 {
        self.sd[m.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub replicas: usize,
    pub master_seed: u64,
    pub rows: Vec<CheckpointStats>,
}

/// Order-insensitive reducer of replica series.
///
/// Replicas may arrive in any order; they are folded strictly by index
/// (out-of-order arrivals wait in a buffer), so the floating-point result is
/// the same for every arrival order.
#[derive(Debug, Clone)]
pub struct EnsembleAccumulator {
    points: Vec<(usize, i64)>,
    next: usize,
    pending: BTreeMap<usize, Vec<[f64; MEASURES]>>,
    mean: Vec<[f64; MEASURES]>,
    m2: Vec<[f64; MEASURES]>,
    min: Vec<[f64; MEASURES]>,
    max: Vec<[f64; MEASURES]>,
}

impl EnsembleAccumulator {
    /// `points` are `(event_index, timestamp)` pairs shared by all replicas.
    pub fn new(points: Vec<(usize, i64)>) -> Self {
        let c = points.len();
        Self {
            points,
            next: 0,
            pending: BTreeMap::new(),
            mean: vec![[0.0; MEASURES]; c],
            m2: vec![[0.0; MEASURES]; c],
            min: vec![[f64::INFINITY; MEASURES]; c],
            max: vec![[f64::NEG_INFINITY; MEASURES]; c],
        }
    }

    pub fn push(&mut self, replica: usize, series: Vec<[f64; MEASURES]>) -> Result<()> {
        if series.len() != self.points.len() {
            return Err(Error::CheckpointMismatch(format!(
                "replica {replica} has {} checkpoints, expected {}",
                series.len(),
                self.points.len()
            )));
        }
        if replica < self.next || self.pending.contains_key(&replica) {
            return Err(Error::CheckpointMismatch(format!(
                "replica {replica} pushed twice"
            )));
        }
        self.pending.insert(replica, series);
        while let Some(series) = self.pending.remove(&self.next) {
            self.fold(&series);
            self.next += 1;
        }
        Ok(())
    }

    fn fold(&mut self, series: &[[f64; MEASURES]]) {
        let k = (self.next + 1) as f64;
        for (c, values) in series.iter().enumerate() {
            for (m, &x) in values.iter().enumerate() {
                let delta = x - self.mean[c][m];
                self.mean[c][m] += delta / k;
                self.m2[c][m] += delta * (x - self.mean[c][m]);
                self.min[c][m] = self.min[c][m].min(x);
                self.max[c][m] = self.max[c][m].max(x);
            }
        }
    }

    /// Replicas folded so far (a contiguous prefix `0..folded`).
    pub fn folded(&self) -> usize {
        self.next
    }

    pub fn finish(self, master_seed: u64) -> Result<EnsembleStats> {
        if let Some((&missing, _)) = self.pending.iter().next() {
            return Err(Error::CheckpointMismatch(format!(
                "replica {} missing before replica {missing}",
                self.next
            )));
        }
        let k = self.next;
        if k < 2 {
            return Err(Error::TooFewReplicas(k));
        }
        let denom = (k - 1) as f64;
        let rows = self
            .points
            .iter()
            .enumerate()
            .map(|(c, &(event_index, timestamp))| {
                let mut mean = self.mean[c];
                let mut sd = self.m2[c].map(|m2| (m2.max(0.0) / denom).sqrt());
                for m in 0..MEASURES {
                    // all replicas agreed exactly
                    if self.min[c][m] == self.max[c][m] {
                        mean[m] = self.min[c][m];
                        sd[m] = 0.0;
                    }
                    mean[m] = mean[m].clamp(self.min[c][m], self.max[c][m]);
                }
                CheckpointStats {
                    event_index,
                    timestamp,
                    mean,
                    sd,
                    min: self.min[c],
                    max: self.max[c],
                }
            })
            .collect();
        Ok(EnsembleStats {
            replicas: k,
            master_seed,
            rows,
        })
    }
}

/// Runs `config.replicas` randomized replicas of `real` and summarizes them
/// per checkpoint. Replicas run in parallel on the current rayon pool.
pub fn run_ensemble(real: &EventSequence, config: &EnsembleConfig) -> Result<EnsembleStats> {
    if config.replicas < 2 {
        return Err(Error::TooFewReplicas(config.replicas));
    }
    let n = real.node_count();
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let points = config.checkpoints.resolve(real.len())?;
    let events = real.events();
    let stamped = points
        .iter()
        .map(|&p| (p, events[p - 1].timestamp))
        .collect();
    let mut acc = EnsembleAccumulator::new(stamped);

    let batch = rayon::current_num_threads().max(1);
    let indices: Vec<usize> = (0..config.replicas).collect();
    for chunk in indices.chunks(batch) {
        let results: Vec<Result<Vec<[f64; MEASURES]>>> = chunk
            .par_iter()
            .map(|&r| {
                let mut series = Vec::with_capacity(points.len());
                stream_replica(
                    real,
                    config.selector,
                    config.seed_for(r),
                    config.role,
                    &points,
                    |s| series.push(s.values()),
                )?;
                Ok(series)
            })
            .collect();
        for (&r, series) in chunk.iter().zip(results) {
            acc.push(r, series?)?;
        }
    }
    acc.finish(config.master_seed)
}
