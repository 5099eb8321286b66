//! Streaming node, edge and succession entropy over a growing event prefix.
//!
//! Every counter family keeps its total `T` and the accumulator
//! `A = Σ c·ln c` over its entries, so the Shannon entropy of the family is
//! `ln T - A/T` and an event costs O(1) amortized to ingest. Maxima use the
//! number of distinct nodes `N` seen so far in any role:
//!
//! ```text
//! S1max = ln N      S2max = ln N(N-1)      S3max = 2 ln N(N-1)
//! ```

mod batch;
mod tally;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoints;
use crate::error::{Error, Result};
use crate::event::{Event, EventSequence, NodeId};

pub use batch::batch_entropy;
use tally::{DenseTally, SparseTally};

type Edge = (NodeId, NodeId);

/// Which node occurrences feed the first-order entropy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Sender,
    Receiver,
    Either,
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sender" => Ok(Role::Sender),
            "receiver" => Ok(Role::Receiver),
            "either" => Ok(Role::Either),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Sender => "sender",
            Role::Receiver => "receiver",
            Role::Either => "either",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    First = 1,
    Second = 2,
    Third = 3,
}

impl Order {
    pub const ALL: [Order; 3] = [Order::First, Order::Second, Order::Third];

    #[inline]
    pub fn index(self) -> usize {
        self as usize - 1
    }
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            3 => Ok(Order::Third),
            other => Err(Error::InvalidOrder(other)),
        }
    }
}

/// The six per-checkpoint series compared against randomized baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    S1,
    S2,
    S3,
    S1Norm,
    S2Norm,
    S3Norm,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::S1,
        Measure::S2,
        Measure::S3,
        Measure::S1Norm,
        Measure::S2Norm,
        Measure::S3Norm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::S1 => "s1",
            Measure::S2 => "s2",
            Measure::S3 => "s3",
            Measure::S1Norm => "s1_norm",
            Measure::S2Norm => "s2_norm",
            Measure::S3Norm => "s3_norm",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn order(self) -> Order {
        match self {
            Measure::S1 | Measure::S1Norm => Order::First,
            Measure::S2 | Measure::S2Norm => Order::Second,
            Measure::S3 | Measure::S3Norm => Order::Third,
        }
    }

    pub fn is_normalized(self) -> bool {
        matches!(self, Measure::S1Norm | Measure::S2Norm | Measure::S3Norm)
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown measure `{s}`"))
    }
}

/// A maximum-entropy value; `degenerate` when no valid outcome space exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxEntropy {
    pub value: f64,
    pub degenerate: bool,
}

/// Largest attainable entropy of `order` over `n` distinct nodes.
pub fn max_entropy(order: Order, n: usize) -> MaxEntropy {
    let value = match order {
        Order::First if n > 1 => (n as f64).ln(),
        Order::Second if n > 1 => pair_space_ln(n),
        Order::Third if n > 1 => 2.0 * pair_space_ln(n),
        _ => 0.0,
    };
    MaxEntropy {
        value,
        degenerate: value == 0.0,
    }
}

/// `ln(N(N-1))`, the log-size of the directed edge space.
fn pair_space_ln(n: usize) -> f64 {
    let n = n as u128;
    ((n * (n - 1)) as f64).ln()
}

/// Running frequency tables over a prefix of an event sequence.
#[derive(Debug, Clone, Default)]
pub struct CountState {
    senders: DenseTally,
    receivers: DenseTally,
    either: DenseTally,
    edges: SparseTally<Edge>,
    successions: SparseTally<(Edge, Edge)>,
    last_edge: Option<Edge>,
}

/// Counter families held by a [`CountState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Senders,
    Receivers,
    Either,
    Edges,
    Successions,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Senders,
        Family::Receivers,
        Family::Either,
        Family::Edges,
        Family::Successions,
    ];
}

impl CountState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ingest(&mut self, ev: &Event) -> Result<()> {
        if ev.sender == ev.receiver {
            return Err(Error::SelfLoopEvent(ev.sender.0));
        }
        self.senders.increment(ev.sender.index());
        self.receivers.increment(ev.receiver.index());
        self.either.increment(ev.sender.index());
        self.either.increment(ev.receiver.index());
        let edge = ev.edge();
        self.edges.increment(edge);
        if let Some(prev) = self.last_edge {
            self.successions.increment((prev, edge));
        }
        self.last_edge = Some(edge);
        Ok(())
    }

    /// Forget the previous edge so the next event starts no succession.
    pub fn break_succession(&mut self) {
        self.last_edge = None;
    }

    /// Events ingested so far.
    pub fn events(&self) -> u64 {
        self.edges.total()
    }

    /// Distinct nodes seen in any role.
    pub fn distinct_nodes(&self) -> usize {
        self.either.distinct()
    }

    pub fn last_edge(&self) -> Option<(NodeId, NodeId)> {
        self.last_edge
    }

    pub fn node_count(&self, role: Role, node: NodeId) -> u64 {
        self.node_tally(role).get(node.index())
    }

    pub fn edge_count(&self, sender: NodeId, receiver: NodeId) -> u64 {
        self.edges.get(&(sender, receiver))
    }

    pub fn succession_count(&self, first: (NodeId, NodeId), second: (NodeId, NodeId)) -> u64 {
        self.successions.get(&(first, second))
    }

    pub fn total(&self, family: Family) -> u64 {
        match family {
            Family::Senders => self.senders.total(),
            Family::Receivers => self.receivers.total(),
            Family::Either => self.either.total(),
            Family::Edges => self.edges.total(),
            Family::Successions => self.successions.total(),
        }
    }

    pub fn distinct(&self, family: Family) -> usize {
        match family {
            Family::Senders => self.senders.distinct(),
            Family::Receivers => self.receivers.distinct(),
            Family::Either => self.either.distinct(),
            Family::Edges => self.edges.distinct(),
            Family::Successions => self.successions.distinct(),
        }
    }

    /// The maintained `Σ c·ln c` accumulator.
    pub fn accumulator(&self, family: Family) -> f64 {
        match family {
            Family::Senders => self.senders.acc(),
            Family::Receivers => self.receivers.acc(),
            Family::Either => self.either.acc(),
            Family::Edges => self.edges.acc(),
            Family::Successions => self.successions.acc(),
        }
    }

    /// Counts of one family, in unspecified order. Never yields zero.
    pub fn counts(&self, family: Family) -> Vec<u64> {
        match family {
            Family::Senders => self.senders.iter().map(|(_, c)| c).collect(),
            Family::Receivers => self.receivers.iter().map(|(_, c)| c).collect(),
            Family::Either => self.either.iter().map(|(_, c)| c).collect(),
            Family::Edges => self.edges.iter().map(|(_, c)| c).collect(),
            Family::Successions => self.successions.iter().map(|(_, c)| c).collect(),
        }
    }

    fn node_tally(&self, role: Role) -> &DenseTally {
        match role {
            Role::Sender => &self.senders,
            Role::Receiver => &self.receivers,
            Role::Either => &self.either,
        }
    }

    /// First-order (node) entropy for `role`.
    pub fn entropy_first(&self, role: Role) -> Result<f64> {
        if self.events() == 0 {
            return Err(Error::EmptyState);
        }
        Ok(self.node_tally(role).entropy())
    }

    /// Second-order (directed edge) entropy.
    pub fn entropy_second(&self) -> Result<f64> {
        if self.events() == 0 {
            return Err(Error::EmptyState);
        }
        Ok(self.edges.entropy())
    }

    /// Third-order (succession) entropy; 0 before the second event.
    pub fn entropy_third(&self) -> f64 {
        self.successions.entropy()
    }

    /// Entropy of `order`, 0 for an empty state.
    pub fn entropy(&self, order: Order, role: Role) -> f64 {
        match order {
            Order::First => self.node_tally(role).entropy(),
            Order::Second => self.edges.entropy(),
            Order::Third => self.successions.entropy(),
        }
    }

    pub fn max_entropy(&self, order: Order) -> MaxEntropy {
        max_entropy(order, self.distinct_nodes())
    }

    /// `S_o / S_o^M` with the maximum taken at the current N.
    pub fn normalized_entropy(&self, order: Order, role: Role) -> Normalized {
        let max = self.max_entropy(order);
        if max.degenerate {
            return Normalized {
                value: 0.0,
                degenerate: true,
            };
        }
        let s = self.entropy(order, role).min(max.value);
        Normalized {
            value: (s / max.value).clamp(0.0, 1.0),
            degenerate: false,
        }
    }

    pub fn snapshot(&self, role: Role, event_index: usize, timestamp: i64) -> EntropySnapshot {
        let mut snap = EntropySnapshot {
            event_index,
            timestamp,
            nodes: self.distinct_nodes(),
            role,
            entropy: [0.0; 3],
            max_entropy: [0.0; 3],
            normalized: [0.0; 3],
            degenerate: [false; 3],
        };
        for order in Order::ALL {
            let i = order.index();
            let max = self.max_entropy(order);
            let s = self.entropy(order, role).min(max.value);
            snap.entropy[i] = s;
            snap.max_entropy[i] = max.value;
            snap.normalized[i] = if max.degenerate {
                0.0
            } else {
                (s / max.value).clamp(0.0, 1.0)
            };
            snap.degenerate[i] = max.degenerate;
        }
        if self.successions.total() == 0 {
            snap.degenerate[Order::Third.index()] = true;
        }
        snap
    }

    /// Full recomputation of `Σ c·ln c`, for consistency checks.
    pub fn recompute_accumulator(&self, family: Family) -> f64 {
        self.counts(family).into_iter().map(tally::xlnx).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub value: f64,
    pub degenerate: bool,
}

/// All entropy values at one checkpoint. Arrays are indexed by
/// [`Order::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySnapshot {
    /// 1-based prefix length.
    pub event_index: usize,
    pub timestamp: i64,
    pub nodes: usize,
    pub role: Role,
    pub entropy: [f64; 3],
    pub max_entropy: [f64; 3],
    pub normalized: [f64; 3],
    pub degenerate: [bool; 3],
}

impl EntropySnapshot {
    pub fn value(&self, measure: Measure) -> f64 {
        let i = measure.order().index();
        if measure.is_normalized() {
            self.normalized[i]
        } else {
            self.entropy[i]
        }
    }

    pub fn values(&self) -> [f64; 6] {
        Measure::ALL.map(|m| self.value(m))
    }
}

/// Streams `seq` through a fresh [`CountState`], snapshotting at each
/// checkpoint.
pub fn entropy_series(
    seq: &EventSequence,
    role: Role,
    checkpoints: &Checkpoints,
) -> Result<Vec<EntropySnapshot>> {
    let points = checkpoints.resolve(seq.len())?;
    let mut state = CountState::new();
    let mut out = Vec::with_capacity(points.len());
    let mut next = points.iter().peekable();
    for (i, ev) in seq.events().iter().enumerate() {
        state.ingest(ev)?;
        if next.peek() == Some(&&(i + 1)) {
            next.next();
            out.push(state.snapshot(role, i + 1, ev.timestamp));
        }
    }
    Ok(out)
}
