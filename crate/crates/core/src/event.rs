//! Events, event sequences, delimited-text ingestion and segmentation.
//!
//! An [`EventSequence`] is the lossless representation of a temporal
//! network: a time-ordered list of directed `(sender, receiver, timestamp)`
//! triples. Node identifiers are opaque strings interned to dense indices in
//! order of first appearance within the sequence, so every sequence (and
//! every segment cut from one) numbers its own nodes `0..N`.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of an interned node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub sender: NodeId,
    pub receiver: NodeId,
    pub timestamp: i64,
}

impl Event {
    pub fn new(sender: NodeId, receiver: NodeId, timestamp: i64) -> Self {
        Self {
            sender,
            receiver,
            timestamp,
        }
    }

    /// Directed edge `(sender, receiver)`.
    #[inline]
    pub fn edge(&self) -> (NodeId, NodeId) {
        (self.sender, self.receiver)
    }
}

/// Assigns dense ids to node names in first-appearance order.
#[derive(Debug, Clone, Default)]
pub struct Interner {
    ids: HashMap<String, NodeId>,
    names: Vec<String>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = NodeId(self.names.len() as u32);
        self.ids.insert(name.to_owned(), id);
        self.names.push(name.to_owned());
        id
    }

    pub fn get(&self, name: &str) -> Option<NodeId> {
        self.ids.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn into_names(self) -> Vec<String> {
        self.names
    }
}

/// A validated, time-ordered list of events together with its node table.
///
/// Invariants: timestamps are non-decreasing, no event is a self-loop, and
/// the node table holds exactly the nodes that occur in `events`, indexed in
/// first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSequence {
    events: Vec<Event>,
    names: Vec<String>,
}

impl EventSequence {
    /// Builds a sequence from named triples, interning nodes as they appear.
    pub fn from_triples<I, S>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, i64)>,
        S: AsRef<str>,
    {
        let mut interner = Interner::new();
        let events: Vec<Event> = triples
            .into_iter()
            .map(|(s, r, t)| {
                let s = interner.intern(s.as_ref());
                let r = interner.intern(r.as_ref());
                Event::new(s, r, t)
            })
            .collect();
        let report = validate(&events);
        if let Some(v) = report.violations.first() {
            return Err(match *v {
                Violation::SelfLoop { index, .. } => Error::SelfLoops {
                    count: report.self_loops(),
                    first_line: index as u64 + 1,
                },
                Violation::Ordering {
                    index,
                    timestamp,
                    previous,
                } => Error::Unordered {
                    line: index as u64 + 1,
                    timestamp,
                    previous,
                },
            });
        }
        Ok(Self {
            events,
            names: interner.into_names(),
        })
    }

    /// Builds a sequence over dense node indices `0..n`, named by their
    /// decimal index. Nodes are re-interned in first-appearance order.
    pub fn from_indices<I>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, i64)>,
    {
        Self::from_triples(
            triples
                .into_iter()
                .map(|(s, r, t)| (s.to_string(), r.to_string(), t)),
        )
    }

    pub(crate) fn from_parts_unchecked(events: Vec<Event>, names: Vec<String>) -> Self {
        debug_assert!(validate(&events).is_empty());
        Self { events, names }
    }

    pub fn empty() -> Self {
        Self {
            events: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Number of events, M.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Number of distinct nodes, N = |V|.
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.index()]
    }

    pub fn timestamps(&self) -> impl ExactSizeIterator<Item = i64> + '_ {
        self.events.iter().map(|e| e.timestamp)
    }

    /// Events as `(sender, receiver, timestamp)` name triples.
    pub fn triples(&self) -> impl Iterator<Item = (&str, &str, i64)> + '_ {
        self.events
            .iter()
            .map(|e| (self.name(e.sender), self.name(e.receiver), e.timestamp))
    }

    /// Writes `sender,receiver,timestamp` lines (no header, LF endings).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        for (s, r, t) in self.triples() {
            w.write_record([s, r, &t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Column reference: 0-based position or header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_owned()),
        })
    }
}

/// Delimited-text layout of an event file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Format {
    pub delimiter: u8,
    pub has_header: bool,
    pub sender: ColumnRef,
    pub receiver: ColumnRef,
    pub timestamp: ColumnRef,
    /// Stable-sort rows by timestamp instead of rejecting unordered input.
    pub sort_if_unordered: bool,
    /// Emit every row as two events, `a -> b` then `b -> a`.
    pub both_directions: bool,
}

impl Default for Format {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: false,
            sender: ColumnRef::Index(0),
            receiver: ColumnRef::Index(1),
            timestamp: ColumnRef::Index(2),
            sort_if_unordered: false,
            both_directions: false,
        }
    }
}

/// One data row as read from the file, before any validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRow {
    pub line: u64,
    pub sender: String,
    pub receiver: String,
    pub timestamp: i64,
}

fn resolve_column(col: &ColumnRef, header: Option<&csv::StringRecord>) -> Result<usize> {
    match col {
        ColumnRef::Index(i) => Ok(*i),
        ColumnRef::Name(name) => header
            .and_then(|h| h.iter().position(|c| c.trim() == name))
            .ok_or_else(|| Error::UnknownColumn(name.clone())),
    }
}

/// Reads rows without checking ordering or self-loops.
///
/// Blank lines are skipped. With `both_directions` each row is followed by
/// its reversed copy carrying the same line number.
pub fn read_rows<R: Read>(source: R, format: &Format) -> Result<Vec<RawRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(format.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = if format.has_header {
        Some(reader.headers()?.clone())
    } else {
        None
    };
    let cols = [
        resolve_column(&format.sender, header.as_ref())?,
        resolve_column(&format.receiver, header.as_ref())?,
        resolve_column(&format.timestamp, header.as_ref())?,
    ];

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::MalformedRow {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |i: usize, what: &str| -> Result<&str> {
            match record.get(i) {
                Some(f) if !f.is_empty() => Ok(f),
                _ => Err(Error::MalformedRow {
                    line,
                    message: format!("missing {what} column {i}"),
                }),
            }
        };
        let sender = field(cols[0], "sender")?;
        let receiver = field(cols[1], "receiver")?;
        let ts_text = field(cols[2], "timestamp")?;
        let timestamp: i64 = ts_text.parse().map_err(|_| Error::MalformedRow {
            line,
            message: format!("timestamp `{ts_text}` is not an integer"),
        })?;
        rows.push(RawRow {
            line,
            sender: sender.to_owned(),
            receiver: receiver.to_owned(),
            timestamp,
        });
        if format.both_directions {
            rows.push(RawRow {
                line,
                sender: receiver.to_owned(),
                receiver: sender.to_owned(),
                timestamp,
            });
        }
    }
    Ok(rows)
}

/// Interns rows in the given order without validation.
pub fn intern_rows(rows: &[RawRow]) -> (Vec<Event>, Vec<String>) {
    let mut interner = Interner::new();
    let events = rows
        .iter()
        .map(|r| {
            let s = interner.intern(&r.sender);
            let t = interner.intern(&r.receiver);
            Event::new(s, t, r.timestamp)
        })
        .collect();
    (events, interner.into_names())
}

/// Parses delimited text into a validated [`EventSequence`].
///
/// Self-loop rows are rejected (all of them are counted). Unordered input is
/// rejected unless `format.sort_if_unordered` is set, in which case rows are
/// stable-sorted by timestamp so equal timestamps keep file order.
pub fn parse_events<R: Read>(source: R, format: &Format) -> Result<EventSequence> {
    let mut rows = read_rows(source, format)?;

    let mut loops = rows.iter().filter(|r| r.sender == r.receiver);
    if let Some(first) = loops.next() {
        return Err(Error::SelfLoops {
            count: 1 + loops.count(),
            first_line: first.line,
        });
    }

    if let Some(w) = rows.windows(2).find(|w| w[1].timestamp < w[0].timestamp) {
        if format.sort_if_unordered {
            rows.sort_by_key(|r| r.timestamp);
        } else {
            return Err(Error::Unordered {
                line: w[1].line,
                timestamp: w[1].timestamp,
                previous: w[0].timestamp,
            });
        }
    }

    let (events, names) = intern_rows(&rows);
    Ok(EventSequence::from_parts_unchecked(events, names))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    SelfLoop {
        index: usize,
        node: NodeId,
    },
    Ordering {
        index: usize,
        timestamp: i64,
        previous: i64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { index, node } => {
                write!(f, "event {index}: self-loop on node {node}")
            }
            Violation::Ordering {
                index,
                timestamp,
                previous,
            } => write!(
                f,
                "event {index}: timestamp {timestamp} precedes previous timestamp {previous}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn self_loops(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| matches!(v, Violation::SelfLoop { .. }))
            .count()
    }

    pub fn ordering(&self) -> usize {
        self.violations.len() - self.self_loops()
    }
}

/// Lists self-loop and ordering violations, in event order (0-based indices).
pub fn validate(events: &[Event]) -> ValidationReport {
    let mut violations = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        if ev.sender == ev.receiver {
            violations.push(Violation::SelfLoop {
                index: i,
                node: ev.sender,
            });
        }
        if i > 0 && ev.timestamp < events[i - 1].timestamp {
            violations.push(Violation::Ordering {
                index: i,
                timestamp: ev.timestamp,
                previous: events[i - 1].timestamp,
            });
        }
    }
    ValidationReport { violations }
}

/// Half-open time intervals `[b_i, b_{i+1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpec {
    boundaries: Vec<i64>,
}

impl SegmentSpec {
    pub fn new(boundaries: Vec<i64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::EmptySegmentSpec);
        }
        if let Some(i) = boundaries.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::UnsortedBoundaries(i + 1));
        }
        Ok(Self { boundaries })
    }

    pub fn boundaries(&self) -> &[i64] {
        &self.boundaries
    }

    pub fn intervals(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.boundaries.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Splits `seq` into one sequence per interval. Events outside every
/// interval are dropped; each segment gets its own node table.
pub fn segment(seq: &EventSequence, spec: &SegmentSpec) -> Vec<EventSequence> {
    spec.intervals()
        .map(|(lo, hi)| {
            let events = seq.events();
            let start = events.partition_point(|e| e.timestamp < lo);
            let end = events.partition_point(|e| e.timestamp < hi);
            let mut interner = Interner::new();
            let part = events[start..end]
                .iter()
                .map(|e| {
                    let s = interner.intern(seq.name(e.sender));
                    let r = interner.intern(seq.name(e.receiver));
                    Event::new(s, r, e.timestamp)
                })
                .collect();
            EventSequence::from_parts_unchecked(part, interner.into_names())
        })
        .collect()
}
