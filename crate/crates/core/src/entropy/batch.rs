use std::collections::HashMap;
use std::hash::Hash;

use super::{Order, Role};
use crate::error::{Error, Result};
use crate::event::Event;

/// Entropy of a whole event list, built from full probability tables.
///
/// Shares no code with the streaming path: counts are rebuilt from scratch
/// and `-Σ p ln p` is summed directly. Used to cross-check [`super::CountState`].
pub fn batch_entropy(events: &[Event], order: Order, role: Role) -> Result<f64> {
    if events.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(match order {
        Order::First => match role {
            Role::Sender => shannon(events.iter().map(|e| e.sender)),
            Role::Receiver => shannon(events.iter().map(|e| e.receiver)),
            Role::Either => shannon(events.iter().flat_map(|e| [e.sender, e.receiver])),
        },
        Order::Second => shannon(events.iter().map(|e| (e.sender, e.receiver))),
        Order::Third => shannon(
            events
                .windows(2)
                .map(|w| ((w[0].sender, w[0].receiver), (w[1].sender, w[1].receiver))),
        ),
    })
}

fn shannon<K: Hash + Eq>(outcomes: impl Iterator<Item = K>) -> f64 {
    let mut table: HashMap<K, usize> = HashMap::new();
    let mut total = 0usize;
    for k in outcomes {
        *table.entry(k).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    table
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}
