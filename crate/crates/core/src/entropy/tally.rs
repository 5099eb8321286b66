use std::collections::HashMap;
use std::hash::Hash;

/// `c * ln(c)`, with `0 * ln(0) = 0`.
#[inline]
pub(crate) fn xlnx(c: u64) -> f64 {
    if c <= 1 {
        0.0
    } else {
        let c = c as f64;
        c * c.ln()
    }
}

/// Shannon entropy from a total and its `Σ c·ln c` accumulator:
/// `-Σ (c/T) ln(c/T) = ln T - (Σ c ln c) / T`.
///
/// The result is clamped to `[0, ln(distinct)]`, the range the exact value
/// always lies in; rounding would otherwise leak a few ulps past either end.
#[inline]
pub(crate) fn entropy_from(total: u64, acc: f64, distinct: usize) -> f64 {
    if total == 0 || distinct <= 1 {
        return 0.0;
    }
    let t = total as f64;
    let h = t.ln() - acc / t;
    h.clamp(0.0, (distinct as f64).ln())
}

/// Frequency table over dense node indices.
#[derive(Debug, Clone, Default)]
pub(crate) struct DenseTally {
    counts: Vec<u64>,
    total: u64,
    acc: f64,
    distinct: usize,
}

impl DenseTally {
    /// Returns true when `key` was not seen before.
    #[inline]
    pub fn increment(&mut self, key: usize) -> bool {
        if key >= self.counts.len() {
            self.counts.resize(key + 1, 0);
        }
        let c = self.counts[key];
        self.counts[key] = c + 1;
        self.acc += xlnx(c + 1) - xlnx(c);
        self.total += 1;
        if c == 0 {
            self.distinct += 1;
        }
        c == 0
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn acc(&self) -> f64 {
        self.acc
    }

    pub fn distinct(&self) -> usize {
        self.distinct
    }

    pub fn entropy(&self) -> f64 {
        entropy_from(self.total, self.acc, self.distinct)
    }

    pub fn get(&self, key: usize) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Non-zero entries only.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k, c))
    }
}

/// Frequency table over hashable keys. Zero counts are never stored.
#[derive(Debug, Clone)]
pub(crate) struct SparseTally<K> {
    counts: HashMap<K, u64>,
    total: u64,
    acc: f64,
}

impl<K> Default for SparseTally<K> {
    fn default() -> Self {
        Self {
            counts: HashMap::new(),
            total: 0,
            acc: 0.0,
        }
    }
}

impl<K: Hash + Eq> SparseTally<K> {
    #[inline]
    pub fn increment(&mut self, key: K) {
        let c = self.counts.entry(key).or_insert(0);
        let prev = *c;
        *c += 1;
        self.acc += xlnx(prev + 1) - xlnx(prev);
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn acc(&self) -> f64 {
        self.acc
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn entropy(&self) -> f64 {
        entropy_from(self.total, self.acc, self.counts.len())
    }

    pub fn get(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u64)> + '_ {
        self.counts.iter().map(|(k, &c)| (k, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulator_step_from_one_to_two() {
        let mut t = DenseTally::default();
        t.increment(0);
        t.increment(1);
        assert_eq!(t.acc(), 0.0);
        t.increment(0);
        assert!((t.acc() - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((t.acc() - 1.386294).abs() < 1e-6);
        assert_eq!(t.total(), 3);
        assert_eq!(t.distinct(), 2);
    }

    #[test]
    fn sparse_matches_dense() {
        let keys = [3usize, 1, 3, 3, 0, 1, 7];
        let mut d = DenseTally::default();
        let mut s = SparseTally::default();
        for &k in &keys {
            d.increment(k);
            s.increment(k);
        }
        assert_eq!(d.acc(), s.acc());
        assert_eq!(d.distinct(), s.distinct());
        assert_eq!(d.entropy(), s.entropy());
        assert_eq!(d.iter().count(), 4);
    }

    #[test]
    fn entropy_never_negative_or_above_log_distinct() {
        let mut t = SparseTally::default();
        for _ in 0..1000 {
            t.increment(42u32);
        }
        assert_eq!(t.entropy(), 0.0);
        let mut u = SparseTally::default();
        for k in 0..7u32 {
            for _ in 0..13 {
                u.increment(k);
            }
        }
        assert!(u.entropy() <= 7f64.ln());
        assert!((u.entropy() - 7f64.ln()).abs() < 1e-12);
    }
}
