use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prefix lengths (1-based event indices) at which values are emitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Checkpoints {
    /// Every `n`-th event, plus the final event when `n` does not divide M.
    Stride(usize),
    /// Strictly increasing indices in `1..=M`.
    Explicit(Vec<usize>),
}

impl Default for Checkpoints {
    fn default() -> Self {
        Checkpoints::Stride(1)
    }
}

impl Checkpoints {
    pub fn every_event() -> Self {
        Checkpoints::Stride(1)
    }

    pub fn resolve(&self, len: usize) -> Result<Vec<usize>> {
        match self {
            Checkpoints::Stride(0) => Err(Error::InvalidCheckpoints(
                "stride must be at least 1".into(),
            )),
            Checkpoints::Stride(n) => {
                let mut points: Vec<usize> = (*n..=len).step_by(*n).collect();
                if len > 0 && points.last() != Some(&len) {
                    points.push(len);
                }
                Ok(points)
            }
            Checkpoints::Explicit(points) => {
                if let Some(&p) = points.iter().find(|&&p| p == 0 || p > len) {
                    return Err(Error::InvalidCheckpoints(format!(
                        "index {p} outside 1..={len}"
                    )));
                }
                if points.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidCheckpoints(
                        "indices must be strictly increasing".into(),
                    ));
                }
                Ok(points.clone())
            }
        }
    }
}
