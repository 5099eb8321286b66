//! Z-scores of real entropy against ensemble statistics, and OLS trends.

use serde::{Deserialize, Serialize};

use crate::baseline::EnsembleStats;
use crate::entropy::{EntropySnapshot, Measure};
use crate::error::{Error, Result};

/// `(s - mean) / sd`. With `sd == 0` the score is 0 when `s == mean` and
/// undefined otherwise.
pub fn zscore(s: f64, mean: f64, sd: f64) -> Option<f64> {
    if s == mean {
        Some(0.0)
    } else if sd > 0.0 {
        Some((s - mean) / sd)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZPoint {
    pub event_index: usize,
    pub timestamp: i64,
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreSeries {
    pub measure: Measure,
    pub points: Vec<ZPoint>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendAxis {
    /// Checkpoint event index.
    #[default]
    Index,
    Timestamp,
}

impl ZScoreSeries {
    pub fn values(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.points.iter().map(|p| p.z)
    }

    pub fn trend(&self, axis: TrendAxis) -> Result<TrendFit> {
        let points: Vec<(f64, Option<f64>)> = self
            .points
            .iter()
            .map(|p| {
                let x = match axis {
                    TrendAxis::Index => p.event_index as f64,
                    TrendAxis::Timestamp => p.timestamp as f64,
                };
                (x, p.z)
            })
            .collect();
        linear_trend_xy(&points)
    }
}

/// Applies [`zscore`] at each checkpoint. Checkpoints of `real` and `stats`
/// must match one to one.
pub fn zscore_series(
    real: &[EntropySnapshot],
    stats: &EnsembleStats,
    measure: Measure,
) -> Result<ZScoreSeries> {
    if real.len() != stats.rows.len() {
        return Err(Error::CheckpointMismatch(format!(
            "{} real checkpoints vs {} ensemble checkpoints",
            real.len(),
            stats.rows.len()
        )));
    }
    let points = real
        .iter()
        .zip(&stats.rows)
        .map(|(snap, row)| {
            if snap.event_index != row.event_index || snap.timestamp != row.timestamp {
                return Err(Error::CheckpointMismatch(format!(
                    "real checkpoint {}@{} vs ensemble checkpoint {}@{}",
                    snap.event_index, snap.timestamp, row.event_index, row.timestamp
                )));
            }
            Ok(ZPoint {
                event_index: snap.event_index,
                timestamp: snap.timestamp,
                z: zscore(snap.value(measure), row.mean(measure), row.sd(measure)),
            })
        })
        .collect::<Result<_>>()?;
    Ok(ZScoreSeries { measure, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub slope: f64,
    pub intercept: f64,
    /// `sqrt(SSR / (n - 2))`; 0 for two points.
    pub residual_sd: f64,
    /// Defined points used in the fit.
    pub points: usize,
}

impl TrendFit {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// OLS fit of `values` against their position `0, 1, 2, ...`, skipping
/// undefined points.
pub fn linear_trend(values: &[Option<f64>]) -> Result<TrendFit> {
    let points: Vec<_> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as f64, v))
        .collect();
    linear_trend_xy(&points)
}

/// OLS fit over `(x, y)` pairs, skipping points whose `y` is undefined.
pub fn linear_trend_xy(points: &[(f64, Option<f64>)]) -> Result<TrendFit> {
    let defined: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|&(x, y)| y.filter(|y| y.is_finite()).map(|y| (x, y)))
        .collect();
    let n = defined.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let x_mean = defined.iter().map(|p| p.0).sum::<f64>() / nf;
    let y_mean = defined.iter().map(|p| p.1).sum::<f64>() / nf;
    let (sxx, sxy) = defined.iter().fold((0.0, 0.0), |(sxx, sxy), &(x, y)| {
        let dx = x - x_mean;
        (sxx + dx * dx, sxy + dx * (y - y_mean))
    });
    // all x equal: no slope information
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = defined
        .iter()
        .map(|&(x, y)| {
            let r = y - (y_mean + slope * (x - x_mean));
            r * r
        })
        .sum();
    let residual_sd = if n > 2 {
        (ssr / (nf - 2.0)).sqrt()
    } else {
        0.0
    };
    Ok(TrendFit {
        slope,
        intercept,
        residual_sd,
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::CheckpointStats;
    use crate::entropy::Role;

    #[test]
    fn zscore_examples() {
        assert_eq!(zscore(5.0, 5.0, 2.0), Some(0.0));
        assert_eq!(zscore(4.0, 6.0, 1.0), Some(-2.0));
        assert_eq!(zscore(4.0, 6.0, 0.0), None);
        assert_eq!(zscore(6.0, 6.0, 0.0), Some(0.0));
    }

    #[test]
    fn exact_line() {
        let fit = linear_trend(&[Some(1.0), Some(2.0), Some(3.0), Some(4.0)]).unwrap();
        assert_eq!(fit.slope, 1.0);
        assert_eq!(fit.intercept, 1.0);
        assert_eq!(fit.residual_sd, 0.0);
    }

    #[test]
    fn constant_series() {
        let fit = linear_trend(&[Some(5.0); 3]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.intercept, 5.0);
        assert_eq!(fit.residual_sd, 0.0);
    }

    #[test]
    fn alternating_series_matches_normal_equations() {
        let ys = [0.0, 1.0, 0.0, 1.0];
        // [n Σx; Σx Σx²] [b; a] = [Σy; Σxy]
        let n = ys.len() as f64;
        let sx: f64 = (0..4).map(|x| x as f64).sum();
        let sxx: f64 = (0..4).map(|x| (x * x) as f64).sum();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = ys.iter().enumerate().map(|(x, y)| x as f64 * y).sum();
        let det = n * sxx - sx * sx;
        let slope = (n * sxy - sx * sy) / det;
        let intercept = (sxx * sy - sx * sxy) / det;
        assert!((slope - 0.2).abs() < 1e-15);
        assert!((intercept - 0.2).abs() < 1e-15);

        let fit = linear_trend(&ys.map(Some)).unwrap();
        assert!((fit.slope - slope).abs() < 1e-12);
        assert!((fit.intercept - intercept).abs() < 1e-12);
        assert!((fit.residual_sd - 0.4f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn skips_undefined_points() {
        let fit = linear_trend(&[Some(1.0), None, Some(3.0), Some(4.0)]).unwrap();
        assert_eq!(fit.points, 3);
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(matches!(
            linear_trend(&[Some(1.0), None]),
            Err(Error::TooFewPoints(1))
        ));
    }

    fn snap(i: usize, s2: f64) -> EntropySnapshot {
        EntropySnapshot {
            event_index: i,
            timestamp: i as i64 * 10,
            nodes: 3,
            role: Role::Sender,
            entropy: [0.0, s2, 0.0],
            max_entropy: [0.0; 3],
            normalized: [0.0; 3],
            degenerate: [false; 3],
        }
    }

    fn row(i: usize, mean: f64, sd: f64) -> CheckpointStats {
        let mut r = CheckpointStats {
            event_index: i,
            timestamp: i as i64 * 10,
            mean: [0.0; 6],
            sd: [0.0; 6],
            min: [0.0; 6],
            max: [0.0; 6],
        };
        r.mean[Measure::S2.index()] = mean;
        r.sd[Measure::S2.index()] = sd;
        r
    }

    fn stats(rows: Vec<CheckpointStats>) -> EnsembleStats {
        EnsembleStats {
            replicas: 2,
            master_seed: 0,
            rows,
        }
    }

    #[test]
    fn series_sign_propagation() {
        let real: Vec<_> = (1..=4).map(|i| snap(i, 1.5)).collect();
        let equal = stats((1..=4).map(|i| row(i, 1.5, 0.3)).collect());
        let z = zscore_series(&real, &equal, Measure::S2).unwrap();
        assert!(z.values().all(|v| v == Some(0.0)));

        let above = stats((1..=4).map(|i| row(i, 2.0 + i as f64, 0.5)).collect());
        let z = zscore_series(&real, &above, Measure::S2).unwrap();
        assert!(z.values().all(|v| v.unwrap() < 0.0));
        let fit = z.trend(TrendAxis::Index).unwrap();
        assert!(fit.slope < 0.0);
    }

    #[test]
    fn series_mismatch() {
        let real: Vec<_> = (1..=3).map(|i| snap(i, 1.0)).collect();
        let short = stats((1..=2).map(|i| row(i, 1.0, 1.0)).collect());
        assert!(zscore_series(&real, &short, Measure::S2).is_err());
        let shifted = stats((2..=4).map(|i| row(i, 1.0, 1.0)).collect());
        assert!(matches!(
            zscore_series(&real, &shifted, Measure::S2),
            Err(Error::CheckpointMismatch(_))
        ));
    }
}
