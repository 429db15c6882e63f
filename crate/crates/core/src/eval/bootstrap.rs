//! Percentile bootstrap confidence intervals.
//!
//! Each iteration draws its own RNG from (seed, iteration index), so the
//! resample sequence is a pure function of those two values. That makes the
//! parallel path bitwise-identical to the serial one: work stealing can
//! reorder execution but not the per-iteration streams.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ScoredSet;
use crate::rng::sub_rng;

/// Attempts to redraw an iteration whose resample left the metric undefined
/// (e.g. a single-class AUC resample) before giving up on that iteration.
const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub iterations: usize,
    pub seed: u64,
    /// Two-sided confidence level, e.g. 0.95.
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            iterations: 1000,
            seed: 0,
            level: 0.95,
        }
    }
}

impl BootstrapConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid_input("bootstrap needs at least one iteration"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid_input("confidence level must be in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    /// Metric on the original (unresampled) set.
    pub point: f64,
    pub low: f64,
    pub high: f64,
    pub iterations: usize,
    /// Iterations abandoned because the metric stayed undefined after
    /// redraw attempts.
    pub skipped: usize,
    pub level: f64,
}

/// One bootstrap iteration: resample with replacement, retrying while the
/// metric is undefined on the resample.
fn iteration_value<F>(s: &ScoredSet, metric: &F, seed: u64, iter: u64) -> Option<f64>
where
    F: Fn(&ScoredSet) -> Result<f64> + Sync,
{
    let mut rng = sub_rng(seed, iter);
    let n = s.len();
    for _ in 0..=MAX_REDRAWS {
        let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let resample = s.select(&indices).expect("indices in range");
        if let Ok(v) = metric(&resample) {
            return Some(v);
        }
    }
    None
}

/// Empirical quantile with linear interpolation between order statistics
/// (the common "type 7" definition). `sorted` must be ascending.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap CI for any scored-set metric. Fails if the metric is
/// undefined on the original set or on more than half the iterations.
pub fn bootstrap_ci<F>(s: &ScoredSet, metric: F, config: &BootstrapConfig) -> Result<BootstrapCi>
where
    F: Fn(&ScoredSet) -> Result<f64> + Sync,
{
    config.validate()?;
    let point = metric(s)?;

    let values: Vec<Option<f64>> = (0..config.iterations as u64)
        .into_par_iter()
        .map(|iter| iteration_value(s, &metric, config.seed, iter))
        .collect();

    let skipped = values.iter().filter(|v| v.is_none()).count();
    if skipped * 2 > config.iterations {
        return Err(Error::undefined_metric(format!(
            "metric undefined on {skipped} of {} bootstrap iterations",
            config.iterations
        )));
    }
    let mut kept: Vec<f64> = values.into_iter().flatten().collect();
    kept.sort_by(|a, b| a.partial_cmp(b).expect("metric values are finite"));

    let alpha = (1.0 - config.level) / 2.0;
    Ok(BootstrapCi {
        point,
        low: quantile(&kept, alpha),
        high: quantile(&kept, 1.0 - alpha),
        iterations: config.iterations,
        skipped,
        level: config.level,
    })
}
