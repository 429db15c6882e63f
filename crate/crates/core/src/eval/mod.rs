//! Discrimination, calibration, and threshold metrics for probabilistic
//! scorers, plus bootstrap confidence intervals.
//!
//! All metrics operate on a validated [`ScoredSet`]: parallel score/label
//! vectors where every score is a probability. Metrics that are undefined on
//! degenerate inputs (single-class AUC, precision with no predicted
//! positives) return errors or `None` rather than silently producing 0.

pub mod bootstrap;
pub mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bootstrap::{bootstrap_ci, BootstrapCi, BootstrapConfig};
pub use report::{evaluate, EvaluationReport, ThresholdSpec};

/// Parallel scores and outcomes for one evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredSet {
    /// Validates lengths, non-emptiness, and that scores are probabilities.
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::invalid_input("scored set must be non-empty"));
        }
        if scores.len() != labels.len() {
            return Err(Error::invalid_input(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if let Some(bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::invalid_input(format!(
                "scores must lie in [0, 1], got {bad}"
            )));
        }
        Ok(ScoredSet { scores, labels })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| **l).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    /// Subset by index; indices may repeat (bootstrap resamples).
    pub fn select(&self, indices: &[usize]) -> Result<ScoredSet> {
        let scores = indices.iter().map(|&i| self.scores[i]).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        ScoredSet::new(scores, labels)
    }

    fn require_both_classes(&self, metric: &str) -> Result<(usize, usize)> {
        let pos = self.positives();
        let neg = self.len() - pos;
        if pos == 0 || neg == 0 {
            return Err(Error::undefined_metric(format!(
                "{metric} needs both classes, got {pos} positives / {neg} negatives"
            )));
        }
        Ok((pos, neg))
    }
}

/// Indices ordered by ascending score (ties keep input order).
fn ascending_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .partial_cmp(&scores[b])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });
    order
}

/// Area under the ROC curve via the Mann-Whitney U statistic. Ties between
/// a positive and a negative count one half, which is exactly the
/// average-rank formulation used here.
pub fn auc_roc(s: &ScoredSet) -> Result<f64> {
    let (pos, neg) = s.require_both_classes("auc_roc")?;
    let order = ascending_order(s.scores());
    // Sum average ranks (1-based) of the positives, handling tie runs.
    let mut rank_sum_pos = 0.0_f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && s.scores[order[j]] == s.scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j share the average rank.
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if s.labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// One operating point of the ROC staircase. The curve starts at a synthetic
/// (0, 0) point whose threshold (2.0) no probability can reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Threshold above every probability, used for the all-negative operating
/// point so serialized curves stay finite.
pub const THRESHOLD_NEVER: f64 = 2.0;

/// ROC curve over the distinct observed scores, descending. Classification
/// is `score >= threshold`, so the final point (threshold = minimum score)
/// is always (1, 1).
pub fn roc_curve(s: &ScoredSet) -> Result<Vec<RocPoint>> {
    let (pos, neg) = s.require_both_classes("roc_curve")?;
    let order = ascending_order(s.scores());
    let mut points = vec![RocPoint {
        threshold: THRESHOLD_NEVER,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    // Walk descending so counts accumulate as thresholds loosen.
    let mut i = order.len();
    while i > 0 {
        let mut j = i;
        let score = s.scores[order[i - 1]];
        while j > 0 && s.scores[order[j - 1]] == score {
            if s.labels[order[j - 1]] {
                tp += 1;
            } else {
                fp += 1;
            }
            j -= 1;
        }
        points.push(RocPoint {
            threshold: score,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
        i = j;
    }
    Ok(points)
}

/// One operating point of the precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

/// Precision-recall curve over distinct observed scores, descending.
pub fn pr_curve(s: &ScoredSet) -> Result<Vec<PrPoint>> {
    let pos = s.positives();
    if pos == 0 {
        return Err(Error::undefined_metric("pr_curve needs at least one positive"));
    }
    let order = ascending_order(s.scores());
    let mut points = Vec::new();
    let mut tp = 0usize;
    let mut predicted = 0usize;
    let mut i = order.len();
    while i > 0 {
        let score = s.scores[order[i - 1]];
        while i > 0 && s.scores[order[i - 1]] == score {
            if s.labels[order[i - 1]] {
                tp += 1;
            }
            predicted += 1;
            i -= 1;
        }
        points.push(PrPoint {
            threshold: score,
            recall: tp as f64 / pos as f64,
            precision: tp as f64 / predicted as f64,
        });
    }
    Ok(points)
}

/// Average precision: the PR curve integrated as a step function in recall,
/// `sum (R_k - R_{k-1}) * P_k` over descending distinct thresholds. Tied
/// scores move together, so a uniform scorer collapses to a single step and
/// scores exactly the prevalence.
pub fn auc_prc(s: &ScoredSet) -> Result<f64> {
    let points = pr_curve(s)?;
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for p in points {
        ap += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    Ok(ap)
}

/// Mean squared error between scores and binary outcomes.
pub fn brier(s: &ScoredSet) -> f64 {
    let n = s.len() as f64;
    s.scores
        .iter()
        .zip(&s.labels)
        .map(|(p, y)| {
            let y = *y as u8 as f64;
            (p - y) * (p - y)
        })
        .sum::<f64>()
        / n
}

/// Confusion counts at a threshold; positive prediction means
/// `score >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// None when nothing is predicted positive.
    pub fn precision(&self) -> Option<f64> {
        let denom = self.tp + self.fp;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }

    /// None when there are no actual positives.
    pub fn recall(&self) -> Option<f64> {
        let denom = self.tp + self.fn_;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }

    pub fn fnr(&self) -> Option<f64> {
        self.recall().map(|r| 1.0 - r)
    }

    /// None when there are no actual negatives.
    pub fn fpr(&self) -> Option<f64> {
        let denom = self.fp + self.tn;
        (denom > 0).then(|| self.fp as f64 / denom as f64)
    }

    pub fn specificity(&self) -> Option<f64> {
        self.fpr().map(|f| 1.0 - f)
    }

    /// Harmonic mean of precision and recall; None if either is undefined
    /// or both are zero.
    pub fn f1(&self) -> Option<f64> {
        let p = self.precision()?;
        let r = self.recall()?;
        if p + r == 0.0 {
            return None;
        }
        Some(2.0 * p * r / (p + r))
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

pub fn confusion_at(s: &ScoredSet, threshold: f64) -> Confusion {
    let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (score, label) in s.scores.iter().zip(&s.labels) {
        let predicted = *score >= threshold;
        match (predicted, label) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// One equal-width reliability bin over [lo, hi); the final bin is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Mean score of members; None for empty bins.
    pub mean_score: Option<f64>,
    /// Positive fraction of members; None for empty bins.
    pub observed_rate: Option<f64>,
}

/// Equal-width reliability diagram. Empty bins stay in the output with
/// count 0 and null statistics.
pub fn calibration_curve(s: &ScoredSet, n_bins: usize) -> Result<Vec<CalibrationBin>> {
    if n_bins == 0 {
        return Err(Error::invalid_input("calibration needs at least one bin"));
    }
    let b = n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    let mut score_sums = vec![0.0_f64; n_bins];
    let mut pos_counts = vec![0usize; n_bins];
    for (score, label) in s.scores.iter().zip(&s.labels) {
        // score == 1.0 falls in the final (closed) bin.
        let bin = ((score * b).floor() as usize).min(n_bins - 1);
        counts[bin] += 1;
        score_sums[bin] += score;
        pos_counts[bin] += *label as usize;
    }
    Ok((0..n_bins)
        .map(|k| CalibrationBin {
            lo: k as f64 / b,
            hi: (k + 1) as f64 / b,
            count: counts[k],
            mean_score: (counts[k] > 0).then(|| score_sums[k] / counts[k] as f64),
            observed_rate: (counts[k] > 0).then(|| pos_counts[k] as f64 / counts[k] as f64),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoudenResult {
    pub threshold: f64,
    pub j: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// Threshold maximizing Youden's J (TPR - FPR) over the distinct observed
/// scores; ties resolve to the smallest threshold.
pub fn youden_threshold(s: &ScoredSet) -> Result<YoudenResult> {
    let (pos, neg) = s.require_both_classes("youden_threshold")?;
    let order = ascending_order(s.scores());
    // Walking thresholds ascending, `score >= t` counts a suffix; start with
    // everything predicted positive at the smallest observed score.
    let mut tp = pos;
    let mut fp = neg;
    let mut best: Option<YoudenResult> = None;
    let mut i = 0;
    while i < order.len() {
        let threshold = s.scores[order[i]];
        let tpr = tp as f64 / pos as f64;
        let fpr = fp as f64 / neg as f64;
        let j = tpr - fpr;
        let better = match &best {
            None => true,
            // Strict improvement only: earlier (smaller) thresholds win ties.
            Some(b) => j > b.j,
        };
        if better {
            best = Some(YoudenResult { threshold, j, tpr, fpr });
        }
        // Remove this tie group from the predicted-positive suffix.
        while i < order.len() && s.scores[order[i]] == threshold {
            if s.labels[order[i]] {
                tp -= 1;
            } else {
                fp -= 1;
            }
            i += 1;
        }
    }
    Ok(best.expect("non-empty set always yields a candidate"))
}

/// One row of the uniform threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Confusion metrics over an evenly spaced threshold grid on [0, 1].
/// `grid_size` points include both endpoints; the default grid is 101 points
/// at 0.01 spacing.
pub fn threshold_sweep(s: &ScoredSet, grid_size: usize) -> Result<Vec<SweepRow>> {
    if grid_size < 2 {
        return Err(Error::invalid_input("sweep grid needs at least 2 points"));
    }
    // Sort once; each grid threshold needs only suffix counts.
    let order = ascending_order(s.scores());
    let pos_total = s.positives();
    let n = s.len();
    let mut rows = Vec::with_capacity(grid_size);
    // Cumulative counts of records with score < t, advanced as t grows.
    let mut below = 0usize;
    let mut pos_below = 0usize;
    for k in 0..grid_size {
        let threshold = k as f64 / (grid_size - 1) as f64;
        while below < n && s.scores[order[below]] < threshold {
            pos_below += s.labels[order[below]] as usize;
            below += 1;
        }
        let tp = pos_total - pos_below;
        let fp = (n - below) - tp;
        let c = Confusion {
            tp,
            fp,
            tn: (below) - pos_below,
            fn_: pos_below,
        };
        rows.push(SweepRow {
            threshold,
            precision: c.precision(),
            recall: c.recall(),
            f1: c.f1(),
            tp: c.tp,
            fp: c.fp,
            tn: c.tn,
            fn_: c.fn_,
        });
    }
    Ok(rows)
}
