//! Reference-based drift monitoring.
//!
//! A [`DriftReference`] freezes per-feature histograms from the training
//! split (decile bins for numeric features, category frequencies for
//! indicators) plus the mean and spread of validation predictions. Serving
//! then compares incoming batches against the frozen bins with KL
//! divergence and watches a rolling window of predictions for mean shift.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::cohort::schema::{FEATURE_COUNT, FEATURE_NAMES};
use crate::cohort::FeatureVector;
use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

/// Per-feature KL divergence (nats) above which drift is alerted.
pub const KL_GATE: f64 = 0.05;
/// Laplace smoothing mass added to every bin on both sides of the KL.
pub const LAPLACE_EPS: f64 = 1e-6;
/// Default prediction window capacity.
pub const DEFAULT_WINDOW: usize = 1000;

/// Binning scheme for one feature: decile edges for numeric features, an
/// exact category set for indicator features. Categorical histograms keep
/// a trailing overflow bin for values outside the reference categories, so
/// novel categories surface as drift rather than errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bins {
    /// Interior edges, strictly increasing; values `<=` an edge fall left.
    /// Bin count is `edges.len() + 1`.
    Numeric { edges: Vec<f64> },
    /// Observed categories in ascending order; bin count is
    /// `categories.len() + 1` (overflow last).
    Categorical { categories: Vec<f64> },
}

impl Bins {
    fn bin_count(&self) -> usize {
        match self {
            Bins::Numeric { edges } => edges.len() + 1,
            Bins::Categorical { categories } => categories.len() + 1,
        }
    }

    fn bin_index(&self, value: f64) -> usize {
        match self {
            Bins::Numeric { edges } => edges.partition_point(|e| *e < value),
            Bins::Categorical { categories } => categories
                .iter()
                .position(|c| *c == value)
                .unwrap_or(categories.len()),
        }
    }
}

/// Frozen histogram for one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureReference {
    pub name: String,
    pub bins: Bins,
    /// Training bin counts.
    pub counts: Vec<u64>,
    /// Laplace-smoothed training probabilities; always sum to 1.
    pub probs: Vec<f64>,
    /// Whether the training column was constant (single-bin histogram; KL
    /// against it is 0 by construction).
    pub constant: bool,
}

/// Everything serving needs to score drift: per-feature histograms plus
/// the validation prediction mean/spread and the window capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReference {
    pub schema_version: String,
    pub features: Vec<FeatureReference>,
    /// Mean of validation predictions.
    pub prediction_mean: f64,
    /// Population standard deviation of validation predictions.
    pub prediction_sd: f64,
    pub window_size: usize,
}

impl DriftReference {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid_input(format!(
                "drift reference version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.features.len() != FEATURE_COUNT {
            return Err(Error::invalid_input(format!(
                "drift reference covers {} features, expected {FEATURE_COUNT}",
                self.features.len()
            )));
        }
        if self.window_size == 0 {
            return Err(Error::invalid_input("window_size must be >= 1"));
        }
        if !(self.prediction_sd >= 0.0 && self.prediction_sd.is_finite()) {
            return Err(Error::invalid_input("prediction_sd must be finite and >= 0"));
        }
        if !self.prediction_mean.is_finite() {
            return Err(Error::invalid_input("prediction_mean must be finite"));
        }
        for f in &self.features {
            if f.probs.len() != f.bins.bin_count() || f.counts.len() != f.bins.bin_count() {
                return Err(Error::invalid_input(format!(
                    "feature {}: histogram length mismatch",
                    f.name
                )));
            }
            let sum: f64 = f.probs.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::invalid_input(format!(
                    "feature {}: probabilities sum to {sum}, expected 1",
                    f.name
                )));
            }
            if let Bins::Numeric { edges } = &f.bins {
                if edges.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid_input(format!(
                        "feature {}: edges must be strictly increasing",
                        f.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid_input(format!("reference serialization failed: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<DriftReference> {
        let reference: DriftReference = serde_json::from_str(text)
            .map_err(|e| Error::invalid_input(format!("malformed drift reference: {e}")))?;
        reference.validate()?;
        Ok(reference)
    }
}

/// Fits the drift reference: decile histograms over the training features
/// (post-imputation, so all values are finite) and prediction moments from
/// the validation split. Features whose observed values are all 0/1 take
/// the categorical path; duplicate decile edges merge, and a constant
/// column collapses to a flagged single-bin histogram.
pub fn fit_reference(
    train: &[FeatureVector],
    val_predictions: &[f64],
    window_size: usize,
) -> Result<DriftReference> {
    if train.is_empty() {
        return Err(Error::invalid_input("fit_reference needs training features"));
    }
    if val_predictions.is_empty() {
        return Err(Error::invalid_input("fit_reference needs validation predictions"));
    }
    if window_size == 0 {
        return Err(Error::invalid_input("window_size must be >= 1"));
    }
    if let Some(bad) = val_predictions.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid_input(format!(
            "validation predictions must lie in [0, 1], got {bad}"
        )));
    }

    let mut features = Vec::with_capacity(FEATURE_COUNT);
    let mut column = Vec::with_capacity(train.len());
    for (slot, name) in FEATURE_NAMES.iter().enumerate() {
        column.clear();
        for x in train {
            let v = x.0[slot];
            if !v.is_finite() {
                return Err(Error::invalid_input(format!(
                    "feature {name}: non-finite training value; impute before fitting drift"
                )));
            }
            column.push(v);
        }
        column.sort_by(f64::total_cmp);

        let indicator = column.iter().all(|&v| v == 0.0 || v == 1.0);
        let bins = if indicator && column[0] != column[column.len() - 1] {
            Bins::Categorical {
                categories: vec![0.0, 1.0],
            }
        } else {
            Bins::Numeric {
                edges: decile_edges(&column),
            }
        };
        let counts = bin_counts(&bins, column.iter().copied());
        let constant = bins.bin_count() == 1;
        features.push(FeatureReference {
            name: name.to_string(),
            probs: smoothed(&counts),
            bins,
            counts,
            constant,
        });
    }

    let mean = exact_mean(val_predictions.iter().copied());
    let var = val_predictions.iter().map(|p| (p - mean).powi(2)).sum::<f64>()
        / val_predictions.len() as f64;

    let reference = DriftReference {
        schema_version: SCHEMA_VERSION.to_string(),
        features,
        prediction_mean: mean,
        prediction_sd: var.sqrt(),
        window_size,
    };
    reference.validate()?;
    Ok(reference)
}

/// Interior decile cut points of a sorted column, duplicates merged. An
/// empty result means a single bin (constant column).
fn decile_edges(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let mut edges = Vec::with_capacity(9);
    for k in 1..10 {
        let idx = (k * n / 10).saturating_sub(1);
        let edge = sorted[idx];
        // The final decile must keep at least the maximum above it.
        if edge >= sorted[n - 1] {
            continue;
        }
        if edges.last() != Some(&edge) {
            edges.push(edge);
        }
    }
    edges
}

/// Mean that is exact for constant inputs: summing n copies of a value can
/// round away from it, which would make a window of predictions "deviate"
/// from its own constant and break the zero-sigma degenerate rule.
fn exact_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut iter = values.clone();
    let first = iter.next().expect("mean of non-empty input");
    if iter.all(|v| v == first) {
        return first;
    }
    let (sum, n) = values.fold((0.0, 0u64), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn bin_counts(bins: &Bins, values: impl Iterator<Item = f64>) -> Vec<u64> {
    let mut counts = vec![0u64; bins.bin_count()];
    for v in values {
        counts[bins.bin_index(v)] += 1;
    }
    counts
}

/// Laplace-smoothed probabilities: (count + eps) / (n + bins * eps).
fn smoothed(counts: &[u64]) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    let denom = n as f64 + counts.len() as f64 * LAPLACE_EPS;
    counts
        .iter()
        .map(|&c| (c as f64 + LAPLACE_EPS) / denom)
        .collect()
}

/// KL(current || reference) in nats over identically smoothed histograms.
fn kl_divergence(current_counts: &[u64], reference_probs: &[f64]) -> f64 {
    let current = smoothed(current_counts);
    current
        .iter()
        .zip(reference_probs)
        .map(|(&c, &r)| if c == r { 0.0 } else { c * (c / r).ln() })
        .sum()
}

/// Per-feature drift score for one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureKl {
    pub feature: String,
    pub kl: f64,
    pub alert: bool,
}

/// Bins `batch` with the frozen reference edges and scores
/// KL(current || reference) per feature, alerting above [`KL_GATE`].
pub fn feature_kl(reference: &DriftReference, batch: &[FeatureVector]) -> Result<Vec<FeatureKl>> {
    reference.validate()?;
    if batch.is_empty() {
        return Err(Error::invalid_input("feature_kl needs a non-empty batch"));
    }
    let mut out = Vec::with_capacity(reference.features.len());
    for (slot, feature) in reference.features.iter().enumerate() {
        for x in batch {
            if !x.0[slot].is_finite() {
                return Err(Error::invalid_input(format!(
                    "feature {}: non-finite batch value; impute before scoring drift",
                    feature.name
                )));
            }
        }
        let counts = bin_counts(&feature.bins, batch.iter().map(|x| x.0[slot]));
        let kl = kl_divergence(&counts, &feature.probs);
        out.push(FeatureKl {
            feature: feature.name.clone(),
            kl,
            alert: kl > KL_GATE,
        });
    }
    Ok(out)
}

/// Incremental per-feature bin counts aligned with a frozen reference.
///
/// [`feature_kl`] rebins raw vectors on every call, which suits offline
/// batches. A server cannot retain every request vector, so it folds each
/// one into these counts and scores the identically smoothed divergence on
/// demand. Feeding both paths the same vectors yields bitwise-equal KL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAccumulator {
    counts: Vec<Vec<u64>>,
    observed: u64,
}

impl FeatureAccumulator {
    pub fn new(reference: &DriftReference) -> Result<FeatureAccumulator> {
        reference.validate()?;
        Ok(FeatureAccumulator {
            counts: reference
                .features
                .iter()
                .map(|f| vec![0u64; f.bins.bin_count()])
                .collect(),
            observed: 0,
        })
    }

    /// Bins one served vector. Values must be finite (impute first).
    pub fn observe(&mut self, reference: &DriftReference, x: &FeatureVector) -> Result<()> {
        self.check_shape(reference)?;
        for (slot, feature) in reference.features.iter().enumerate() {
            if !x.0[slot].is_finite() {
                return Err(Error::invalid_input(format!(
                    "feature {}: non-finite batch value; impute before scoring drift",
                    feature.name
                )));
            }
        }
        for (slot, feature) in reference.features.iter().enumerate() {
            self.counts[slot][feature.bins.bin_index(x.0[slot])] += 1;
        }
        self.observed += 1;
        Ok(())
    }

    pub fn observed(&self) -> u64 {
        self.observed
    }

    /// Same smoothed KL(current || reference) as [`feature_kl`], computed
    /// from the accumulated counts.
    pub fn feature_kl(&self, reference: &DriftReference) -> Result<Vec<FeatureKl>> {
        if self.observed == 0 {
            return Err(Error::invalid_input("feature_kl needs a non-empty batch"));
        }
        self.check_shape(reference)?;
        let mut out = Vec::with_capacity(reference.features.len());
        for (slot, feature) in reference.features.iter().enumerate() {
            let kl = kl_divergence(&self.counts[slot], &feature.probs);
            out.push(FeatureKl {
                feature: feature.name.clone(),
                kl,
                alert: kl > KL_GATE,
            });
        }
        Ok(out)
    }

    fn check_shape(&self, reference: &DriftReference) -> Result<()> {
        let matches = self.counts.len() == reference.features.len()
            && self
                .counts
                .iter()
                .zip(&reference.features)
                .all(|(c, f)| c.len() == f.bins.bin_count());
        if matches {
            Ok(())
        } else {
            Err(Error::invalid_input(
                "accumulator bin shape does not match the drift reference",
            ))
        }
    }
}

/// FIFO window over served prediction probabilities. Serving wraps it in a
/// lock; the struct itself is plain state so checks replay deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingWindow {
    capacity: usize,
    values: VecDeque<f64>,
}

impl RollingWindow {
    pub fn new(capacity: usize) -> Result<RollingWindow> {
        if capacity == 0 {
            return Err(Error::invalid_input("window capacity must be >= 1"));
        }
        Ok(RollingWindow {
            capacity,
            values: VecDeque::with_capacity(capacity),
        })
    }

    /// Appends one prediction, evicting the oldest once at capacity.
    pub fn push(&mut self, prediction: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&prediction) {
            return Err(Error::invalid_input(format!(
                "prediction must lie in [0, 1], got {prediction}"
            )));
        }
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(prediction);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_full(&self) -> bool {
        self.values.len() == self.capacity
    }

    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(exact_mean(self.values.iter().copied()))
        }
    }
}

/// Combined drift result: feature KLs (empty when no batch was scored)
/// plus the prediction-window state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftVerdict {
    pub features: Vec<FeatureKl>,
    pub window_fill: usize,
    pub window_capacity: usize,
    pub window_mean: Option<f64>,
    /// |window mean - reference mean| once the window is full.
    pub mean_deviation: Option<f64>,
    /// 2 * sigma / sqrt(W); deviations above it alert.
    pub gate: f64,
    pub prediction_alert: bool,
}

impl DriftVerdict {
    pub fn any_alert(&self) -> bool {
        self.prediction_alert || self.features.iter().any(|f| f.alert)
    }
}

/// Evaluates the prediction-mean rule: once the window holds `W` values,
/// alert iff |mean - mu| > 2 sigma / sqrt(W). A zero-sigma reference alerts
/// on any deviation. Under-filled windows never alert.
pub fn prediction_drift_check(reference: &DriftReference, window: &RollingWindow) -> DriftVerdict {
    let w = reference.window_size;
    let gate = 2.0 * reference.prediction_sd / (w as f64).sqrt();
    let full = window.len() >= w;
    let mean = window.mean();
    let deviation = if full {
        mean.map(|m| (m - reference.prediction_mean).abs())
    } else {
        None
    };
    DriftVerdict {
        features: Vec::new(),
        window_fill: window.len().min(w),
        window_capacity: w,
        window_mean: mean,
        mean_deviation: deviation,
        gate,
        prediction_alert: deviation.is_some_and(|d| d > gate),
    }
}

/// Full drift sweep: per-feature KL on `batch` plus the prediction rule.
pub fn drift_verdict(
    reference: &DriftReference,
    batch: &[FeatureVector],
    window: &RollingWindow,
) -> Result<DriftVerdict> {
    let features = feature_kl(reference, batch)?;
    let mut verdict = prediction_drift_check(reference, window);
    verdict.features = features;
    Ok(verdict)
}
