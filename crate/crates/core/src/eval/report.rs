//! Full evaluation report assembly: everything a model card needs for one
//! scored set at one operating threshold.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::{
    auc_prc, auc_roc, bootstrap_ci, brier, calibration_curve, confusion_at, threshold_sweep,
    youden_threshold, BootstrapCi, BootstrapConfig, CalibrationBin, ScoredSet, SweepRow,
};

/// Where the operating threshold came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdSpec {
    /// Fixed externally (config, CLI flag).
    Fixed { value: f64 },
    /// Youden's J maximized on a held-out set, then applied here.
    Youden { value: f64, source: String },
}

impl ThresholdSpec {
    pub fn value(&self) -> f64 {
        match self {
            ThresholdSpec::Fixed { value } => *value,
            ThresholdSpec::Youden { value, .. } => *value,
        }
    }

    /// Maximizes Youden's J on `validation`.
    pub fn youden_from(validation: &ScoredSet, source: impl Into<String>) -> Result<Self> {
        Ok(ThresholdSpec::Youden {
            value: youden_threshold(validation)?.threshold,
            source: source.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricWithCi {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl From<BootstrapCi> for MetricWithCi {
    fn from(ci: BootstrapCi) -> Self {
        MetricWithCi {
            value: ci.point,
            ci_low: ci.low,
            ci_high: ci.high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub threshold: ThresholdSpec,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub ppv: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub fnr: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n: usize,
    pub positives: usize,
    pub prevalence: f64,
    pub auc_roc: MetricWithCi,
    pub auc_prc: MetricWithCi,
    pub brier: MetricWithCi,
    pub at_threshold: ThresholdMetrics,
    pub calibration: Vec<CalibrationBin>,
    pub sweep: Vec<SweepRow>,
    pub bootstrap: BootstrapConfig,
    pub bootstrap_skipped: usize,
}

/// Number of equal-width reliability bins in the standard report.
pub const CALIBRATION_BINS: usize = 10;
/// Threshold grid resolution in the standard report (0.01 steps on [0, 1]).
pub const SWEEP_GRID: usize = 101;

/// Evaluates a scored set at one threshold, bootstrapping CIs for the three
/// scalar metrics. The same seed drives three independent bootstrap streams
/// (tags 0-2 via the iteration indices), so reports are reproducible
/// bit-for-bit given (scores, labels, threshold, bootstrap config).
pub fn evaluate(
    s: &ScoredSet,
    threshold: ThresholdSpec,
    bootstrap: &BootstrapConfig,
) -> Result<EvaluationReport> {
    let auc = bootstrap_ci(s, |s| auc_roc(s), bootstrap)?;
    let prc = bootstrap_ci(
        s,
        |s| auc_prc(s),
        &BootstrapConfig { seed: bootstrap.seed.wrapping_add(1), ..*bootstrap },
    )?;
    let br = bootstrap_ci(
        s,
        |s| Ok(brier(s)),
        &BootstrapConfig { seed: bootstrap.seed.wrapping_add(2), ..*bootstrap },
    )?;
    let skipped = auc.skipped + prc.skipped + br.skipped;

    let c = confusion_at(s, threshold.value());
    let at_threshold = ThresholdMetrics {
        threshold,
        tp: c.tp,
        fp: c.fp,
        tn: c.tn,
        fn_: c.fn_,
        precision: c.precision(),
        ppv: c.precision(),
        recall: c.recall(),
        f1: c.f1(),
        fnr: c.fnr(),
        specificity: c.specificity(),
        accuracy: c.accuracy(),
    };

    Ok(EvaluationReport {
        n: s.len(),
        positives: s.positives(),
        prevalence: s.positives() as f64 / s.len() as f64,
        auc_roc: auc.into(),
        auc_prc: prc.into(),
        brier: br.into(),
        at_threshold,
        calibration: calibration_curve(s, CALIBRATION_BINS)?,
        sweep: threshold_sweep(s, SWEEP_GRID)?,
        bootstrap: *bootstrap,
        bootstrap_skipped: skipped,
    })
}
