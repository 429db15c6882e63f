//! Shared service state: the loaded artifacts, the metrics registry, and
//! the drift monitor.
//!
//! Everything a request needs to score is immutable after startup: the
//! model, the decision threshold, and the training-set imputation medians.
//! Serving never refits any of them. The only mutable state is the drift
//! monitor (one mutex around the rolling window and the feature counts)
//! and the atomic counters inside the registry.

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use readmit_core::cohort::io::load_imputation;
use readmit_core::cohort::{FeatureVector, Imputation};
use readmit_core::drift::{
    prediction_drift_check, DriftReference, FeatureAccumulator, RollingWindow,
};
use readmit_core::model::{load_model, Model};
use readmit_core::{Error, Result, SCHEMA_VERSION};

use crate::config::ServeConfig;
use crate::metrics::{DriftGauges, MetricsRegistry};

/// Artifacts needed to score one request.
pub struct ScoringState {
    pub model: Model,
    pub model_version: String,
    pub imputation: Imputation,
}

struct DriftMonitor {
    reference: DriftReference,
    inner: Mutex<DriftInner>,
}

struct DriftInner {
    window: RollingWindow,
    features: FeatureAccumulator,
}

pub struct AppState {
    scoring: Option<ScoringState>,
    threshold: f64,
    explain_k: usize,
    drift: Option<DriftMonitor>,
    metrics: MetricsRegistry,
    started: Instant,
    requests: AtomicU64,
}

impl AppState {
    pub fn new(
        model: Model,
        imputation: Imputation,
        threshold: f64,
        explain_k: usize,
    ) -> Result<AppState> {
        model.validate()?;
        check_threshold(threshold)?;
        Ok(AppState {
            scoring: Some(ScoringState {
                model,
                model_version: SCHEMA_VERSION.to_string(),
                imputation,
            }),
            threshold,
            explain_k: explain_k.max(1),
            drift: None,
            metrics: MetricsRegistry::new(),
            started: Instant::now(),
            requests: AtomicU64::new(0),
        })
    }

    /// Degraded state for the window between process start and model load;
    /// scoring endpoints answer 503 until a model is present.
    pub fn without_model(threshold: f64, explain_k: usize) -> AppState {
        AppState {
            scoring: None,
            threshold,
            explain_k: explain_k.max(1),
            drift: None,
            metrics: MetricsRegistry::new(),
            started: Instant::now(),
            requests: AtomicU64::new(0),
        }
    }

    /// Attaches a drift monitor. A window override replaces the reference's
    /// capacity coherently: the 2-sigma gate scales with the same `W` the
    /// window actually holds.
    pub fn with_drift_reference(
        mut self,
        reference: DriftReference,
        window_override: Option<usize>,
    ) -> Result<AppState> {
        let mut reference = reference;
        if let Some(w) = window_override {
            reference.window_size = w;
        }
        reference.validate()?;
        let inner = DriftInner {
            window: RollingWindow::new(reference.window_size)?,
            features: FeatureAccumulator::new(&reference)?,
        };
        self.drift = Some(DriftMonitor { reference, inner: Mutex::new(inner) });
        Ok(self)
    }

    pub fn from_config(config: &ServeConfig) -> Result<AppState> {
        config.validate()?;
        let model = load_model(&config.model_path)?;
        let imputation = load_imputation(&config.imputation_path)?;
        let state = AppState::new(model, imputation, config.threshold, config.explain_k)?;
        match &config.drift_reference_path {
            Some(path) => {
                let reference = load_drift_reference(path)?;
                state.with_drift_reference(reference, config.window_size)
            }
            None => Ok(state),
        }
    }

    pub fn scoring(&self) -> Option<&ScoringState> {
        self.scoring.as_ref()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn explain_k(&self) -> usize {
        self.explain_k
    }

    pub fn metrics(&self) -> &MetricsRegistry {
        &self.metrics
    }

    pub fn uptime_seconds(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    pub fn next_request_id(&self) -> String {
        format!("req-{:08}", self.requests.fetch_add(1, Ordering::Relaxed) + 1)
    }

    pub fn requests_issued(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    /// Feeds one served prediction into the drift monitor. A no-op without
    /// a reference attached.
    pub fn observe_prediction(&self, x: &FeatureVector, probability: f64) -> Result<()> {
        let Some(monitor) = &self.drift else {
            return Ok(());
        };
        let mut inner = monitor.inner.lock().expect("drift monitor lock poisoned");
        inner.window.push(probability)?;
        inner.features.observe(&monitor.reference, x)
    }

    /// Gauge values for a scrape, computed from the monitor's current
    /// counts. `None` when no drift reference is attached.
    pub fn drift_gauges(&self) -> Option<DriftGauges> {
        let monitor = self.drift.as_ref()?;
        let inner = monitor.inner.lock().expect("drift monitor lock poisoned");
        let verdict = prediction_drift_check(&monitor.reference, &inner.window);
        let features = if inner.features.observed() == 0 {
            Vec::new()
        } else {
            inner
                .features
                .feature_kl(&monitor.reference)
                .expect("accumulator was built from this reference")
        };
        Some(DriftGauges {
            features,
            window_fill: verdict.window_fill,
            window_capacity: verdict.window_capacity,
            window_mean: verdict.window_mean,
            prediction_alert: verdict.prediction_alert,
        })
    }
}

pub fn load_drift_reference(path: &Path) -> Result<DriftReference> {
    DriftReference::from_json(&fs::read_to_string(path)?)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid_config(format!("threshold must be in (0, 1), got {threshold}")))
    }
}
