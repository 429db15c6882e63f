//! Service-level objective evaluation over a metrics snapshot.
//!
//! Availability and error rate share one definition of "error": a 5xx
//! response. Client errors (4xx) count toward total traffic, so a burst of
//! malformed requests does not dent availability. Latency is judged per
//! scoring endpoint at p99, interpolated from the histogram buckets.

use serde::Serialize;

use crate::metrics::RegistrySnapshot;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SloTargets {
    /// Minimum fraction of requests answered without a server error.
    pub availability: f64,
    /// Maximum 99th-percentile latency in milliseconds.
    pub p99_ms: f64,
    /// Maximum fraction of requests answered with a server error.
    pub error_rate: f64,
}

impl Default for SloTargets {
    fn default() -> Self {
        SloTargets { availability: 0.999, p99_ms: 200.0, error_rate: 0.001 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SloStatus {
    Pass,
    Fail,
    /// No traffic recorded; nothing can be asserted either way.
    InsufficientData,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SloSignal {
    pub name: String,
    /// Missing when the signal had no data (endpoint without traffic).
    pub observed: Option<f64>,
    pub target: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SloReport {
    pub total_requests: u64,
    pub signals: Vec<SloSignal>,
    /// Names of failing signals, in evaluation order.
    pub failing: Vec<String>,
    pub status: SloStatus,
}

pub fn evaluate_slo(snapshot: &RegistrySnapshot, targets: &SloTargets) -> SloReport {
    let total = snapshot.total_requests();
    if total == 0 {
        return SloReport {
            total_requests: 0,
            signals: Vec::new(),
            failing: Vec::new(),
            status: SloStatus::InsufficientData,
        };
    }

    let errors = snapshot.server_errors() as f64;
    let availability = 1.0 - errors / total as f64;
    let error_rate = errors / total as f64;

    let mut signals = vec![
        SloSignal {
            name: "availability".into(),
            observed: Some(availability),
            target: targets.availability,
            pass: availability >= targets.availability,
        },
        SloSignal {
            name: "error_rate".into(),
            observed: Some(error_rate),
            target: targets.error_rate,
            pass: error_rate <= targets.error_rate,
        },
    ];

    for name in ["predict", "explain"] {
        let Some(endpoint) = snapshot.endpoint(name) else { continue };
        if endpoint.observations() == 0 {
            continue;
        }
        let p99 = endpoint.quantile_ms(0.99);
        signals.push(SloSignal {
            name: format!("p99_{name}_ms"),
            observed: p99,
            target: targets.p99_ms,
            pass: p99.is_some_and(|v| v <= targets.p99_ms),
        });
    }

    let failing: Vec<String> =
        signals.iter().filter(|s| !s.pass).map(|s| s.name.clone()).collect();
    let status = if failing.is_empty() { SloStatus::Pass } else { SloStatus::Fail };
    SloReport { total_requests: total, signals, failing, status }
}
