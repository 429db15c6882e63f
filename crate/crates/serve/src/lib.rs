//! HTTP serving layer for the readmission risk engine.
//!
//! The service loads a frozen model, the training-set imputation medians,
//! and optionally a drift reference, then answers scoring and explanation
//! requests deterministically: the same body always yields the same
//! probability, and /predict and /explain share one scoring path.
//! Observability is built in rather than bolted on: every request lands in
//! an atomic metrics registry rendered as a text exposition at /metrics,
//! and the same snapshot drives service-level objective evaluation.

pub mod config;
pub mod http;
pub mod metrics;
pub mod slo;
pub mod state;

pub use config::{ServeConfig, DEFAULT_EXPLAIN_K, DEFAULT_PORT, DEFAULT_THRESHOLD};
pub use http::{
    app, serve, Contribution, ExplainResponse, HealthResponse, PredictRequest, PredictResponse,
};
pub use metrics::{
    render_metrics, DriftGauges, Endpoint, EndpointSnapshot, MetricsRegistry, RegistrySnapshot,
    LATENCY_BUCKETS_MS,
};
pub use slo::{evaluate_slo, SloReport, SloSignal, SloStatus, SloTargets};
pub use state::AppState;
