//! HTTP surface: `POST /predict`, `POST /explain`, `GET /health`,
//! `GET /metrics`.
//!
//! Bodies are parsed by hand from raw bytes rather than through the `Json`
//! extractor so every rejection produces the same JSON error shape, names
//! the offending field, and is counted in the registry as a client error.
//! Scoring endpoints answer 503 until a model is loaded. The scrape
//! endpoint is deliberately not instrumented: scraping must not change
//! what the next scrape reports.

use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use readmit_core::cohort::{
    encode_record, FeatureVector, Gender, Insurance, MissingFlags, PatientRecord, Race,
};
use readmit_core::explain::{linear_shap, waterfall_report, TreeShapExplainer};
use readmit_core::model::Model;
use readmit_core::Result;

use crate::config::ServeConfig;
use crate::metrics::{render_metrics, Endpoint};
use crate::state::{AppState, ScoringState};

type SharedState = Arc<AppState>;

pub fn app(state: SharedState) -> Router {
    Router::new()
        .route("/predict", post(predict))
        .route("/explain", post(explain))
        .route("/health", get(health))
        .route("/metrics", get(metrics))
        .with_state(state)
}

/// Binds the configured port and serves until the process exits.
pub async fn serve(config: ServeConfig) -> Result<()> {
    let state = Arc::new(AppState::from_config(&config)?);
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port)).await?;
    axum::serve(listener, app(state)).await?;
    Ok(())
}

/// One admission, exactly the persisted record fields minus the label.
/// The six imputable numerics are optional; omission means missing and is
/// imputed with the training medians. Everything else is required.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub admission_id: u64,
    #[serde(default)]
    pub admission_time: i64,
    pub age: u32,
    pub gender: String,
    pub race: String,
    pub insurance: String,
    pub length_of_stay: Option<f64>,
    pub n_diagnoses: Option<u32>,
    pub n_procedures: Option<u32>,
    pub n_medications: Option<u32>,
    pub prior_admissions_12mo: Option<u32>,
    pub charlson_index: Option<u32>,
    pub emergency_admission: bool,
    pub high_risk_med: bool,
    pub polypharmacy: bool,
    pub non_home_admission_source: bool,
}

impl PredictRequest {
    fn to_record(&self) -> std::result::Result<PatientRecord, String> {
        let gender = Gender::parse(&self.gender)
            .ok_or_else(|| format!("gender: unknown value '{}'", self.gender))?;
        let race =
            Race::parse(&self.race).ok_or_else(|| format!("race: unknown value '{}'", self.race))?;
        let insurance = Insurance::parse(&self.insurance)
            .ok_or_else(|| format!("insurance: unknown value '{}'", self.insurance))?;
        let record = PatientRecord {
            admission_id: self.admission_id,
            admission_time: self.admission_time,
            age: self.age,
            gender,
            race,
            insurance,
            length_of_stay: self.length_of_stay,
            n_diagnoses: self.n_diagnoses,
            n_procedures: self.n_procedures,
            n_medications: self.n_medications,
            prior_admissions_12mo: self.prior_admissions_12mo,
            charlson_index: self.charlson_index,
            emergency_admission: self.emergency_admission,
            high_risk_med: self.high_risk_med,
            polypharmacy: self.polypharmacy,
            non_home_admission_source: self.non_home_admission_source,
            label: None,
            missing: MissingFlags {
                length_of_stay: self.length_of_stay.is_none(),
                n_diagnoses: self.n_diagnoses.is_none(),
                n_procedures: self.n_procedures.is_none(),
                n_medications: self.n_medications.is_none(),
                prior_admissions_12mo: self.prior_admissions_12mo.is_none(),
                charlson_index: self.charlson_index.is_none(),
            },
        };
        record.validate().map_err(|e| e.to_string())?;
        Ok(record)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictResponse {
    pub request_id: String,
    pub model_version: String,
    pub probability: f64,
    /// `probability >= threshold`: flagged for post-discharge intervention.
    pub risk_flag: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Contribution {
    pub feature: String,
    /// Raw input value; null when it was missing and imputed.
    pub value: Option<f64>,
    pub phi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplainResponse {
    pub request_id: String,
    pub model_version: String,
    pub probability: f64,
    pub risk_flag: bool,
    /// Expected margin over the training distribution (log-odds).
    pub base_value: f64,
    /// Largest |phi| first. base_value + sum(phi) + remainder_phi
    /// reconstructs logit(probability).
    pub contributions: Vec<Contribution>,
    pub remainder_phi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HealthResponse {
    pub status: &'static str,
    pub model_loaded: bool,
    pub model_version: Option<String>,
    pub uptime_seconds: f64,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn unprocessable(message: impl Into<String>) -> ApiError {
        ApiError { status: StatusCode::UNPROCESSABLE_ENTITY, message: message.into() }
    }

    fn unavailable() -> ApiError {
        ApiError {
            status: StatusCode::SERVICE_UNAVAILABLE,
            message: "model not loaded".to_string(),
        }
    }

    fn internal(err: impl std::fmt::Display) -> ApiError {
        ApiError { status: StatusCode::INTERNAL_SERVER_ERROR, message: err.to_string() }
    }
}

/// A parsed, validated, scored request; both scoring endpoints start here
/// so /predict and /explain cannot disagree on a probability.
struct Scored<'a> {
    scoring: &'a ScoringState,
    /// Encoded input with missing values still NaN (for display).
    raw: FeatureVector,
    /// Imputed vector actually scored.
    x: FeatureVector,
    probability: f64,
}

fn score_request<'a>(state: &'a AppState, body: &[u8]) -> std::result::Result<Scored<'a>, ApiError> {
    let scoring = state.scoring().ok_or_else(ApiError::unavailable)?;
    let request: PredictRequest = serde_json::from_slice(body)
        .map_err(|e| ApiError::unprocessable(format!("invalid request body: {e}")))?;
    let record = request.to_record().map_err(ApiError::unprocessable)?;
    let raw = encode_record(&record).map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let mut x = raw.clone();
    scoring.imputation.apply_vector(&mut x);
    let probability = scoring.model.predict_proba(&x);
    Ok(Scored { scoring, raw, x, probability })
}

async fn predict(State(state): State<SharedState>, body: Bytes) -> Response {
    let started = Instant::now();
    let result = run_predict(&state, &body);
    respond(&state, Endpoint::Predict, started, result)
}

fn run_predict(state: &AppState, body: &[u8]) -> std::result::Result<PredictResponse, ApiError> {
    let scored = score_request(state, body)?;
    state.observe_prediction(&scored.x, scored.probability).map_err(ApiError::internal)?;
    Ok(PredictResponse {
        request_id: state.next_request_id(),
        model_version: scored.scoring.model_version.clone(),
        probability: scored.probability,
        risk_flag: scored.probability >= state.threshold(),
    })
}

async fn explain(State(state): State<SharedState>, body: Bytes) -> Response {
    let started = Instant::now();
    let result = run_explain(&state, &body);
    respond(&state, Endpoint::Explain, started, result)
}

fn run_explain(state: &AppState, body: &[u8]) -> std::result::Result<ExplainResponse, ApiError> {
    let scored = score_request(state, body)?;
    let explanation = match &scored.scoring.model {
        Model::Gbdt { ensemble, .. } => {
            TreeShapExplainer::new(ensemble).map_err(ApiError::internal)?.explain(&scored.x)
        }
        Model::Linear { weights, intercept, standardizer } => {
            linear_shap(weights, *intercept, standardizer, &scored.x).map_err(ApiError::internal)?
        }
    };
    // Attribution values are displayed from the raw vector so imputed
    // fields surface as null, not as the median that replaced them.
    let report = waterfall_report(&explanation, &scored.raw, state.explain_k());
    Ok(ExplainResponse {
        request_id: state.next_request_id(),
        model_version: scored.scoring.model_version.clone(),
        probability: scored.probability,
        risk_flag: scored.probability >= state.threshold(),
        base_value: report.base_value,
        contributions: report
            .entries
            .into_iter()
            .map(|e| Contribution { feature: e.feature, value: e.value, phi: e.phi })
            .collect(),
        remainder_phi: report.remainder_phi,
    })
}

async fn health(State(state): State<SharedState>) -> Response {
    let started = Instant::now();
    let (status, body) = match state.scoring() {
        Some(scoring) => (
            StatusCode::OK,
            HealthResponse {
                status: "ok",
                model_loaded: true,
                model_version: Some(scoring.model_version.clone()),
                uptime_seconds: state.uptime_seconds(),
            },
        ),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            HealthResponse {
                status: "unavailable",
                model_loaded: false,
                model_version: None,
                uptime_seconds: state.uptime_seconds(),
            },
        ),
    };
    let response = (status, Json(body)).into_response();
    state.metrics().record(Endpoint::Health, status.as_u16(), elapsed_ms(started));
    response
}

async fn metrics(State(state): State<SharedState>) -> Response {
    let text = render_metrics(&state.metrics().snapshot(), state.drift_gauges().as_ref());
    ([(header::CONTENT_TYPE, "text/plain; version=0.0.4")], text).into_response()
}

fn respond<T: Serialize>(
    state: &AppState,
    endpoint: Endpoint,
    started: Instant,
    result: std::result::Result<T, ApiError>,
) -> Response {
    let (status, response) = match result {
        Ok(body) => (StatusCode::OK, (StatusCode::OK, Json(body)).into_response()),
        Err(e) => (e.status, (e.status, Json(ErrorBody { error: e.message })).into_response()),
    };
    state.metrics().record(endpoint, status.as_u16(), elapsed_ms(started));
    response
}

fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1000.0
}
