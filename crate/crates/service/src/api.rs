use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{delete, get, post, put};
use axum::{Json, Router};
use relint_core::analysis::{AnalysisReport, BaselineSummary};
use relint_core::bounds::ConstraintSet;
use relint_core::data::read_csv;
use relint_core::{analyze, AnalysisParams};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::session::Session;
use crate::{ApiError, AppState};

const DEFAULT_LABEL: &str = "label";

/// Analysis options of a new session; unset fields take the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionParams {
    /// Name of the label column.
    pub label: Option<String>,
    pub delta: Option<f64>,
    /// Coverage of the probe prediction interval.
    pub p: Option<f64>,
    pub probes: Option<usize>,
    pub seed: Option<u64>,
}

impl SessionParams {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(DEFAULT_LABEL)
    }

    pub fn analysis_params(&self) -> AnalysisParams {
        let base = AnalysisParams::default();
        AnalysisParams {
            delta: self.delta.unwrap_or(base.delta),
            coverage: self.p.unwrap_or(base.coverage),
            n_probes: self.probes.unwrap_or(base.n_probes),
            seed: self.seed.unwrap_or(base.seed),
            ..base
        }
    }
}

/// JSON form of a session upload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateRequest {
    pub csv: String,
    #[serde(flatten)]
    pub params: SessionParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateResponse {
    pub id: String,
    pub baseline: BaselineSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResponse {
    pub constraints: ConstraintSet,
    pub infeasible: bool,
    pub results: AnalysisReport,
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = if state.config.cors_origins.is_empty() {
        CorsLayer::new().allow_origin(Any)
    } else {
        let origins: Vec<HeaderValue> =
            state.config.cors_origins.iter().filter_map(|o| o.parse().ok()).collect();
        CorsLayer::new().allow_origin(AllowOrigin::list(origins))
    }
    .allow_methods(Any)
    .allow_headers(Any);

    let mut app = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", delete(delete_session))
        .route("/sessions/{id}/results", get(get_results))
        .route("/sessions/{id}/constraints", put(apply_constraints));
    if let Some(dir) = &state.config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.layer(DefaultBodyLimit::max(state.config.max_body)).layer(cors).with_state(state)
}

fn read_body(state: &AppState, body: Result<Bytes, BytesRejection>) -> Result<Bytes, ApiError> {
    body.map_err(|e| match e.status() {
        StatusCode::PAYLOAD_TOO_LARGE => ApiError::TooLarge(state.config.max_body),
        _ => ApiError::BadRequest(e.body_text()),
    })
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    query: Result<Query<SessionParams>, QueryRejection>,
    headers: HeaderMap,
    body: Result<Bytes, BytesRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let Query(query) = query.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let body = read_body(&state, body)?;
    let content_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or("")
        .split(';')
        .next()
        .unwrap_or("")
        .trim()
        .to_ascii_lowercase();
    let (csv, params) = match content_type.as_str() {
        "text/csv" | "text/plain" => (body, query),
        "application/json" => {
            let req: CreateRequest = serde_json::from_slice(&body)
                .map_err(|e| ApiError::BadRequest(format!("invalid request body: {e}")))?;
            (Bytes::from(req.csv), req.params)
        }
        other => return Err(ApiError::UnsupportedMedia(other.to_string())),
    };

    let worker_state = Arc::clone(&state);
    let session = tokio::task::spawn_blocking(move || -> Result<Session, ApiError> {
        let dataset = read_csv(csv.as_ref(), params.label())?;
        let analysis = analyze(&dataset, &params.analysis_params(), &worker_state.pool)?;
        let now = worker_state.store.now();
        Ok(Session {
            id: uuid::Uuid::new_v4().to_string(),
            dataset,
            analysis,
            constraints: ConstraintSet::new(),
            constrained: None,
            created: now,
            updated: now,
        })
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;

    let response = CreateResponse {
        id: session.id.clone(),
        baseline: (&session.analysis.baseline).into(),
    };
    state.store.insert(session);
    Ok((StatusCode::CREATED, Json(response)))
}

async fn get_results(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<AnalysisReport>, ApiError> {
    let session = state.store.get(&id)?;
    let report = session.read().await.results();
    Ok(Json(report))
}

async fn apply_constraints(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<ConstraintResponse>, ApiError> {
    let session = state.store.get(&id)?;
    let body = read_body(&state, body)?;
    let constraints: ConstraintSet = serde_json::from_slice(&body)
        .map_err(|e| ApiError::BadRequest(format!("malformed constraint set: {e}")))?;
    let mut guard = session.write_owned().await;
    constraints
        .validate(guard.dataset.n_features())
        .map_err(ApiError::from)?;

    // Whoever flips `claimed` first decides: the worker commits its result,
    // or the handler gives up and the worker discards it.
    let claimed = Arc::new(AtomicBool::new(false));
    let task = {
        let claimed = Arc::clone(&claimed);
        let state = Arc::clone(&state);
        tokio::task::spawn_blocking(move || -> Result<ConstraintResponse, ApiError> {
            let constrained = if constraints.is_empty() {
                None
            } else {
                Some(guard.analysis.constrained(&guard.dataset, &constraints, &state.pool)?)
            };
            if claimed.swap(true, Ordering::SeqCst) {
                return Err(ApiError::Busy(state.config.compute_budget.as_secs()));
            }
            guard.constraints = constraints;
            guard.constrained = constrained;
            guard.updated = state.store.now();
            Ok(ConstraintResponse {
                constraints: guard.constraints.clone(),
                infeasible: false,
                results: guard.current_results(),
            })
        })
    };
    tokio::pin!(task);
    let joined = match tokio::time::timeout(state.config.compute_budget, &mut task).await {
        Ok(joined) => joined,
        Err(_) if !claimed.swap(true, Ordering::SeqCst) => {
            return Err(ApiError::Busy(state.config.compute_budget.as_secs()));
        }
        // The worker committed just as the budget ran out.
        Err(_) => task.await,
    };
    joined.map_err(|e| ApiError::Internal(e.to_string()))?.map(Json)
}

async fn delete_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    state.store.remove(&id)?;
    Ok(StatusCode::NO_CONTENT)
}
