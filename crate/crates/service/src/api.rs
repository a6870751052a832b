//! The HTTP interface.
//!
//! Tasks run in the background; clients poll `GET /api/tasks/{id}` until the
//! status is `succeeded` or `failed`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gavis::agents::{PipelineConfig, PlanRequest, PlannerBackend};
use gavis::algebra::Signature;
use gavis::script::Diagnostic;
use gavis::symbolic::EmissionStyle;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tracing::{error, info};

use crate::compile::{compile_script, CompileFailure, CompileRequest};
use crate::record::{Failure, FailureKind, TaskRecord, TaskStatus};
use crate::runner::run_task;
use crate::store::TaskStore;

pub type SharedPlanner = Arc<dyn PlannerBackend + Send + Sync>;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<TaskStore>,
    pub pipeline: Arc<PipelineConfig>,
    pub planner: Option<SharedPlanner>,
}

impl AppState {
    pub fn new(store: TaskStore, pipeline: PipelineConfig, planner: Option<SharedPlanner>) -> Self {
        AppState {
            store: Arc::new(store),
            pipeline: Arc::new(pipeline),
            planner,
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/registry", get(registry))
        .route("/api/compile", post(compile))
        .route("/api/tasks", post(create_task).get(list_tasks))
        .route("/api/tasks/{id}", get(get_task))
        .route("/api/tasks/{id}/scene", get(get_scene))
        .route("/api/tasks/{id}/code", get(get_code))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "no such endpoint") })
        .with_state(state)
}

/// Error body: `{"error": ..., "diagnostics": [...]}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    diagnostics: Vec<Diagnostic>,
    task_status: Option<TaskStatus>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
            diagnostics: Vec::new(),
            task_status: None,
        }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        error!(error = %e, "request failed");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.message, "diagnostics": self.diagnostics });
        if let Some(status) = self.task_status {
            body["status"] = json!(status);
        }
        (self.status, Json(body)).into_response()
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("invalid request body: {e}"),
        )
    })
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "ok": true }))
}

async fn registry(State(state): State<AppState>) -> Response {
    Json(state.pipeline.registry.functions()).into_response()
}

async fn compile(body: Bytes) -> Result<Json<crate::compile::CompileResponse>, ApiError> {
    let request: CompileRequest = parse_body(&body)?;
    match compile_script(&request) {
        Ok(response) => Ok(Json(response)),
        Err(CompileFailure::Request(e)) => {
            Err(ApiError::new(StatusCode::BAD_REQUEST, e.to_string()))
        }
        Err(CompileFailure::Diagnostics(diagnostics)) => Err(ApiError {
            diagnostics,
            ..ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "script rejected")
        }),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskRequest {
    description: String,
    #[serde(default)]
    formula: Option<String>,
    #[serde(default)]
    space: Option<String>,
    #[serde(default)]
    language: Option<String>,
}

impl TaskRequest {
    fn into_plan_request(self) -> Result<PlanRequest, ApiError> {
        let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, m);
        if self.description.trim().is_empty() {
            return Err(bad("description is empty".into()));
        }
        let mut request = PlanRequest::new(self.description);
        request.formula = self.formula.filter(|f| !f.trim().is_empty());
        if let Some(space) = self.space {
            Signature::from_name(&space).map_err(|_| bad(format!("unknown space {space}")))?;
            request.space = space;
        }
        if let Some(language) = self.language {
            EmissionStyle::from_name(&language)
                .ok_or_else(|| bad(format!("unknown language {language}")))?;
            request.language = language;
        }
        Ok(request)
    }
}

#[derive(Debug, Serialize)]
struct Created {
    id: String,
    status: TaskStatus,
}

async fn create_task(
    State(state): State<AppState>,
    body: Bytes,
) -> Result<Json<Created>, ApiError> {
    let request = parse_body::<TaskRequest>(&body)?.into_plan_request()?;
    let record = TaskRecord::new(uuid::Uuid::new_v4().to_string(), request);
    state.store.save(&record).map_err(ApiError::internal)?;
    let created = Created {
        id: record.id.clone(),
        status: record.status,
    };
    info!(task = %record.id, "task queued");
    tokio::spawn(execute(state, record));
    Ok(Json(created))
}

async fn execute(state: AppState, mut record: TaskRecord) {
    let id = record.id.clone();
    if let Err(e) = record.start() {
        error!(task = %id, error = %e, "cannot start task");
        return;
    }
    if let Err(e) = state.store.save(&record) {
        error!(task = %id, error = %e, "cannot persist task");
    }
    let request = record.request.clone();
    let (pipeline, planner) = (state.pipeline.clone(), state.planner.clone());
    let outcome = tokio::task::spawn_blocking(move || {
        run_task(
            &request,
            &pipeline,
            planner.as_deref().map(|p| p as &dyn PlannerBackend),
        )
    })
    .await;
    let transition = match outcome {
        Ok(Ok(success)) => record.succeed(success),
        Ok(Err(f)) => record.fail(f.failure, f.plan.map(|p| *p), f.diagnostics),
        Err(join) => {
            let failure = Failure {
                kind: FailureKind::Internal,
                message: join.to_string(),
            };
            record.fail(failure, None, Vec::new())
        }
    };
    if let Err(e) = transition {
        error!(task = %id, error = %e, "invalid task transition");
        return;
    }
    info!(task = %id, status = ?record.status, "task finished");
    if let Err(e) = state.store.save(&record) {
        error!(task = %id, error = %e, "cannot persist task");
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    id: String,
    status: TaskStatus,
    description: String,
    created_at: u64,
    updated_at: u64,
}

async fn list_tasks(State(state): State<AppState>) -> Result<Json<Vec<Summary>>, ApiError> {
    let records = state.store.list().map_err(ApiError::internal)?;
    Ok(Json(
        records
            .into_iter()
            .map(|r| Summary {
                id: r.id,
                status: r.status,
                description: r.request.description,
                created_at: r.created_at,
                updated_at: r.updated_at,
            })
            .collect(),
    ))
}

fn load(state: &AppState, id: &str) -> Result<TaskRecord, ApiError> {
    state
        .store
        .load(id)
        .map_err(ApiError::internal)?
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown task {id}")))
}

async fn get_task(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<TaskRecord>, ApiError> {
    load(&state, &id).map(Json)
}

/// The record if it succeeded; otherwise the error its result endpoints
/// answer with.
fn finished(state: &AppState, id: &str) -> Result<TaskRecord, ApiError> {
    let record = load(state, id)?;
    match (&record.status, &record.failure) {
        (TaskStatus::Succeeded, _) => Ok(record),
        (TaskStatus::Failed, Some(failure)) => {
            let status = match failure.kind {
                FailureKind::Pipeline | FailureKind::PlannerRejected => {
                    StatusCode::UNPROCESSABLE_ENTITY
                }
                FailureKind::PlannerUnavailable => StatusCode::SERVICE_UNAVAILABLE,
                FailureKind::Internal => StatusCode::INTERNAL_SERVER_ERROR,
            };
            Err(ApiError {
                diagnostics: record.diagnostics,
                task_status: Some(record.status),
                ..ApiError::new(status, failure.message.clone())
            })
        }
        (status, _) => Err(ApiError {
            task_status: Some(*status),
            ..ApiError::new(StatusCode::CONFLICT, format!("task {id} has not finished"))
        }),
    }
}

async fn get_scene(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let record = finished(&state, &id)?;
    Ok(Json(record.scene.unwrap_or_default()).into_response())
}

async fn get_code(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let record = finished(&state, &id)?;
    let content_type = match EmissionStyle::from_name(&record.request.language) {
        Some(EmissionStyle::JsonIr) => "application/json",
        _ => "text/plain; charset=utf-8",
    };
    Ok((
        [(header::CONTENT_TYPE, content_type)],
        record.code.unwrap_or_default(),
    )
        .into_response())
}
