use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Plan, PlanRequest, ReActTrace, SubtaskRecord, TraceStep};

pub const SUBTASK_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub description: String,
    pub formula: Option<String>,
    pub space: String,
    pub language: String,
    pub subtask_schema_version: String,
}

impl From<&PlanRequest> for BackendRequest {
    fn from(r: &PlanRequest) -> Self {
        BackendRequest {
            description: r.description.clone(),
            formula: r.formula.clone(),
            space: r.space.clone(),
            language: r.language.clone(),
            subtask_schema_version: SUBTASK_SCHEMA_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendResponse {
    pub subtasks: Vec<SubtaskRecord>,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("planner backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("planner response violates the schema at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("planner returned an unusable plan: {0}")]
    InvalidPlan(String),
}

/// Transport to an external planner. Returns the raw response body.
pub trait PlannerBackend {
    fn send(&self, request: &BackendRequest) -> Result<String, BackendError>;
}

/// Backend answering every request with a fixed body.
#[derive(Debug, Clone)]
pub struct MockBackend {
    reply: Result<String, BackendError>,
}

impl MockBackend {
    pub fn replying(body: impl Into<String>) -> Self {
        MockBackend {
            reply: Ok(body.into()),
        }
    }

    /// Replies with `plan` in wire form.
    pub fn from_plan(plan: &Plan) -> Self {
        let response = BackendResponse {
            subtasks: plan.subtasks.clone(),
            trace: plan.trace.steps.clone(),
        };
        Self::replying(serde_json::to_string(&response).expect("responses serialize"))
    }

    pub fn unavailable(reason: impl Into<String>) -> Self {
        MockBackend {
            reply: Err(BackendError::BackendUnavailable(reason.into())),
        }
    }
}

impl PlannerBackend for MockBackend {
    fn send(&self, _: &BackendRequest) -> Result<String, BackendError> {
        self.reply.clone()
    }
}

/// Parses a response body, reporting the path of the first bad field.
pub fn parse_response(body: &str) -> Result<BackendResponse, BackendError> {
    let de = &mut serde_json::Deserializer::from_str(body);
    serde_path_to_error::deserialize(de).map_err(|e| BackendError::SchemaViolation {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Plans through an external backend.
pub fn external_plan(
    request: &PlanRequest,
    backend: &dyn PlannerBackend,
) -> Result<Plan, BackendError> {
    let body = backend.send(&BackendRequest::from(request))?;
    let response = parse_response(&body)?;
    let plan = Plan {
        source: request.clone(),
        subtasks: response.subtasks,
        trace: ReActTrace {
            steps: response.trace,
        },
    };
    plan.check().map_err(BackendError::InvalidPlan)?;
    if let Some((task, name)) = plan.unresolved_operands().into_iter().next() {
        return Err(BackendError::InvalidPlan(format!(
            "{task} reads {name}, which no earlier subtask produces"
        )));
    }
    Ok(plan)
}
