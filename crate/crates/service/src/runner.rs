use std::time::Duration;

use gavis::agents::{
    self, execute_plan, external_plan, BackendError, BackendRequest, NoFaults, PipelineConfig,
    Plan, PlanRequest, PlannerBackend,
};
use gavis::script::Diagnostic;

use crate::compile::general_error;
use crate::record::{Failure, FailureKind, Success};

/// External planner reached over HTTP: the request is POSTed as JSON and
/// the response body is returned unparsed.
#[derive(Debug, Clone)]
pub struct HttpPlanner {
    pub url: String,
    pub timeout: Duration,
}

impl HttpPlanner {
    pub fn new(url: impl Into<String>) -> Self {
        HttpPlanner {
            url: url.into(),
            timeout: Duration::from_secs(60),
        }
    }
}

impl PlannerBackend for HttpPlanner {
    // The blocking client owns a runtime, so it is built per call on the
    // calling (blocking) thread rather than stored.
    fn send(&self, request: &BackendRequest) -> Result<String, BackendError> {
        let unavailable = |e: reqwest::Error| BackendError::BackendUnavailable(e.to_string());
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(unavailable)?;
        let response = client
            .post(&self.url)
            .json(request)
            .send()
            .map_err(unavailable)?;
        let status = response.status();
        if status.is_server_error() {
            return Err(BackendError::BackendUnavailable(format!(
                "planner answered {status}"
            )));
        }
        if !status.is_success() {
            return Err(BackendError::InvalidPlan(format!(
                "planner answered {status}"
            )));
        }
        response.text().map_err(unavailable)
    }
}

/// A failed run: the reason, the plan if one was made, and diagnostics.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub failure: Failure,
    pub plan: Option<Box<Plan>>,
    pub diagnostics: Vec<Diagnostic>,
}

fn planner_failure(e: BackendError) -> RunFailure {
    let kind = match e {
        BackendError::BackendUnavailable(_) => FailureKind::PlannerUnavailable,
        BackendError::SchemaViolation { .. } | BackendError::InvalidPlan(_) => {
            FailureKind::PlannerRejected
        }
    };
    let message = e.to_string();
    RunFailure {
        failure: Failure {
            kind,
            message: message.clone(),
        },
        plan: None,
        diagnostics: vec![general_error("A007", message)],
    }
}

/// Plans `request`, locally or through `planner`, and runs the agents.
pub fn run_task(
    request: &PlanRequest,
    config: &PipelineConfig,
    planner: Option<&dyn PlannerBackend>,
) -> Result<Success, RunFailure> {
    let plan = match planner {
        Some(backend) => external_plan(request, backend).map_err(planner_failure)?,
        None => agents::plan(request).map_err(|e| {
            let message = e.to_string();
            RunFailure {
                failure: Failure {
                    kind: FailureKind::Pipeline,
                    message: message.clone(),
                },
                plan: None,
                diagnostics: vec![general_error("A006", message)],
            }
        })?,
    };
    match execute_plan(&plan, config, &NoFaults) {
        Ok(result) => Ok(Success {
            plan: result.plan,
            script: result.script.text,
            code: result.code,
            scene: result.scene,
            warnings: result.warnings,
        }),
        Err(e) => {
            let failure = Failure {
                kind: FailureKind::Pipeline,
                message: e.to_string(),
            };
            Err(RunFailure {
                failure,
                plan: Some(Box::new(plan)),
                diagnostics: e.diagnostics().to_vec(),
            })
        }
    }
}
