use std::time::{SystemTime, UNIX_EPOCH};

use gavis::agents::{Plan, PlanRequest};
use gavis::codegen::Scene;
use gavis::script::Diagnostic;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Queued,
    Running,
    Succeeded,
    Failed,
}

impl TaskStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, TaskStatus::Succeeded | TaskStatus::Failed)
    }

    fn may_become(self, next: TaskStatus) -> bool {
        matches!(
            (self, next),
            (TaskStatus::Queued, TaskStatus::Running)
                | (TaskStatus::Running, TaskStatus::Succeeded)
                | (TaskStatus::Running, TaskStatus::Failed)
        )
    }
}

/// Why a task failed; selects the HTTP status of its result endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// The agents could not produce a valid script.
    Pipeline,
    /// The external planner could not be reached.
    PlannerUnavailable,
    /// The external planner answered with an unusable plan.
    PlannerRejected,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: String,
    pub request: PlanRequest,
    pub status: TaskStatus,
    pub plan: Option<Plan>,
    pub script: Option<String>,
    pub code: Option<String>,
    pub scene: Option<Scene>,
    pub diagnostics: Vec<Diagnostic>,
    pub failure: Option<Failure>,
    /// Milliseconds since the Unix epoch.
    pub created_at: u64,
    pub updated_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("task {id} cannot move from {from:?} to {to:?}")]
pub struct TransitionError {
    pub id: String,
    pub from: TaskStatus,
    pub to: TaskStatus,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Everything a successful run contributes to a record.
#[derive(Debug, Clone)]
pub struct Success {
    pub plan: Plan,
    pub script: String,
    pub code: String,
    pub scene: Scene,
    pub warnings: Vec<Diagnostic>,
}

impl TaskRecord {
    pub fn new(id: impl Into<String>, request: PlanRequest) -> Self {
        let now = now_ms();
        TaskRecord {
            id: id.into(),
            request,
            status: TaskStatus::Queued,
            plan: None,
            script: None,
            code: None,
            scene: None,
            diagnostics: Vec::new(),
            failure: None,
            created_at: now,
            updated_at: now,
        }
    }

    fn advance(&mut self, next: TaskStatus) -> Result<(), TransitionError> {
        if !self.status.may_become(next) {
            return Err(TransitionError {
                id: self.id.clone(),
                from: self.status,
                to: next,
            });
        }
        self.status = next;
        self.updated_at = now_ms().max(self.updated_at);
        Ok(())
    }

    pub fn start(&mut self) -> Result<(), TransitionError> {
        self.advance(TaskStatus::Running)
    }

    pub fn succeed(&mut self, success: Success) -> Result<(), TransitionError> {
        self.advance(TaskStatus::Succeeded)?;
        self.plan = Some(success.plan);
        self.script = Some(success.script);
        self.code = Some(success.code);
        self.scene = Some(success.scene);
        self.diagnostics = success.warnings;
        Ok(())
    }

    pub fn fail(
        &mut self,
        failure: Failure,
        plan: Option<Plan>,
        diagnostics: Vec<Diagnostic>,
    ) -> Result<(), TransitionError> {
        self.advance(TaskStatus::Failed)?;
        self.plan = plan;
        self.failure = Some(failure);
        self.diagnostics = diagnostics;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn success() -> Success {
        let request = PlanRequest::new("Create a point p1 (1, 2, 3)");
        let plan = gavis::agents::plan(&request).unwrap();
        Success {
            plan,
            script: String::new(),
            code: String::new(),
            scene: Scene::default(),
            warnings: vec![],
        }
    }

    #[test]
    fn status_only_moves_forward() {
        let mut r = TaskRecord::new("t", PlanRequest::new("x"));
        assert!(r.succeed(success()).is_err());
        r.start().unwrap();
        assert!(r.start().is_err());
        r.succeed(success()).unwrap();
        assert!(r.scene.is_some() && r.code.is_some());
        let failure = Failure {
            kind: FailureKind::Internal,
            message: String::new(),
        };
        assert!(r.fail(failure, None, vec![]).is_err());
        assert_eq!(r.status, TaskStatus::Succeeded);
    }

    #[test]
    fn failed_tasks_keep_their_reason() {
        let mut r = TaskRecord::new("t", PlanRequest::new("x"));
        r.start().unwrap();
        let failure = Failure {
            kind: FailureKind::PlannerUnavailable,
            message: "refused".into(),
        };
        r.fail(failure.clone(), None, vec![]).unwrap();
        assert_eq!(r.failure, Some(failure));
        assert!(r.status.is_terminal());
    }
}
