//! Task decomposition and the agent pipeline.
//!
//! A request is planned into ordered [`SubtaskRecord`]s, either by the
//! deterministic [`plan`] or by an external [`PlannerBackend`]. Each subtask
//! then passes through the worker agents:
//!
//! | agent | produces |
//! |---|---|
//! | [`analysis_agent`] | [`ExtractedElements`] |
//! | [`code_agent`] | optimization fragment |
//! | [`assignment_agent`] | parameter bindings |
//! | [`visualization_agent`] | draw statements |
//! | [`validate_agent`] | [`Verdict`] with the blamed agent |
//! | [`format_agent`] | [`FinalScript`] |
//!
//! [`execute_plan`] drives them, chaining earlier fragments into the context
//! of later subtasks and regenerating a blamed fragment at most
//! [`MAX_RETRIES`] times.

mod backend;
mod pipeline;
mod planner;
mod registry;
mod workers;


use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use backend::{
    external_plan, parse_response, BackendError, BackendRequest, BackendResponse, MockBackend,
    PlannerBackend, SUBTASK_SCHEMA_VERSION,
};
pub use pipeline::{
    execute_plan, run_request, Fault, FaultInjector, NoFaults, PipelineConfig, PipelineError,
    PipelineResult, SubtaskOutcome, MAX_RETRIES,
};
pub use planner::{plan, PlanError};
pub use registry::{FunctionSpec, ParamKind, ParamSpec, Registry, RegistryError};
pub use workers::{
    analysis_agent, assignment_agent, code_agent, format_agent, validate_agent,
    visualization_agent, AgentError, Call, ExtractedElements, FinalScript, PipelineContext,
    ScalarInput, Sections, Verdict, SECTION_HEADERS,
};

/// Prefix of generated names for objects of `kind`.
pub(crate) fn kind_prefix(kind: &str) -> &'static str {
    match kind {
        "point" => "p",
        "point_pair" => "pp",
        "sphere" => "s",
        "plane" => "pl",
        "line" => "l",
        "circle" => "c",
        "vector" => "v",
        "versor" => "t",
        "scalar" => "k",
        _ => "m",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubtaskCategory {
    GeometryObjectCreation,
    FundamentalAlgebraicOperations,
    GeometricElementOperations,
    GeometricTransformation,
    NumericalOperations,
}

impl SubtaskCategory {
    pub const ALL: [SubtaskCategory; 5] = [
        SubtaskCategory::GeometryObjectCreation,
        SubtaskCategory::FundamentalAlgebraicOperations,
        SubtaskCategory::GeometricElementOperations,
        SubtaskCategory::GeometricTransformation,
        SubtaskCategory::NumericalOperations,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SubtaskCategory::GeometryObjectCreation => "Geometry Object Creation",
            SubtaskCategory::FundamentalAlgebraicOperations => "Fundamental Algebraic Operations",
            SubtaskCategory::GeometricElementOperations => "Geometric Element Operations",
            SubtaskCategory::GeometricTransformation => "Geometric Transformation",
            SubtaskCategory::NumericalOperations => "Numerical Operations",
        }
    }
}

/// The agents that produce or check script text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Analysis,
    Code,
    Assignment,
    Visualization,
    Validate,
    Format,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Analysis => "analysis_agent",
            AgentKind::Code => "code_agent",
            AgentKind::Assignment => "assignment_agent",
            AgentKind::Visualization => "visualization_agent",
            AgentKind::Validate => "validate_agent",
            AgentKind::Format => "format_agent",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisualizationSetting {
    pub variable: String,
    /// A color keyword or `rgb(r, g, b)`.
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtaskRecord {
    pub task_id: String,
    pub task_name: String,
    pub task_description: String,
    /// Variables the subtask produces, in call order.
    pub variable_names: Vec<String>,
    pub code_language: String,
    pub ga_type: String,
    /// Numeric inputs keyed `<first output>_<parameter>`.
    pub specific_values: BTreeMap<String, f64>,
    pub visualization: Vec<VisualizationSetting>,
    pub category: SubtaskCategory,
    pub depends_on: Vec<String>,
    /// Registry function applied once per entry of `operands`.
    pub operation: String,
    /// Object arguments of each call.
    pub operands: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Observation,
    Thoughts,
    Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub phase: Phase,
    pub text: String,
    /// Logical clock, incremented per step.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReActTrace {
    pub steps: Vec<TraceStep>,
}

impl ReActTrace {
    pub fn push(&mut self, phase: Phase, text: impl Into<String>) {
        let timestamp = self.steps.len() as u64;
        self.steps.push(TraceStep {
            phase,
            text: text.into(),
            timestamp,
        });
    }

    /// Appends one Observation, Thoughts, Action cycle.
    pub fn cycle(
        &mut self,
        observation: impl Into<String>,
        thoughts: impl Into<String>,
        action: impl Into<String>,
    ) {
        self.push(Phase::Observation, observation);
        self.push(Phase::Thoughts, thoughts);
        self.push(Phase::Action, action);
    }

    pub fn is_well_formed(&self) -> bool {
        const ORDER: [Phase; 3] = [Phase::Observation, Phase::Thoughts, Phase::Action];
        self.steps.len().is_multiple_of(3)
            && self
                .steps
                .iter()
                .enumerate()
                .all(|(i, s)| s.phase == ORDER[i % 3] && s.timestamp == i as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub description: String,
    #[serde(default)]
    pub formula: Option<String>,
    #[serde(default = "default_space")]
    pub space: String,
    #[serde(default = "default_language")]
    pub language: String,
}

fn default_space() -> String {
    "cga3d".into()
}

fn default_language() -> String {
    "python".into()
}

impl PlanRequest {
    pub fn new(description: impl Into<String>) -> Self {
        PlanRequest {
            description: description.into(),
            formula: None,
            space: default_space(),
            language: default_language(),
        }
    }

    pub fn with_formula(mut self, formula: impl Into<String>) -> Self {
        self.formula = Some(formula.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub source: PlanRequest,
    pub subtasks: Vec<SubtaskRecord>,
    pub trace: ReActTrace,
}

impl Plan {
    /// Structural checks shared by both planner paths.
    pub fn check(&self) -> Result<(), String> {
        if self.subtasks.is_empty() {
            return Err("plan has no subtasks".into());
        }
        let mut seen: Vec<&str> = Vec::new();
        for s in &self.subtasks {
            if seen.contains(&s.task_id.as_str()) {
                return Err(format!("duplicate task id {}", s.task_id));
            }
            if let Some(d) = s.depends_on.iter().find(|d| !seen.contains(&d.as_str())) {
                return Err(format!(
                    "{} depends on {d}, which is not an earlier task",
                    s.task_id
                ));
            }
            if let Some(v) = s
                .visualization
                .iter()
                .find(|v| !s.variable_names.contains(&v.variable))
            {
                return Err(format!(
                    "{} visualizes {}, which it does not produce",
                    s.task_id, v.variable
                ));
            }
            seen.push(&s.task_id);
        }
        Ok(())
    }

    /// Variables consumed by each subtask that no earlier subtask produces.
    pub fn unresolved_operands(&self) -> Vec<(String, String)> {
        let mut produced: Vec<&str> = Vec::new();
        let mut missing = Vec::new();
        for s in &self.subtasks {
            for name in s.operands.iter().flatten() {
                if !produced.contains(&name.as_str()) {
                    missing.push((s.task_id.clone(), name.clone()));
                }
            }
            produced.extend(s.variable_names.iter().map(String::as_str));
        }
        missing
    }
}
