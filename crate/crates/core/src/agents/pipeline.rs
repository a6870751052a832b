use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    analysis_agent, assignment_agent, code_agent, format_agent, plan, validate_agent,
    visualization_agent, AgentKind, ExtractedElements, FinalScript, PipelineContext, Plan,
    PlanRequest, ReActTrace, Registry, Sections,
};
use crate::algebra::Signature;
use crate::codegen::{self, emit_code, AssignmentSection, BladeProgram, Scene};
use crate::script::{parse_source, Diagnostic, Span};
use crate::symbolic::EmissionStyle;

/// Regenerations allowed per subtask after the first attempt.
pub const MAX_RETRIES: usize = 2;

/// Corrupts agent output; used to exercise the regenerate loop.
pub trait FaultInjector {
    /// May rewrite `fragment`, produced by `agent` for `task_id` on attempt
    /// `attempt` (0 is the first).
    fn inject(&self, agent: AgentKind, task_id: &str, attempt: usize, fragment: &mut String);
}

pub struct NoFaults;

impl FaultInjector for NoFaults {
    fn inject(&self, _: AgentKind, _: &str, _: usize, _: &mut String) {}
}

/// Replaces one agent's fragment with fixed text on the first `attempts`
/// attempts of matching subtasks.
#[derive(Debug, Clone)]
pub struct Fault {
    pub agent: AgentKind,
    /// `None` matches every subtask.
    pub task_id: Option<String>,
    pub attempts: usize,
    pub text: String,
}

impl FaultInjector for Fault {
    fn inject(&self, agent: AgentKind, task_id: &str, attempt: usize, fragment: &mut String) {
        if agent == self.agent
            && attempt < self.attempts
            && self.task_id.as_deref().is_none_or(|t| t == task_id)
        {
            *fragment = self.text.clone();
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub max_retries: usize,
    /// Feed earlier subtasks' script text into later validations.
    pub chaining: bool,
    /// Draw statement template with `{name}` and `{color}` placeholders.
    pub draw_template: String,
    pub registry: Registry,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_retries: MAX_RETRIES,
            chaining: true,
            draw_template: ":{name} {color};".into(),
            registry: Registry::bundled(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum PipelineError {
    #[error("subtask {subtask_id} failed after {retries_used} retries: {}", first_message(.diagnostics))]
    PipelineFailed {
        subtask_id: String,
        diagnostics: Vec<Diagnostic>,
        retries_used: usize,
        blamed: Vec<AgentKind>,
    },
}

fn first_message(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .first()
        .map_or_else(String::new, |d| format!("{} {}", d.code, d.message))
}

impl PipelineError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        let PipelineError::PipelineFailed { diagnostics, .. } = self;
        diagnostics
    }

    fn at(subtask_id: &str, diagnostics: Vec<Diagnostic>, blamed: Vec<AgentKind>) -> Self {
        PipelineError::PipelineFailed {
            subtask_id: subtask_id.to_string(),
            diagnostics,
            retries_used: 0,
            blamed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtaskOutcome {
    pub task_id: String,
    pub elements: ExtractedElements,
    pub sections: Sections,
    pub attempts: usize,
    pub invocations: BTreeMap<AgentKind, usize>,
    /// Diagnostics of rejected attempts.
    pub rejected: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub plan: Plan,
    pub script: FinalScript,
    pub program: BladeProgram,
    pub assignment: AssignmentSection,
    pub language: EmissionStyle,
    pub code: String,
    pub scene: Scene,
    /// Coefficients of every output, keyed by blade name.
    pub outputs: BTreeMap<String, BTreeMap<String, f64>>,
    pub trace: ReActTrace,
    pub subtasks: Vec<SubtaskOutcome>,
    pub warnings: Vec<Diagnostic>,
}

fn plan_diagnostic(message: String) -> Diagnostic {
    Diagnostic::error("A005", message, Span::default())
}

struct Attempt<'a> {
    config: &'a PipelineConfig,
    faults: &'a dyn FaultInjector,
    task_id: &'a str,
    invocations: BTreeMap<AgentKind, usize>,
}

impl Attempt<'_> {
    fn produce(
        &mut self,
        agent: AgentKind,
        attempt: usize,
        make: impl FnOnce() -> Result<String, super::AgentError>,
    ) -> Result<String, PipelineError> {
        *self.invocations.entry(agent).or_insert(0) += 1;
        let mut text = make()
            .map_err(|e| PipelineError::at(self.task_id, vec![e.diagnostic()], vec![e.agent()]))?;
        self.faults.inject(agent, self.task_id, attempt, &mut text);
        Ok(text)
    }
}

/// Runs every subtask through the agents, then compiles, runs and decodes
/// the assembled script.
pub fn execute_plan(
    plan: &Plan,
    config: &PipelineConfig,
    faults: &dyn FaultInjector,
) -> Result<PipelineResult, PipelineError> {
    plan.check()
        .map_err(|m| PipelineError::at("plan", vec![plan_diagnostic(m)], vec![]))?;
    let space_name = &plan.subtasks[0].ga_type;
    let space = Signature::from_name(space_name)
        .map_err(|e| PipelineError::at("plan", vec![plan_diagnostic(e.to_string())], vec![]))?;
    let language = EmissionStyle::from_name(&plan.subtasks[0].code_language).ok_or_else(|| {
        let m = format!(
            "unsupported code language {}",
            plan.subtasks[0].code_language
        );
        PipelineError::at("plan", vec![plan_diagnostic(m)], vec![])
    })?;

    let reserved = plan
        .subtasks
        .iter()
        .flat_map(|s| s.variable_names.iter().cloned());
    let mut context = PipelineContext::new(reserved);
    let mut trace = plan.trace.clone();
    let mut outcomes = Vec::new();
    let registry = &config.registry;

    for subtask in &plan.subtasks {
        let id = subtask.task_id.as_str();
        let elements = analysis_agent(subtask, &mut context, registry)
            .map_err(|e| PipelineError::at(id, vec![e.diagnostic()], vec![AgentKind::Analysis]))?;
        let mut run = Attempt {
            config,
            faults,
            task_id: id,
            invocations: BTreeMap::new(),
        };
        run.invocations.insert(AgentKind::Analysis, 1);

        let (mut code, mut assignments, mut draws) = (String::new(), String::new(), String::new());
        let mut regenerate = vec![
            AgentKind::Code,
            AgentKind::Assignment,
            AgentKind::Visualization,
        ];
        let mut rejected: Vec<Diagnostic> = Vec::new();
        let mut attempts = 0;
        loop {
            let attempt = attempts;
            attempts += 1;
            if regenerate.contains(&AgentKind::Code) {
                code = run.produce(AgentKind::Code, attempt, || code_agent(&elements, registry))?;
                if !regenerate.contains(&AgentKind::Assignment) {
                    regenerate.push(AgentKind::Assignment);
                }
            }
            if regenerate.contains(&AgentKind::Assignment) {
                assignments = run.produce(AgentKind::Assignment, attempt, || {
                    assignment_agent(&elements, &code)
                })?;
            }
            if regenerate.contains(&AgentKind::Visualization) {
                let template = run.config.draw_template.clone();
                draws = run.produce(AgentKind::Visualization, attempt, || {
                    visualization_agent(&elements, &template)
                })?;
            }
            let current = Sections::from_fragments(&code, &assignments, &draws);
            let mut assembled = if config.chaining {
                context.sections.clone()
            } else {
                Sections::default()
            };
            assembled.extend(&current);
            *run.invocations.entry(AgentKind::Validate).or_insert(0) += 1;
            let verdict = validate_agent(&assembled.render());
            if verdict.ok {
                let mut observation = format!("{id} validated after {attempts} attempt(s).");
                if !rejected.is_empty() {
                    observation.push_str(&format!(" Rejected: {}.", first_message(&rejected)));
                }
                trace.cycle(
                    observation,
                    format!("{} joins the context.", elements.defined().join(", ")),
                    format!(
                        "{id} appended {} statement(s).",
                        current.optimization.len()
                            + current.assignments.len()
                            + current.draws.len()
                    ),
                );
                context.variables.extend(elements.defined());
                context.sections.extend(&current);
                outcomes.push(SubtaskOutcome {
                    task_id: id.to_string(),
                    elements,
                    sections: current,
                    attempts,
                    invocations: run.invocations,
                    rejected,
                });
                break;
            }
            rejected.extend(verdict.diagnostics.iter().cloned());
            if attempt >= config.max_retries {
                return Err(PipelineError::PipelineFailed {
                    subtask_id: id.to_string(),
                    diagnostics: verdict.diagnostics,
                    retries_used: attempt,
                    blamed: verdict.blamed,
                });
            }
            regenerate = verdict.blamed;
        }
    }

    let script = format_agent(&context.sections);
    let finish = |diagnostics: Vec<Diagnostic>| PipelineError::at("final", diagnostics, vec![]);
    let ast = parse_source(&script.text).map_err(finish)?;
    let program = codegen::compile(&ast, space).map_err(|e| finish(e.diagnostics()))?;
    let assignment = program.default_assignment();
    let results = codegen::run(&program, &assignment).map_err(|e| finish(e.diagnostics()))?;
    let (scene, scene_warnings) = codegen::scene_of(&program, &results);
    let code = emit_code(&program, &assignment, language);
    let outputs = results
        .iter()
        .map(|(name, mv)| {
            (
                name.clone(),
                mv.terms().map(|(b, c)| (b.to_string(), *c)).collect(),
            )
        })
        .collect();
    let mut warnings = program.warnings.clone();
    warnings.extend(scene_warnings);
    Ok(PipelineResult {
        plan: plan.clone(),
        script,
        program,
        assignment,
        language,
        code,
        scene,
        outputs,
        trace,
        subtasks: outcomes,
        warnings,
    })
}

/// Plans a request deterministically and executes it.
pub fn run_request(
    request: &PlanRequest,
    config: &PipelineConfig,
) -> Result<PipelineResult, PipelineError> {
    let plan = plan(request).map_err(|e| {
        PipelineError::at(
            "plan",
            vec![Diagnostic::error("A006", e.to_string(), Span::default())],
            vec![],
        )
    })?;
    execute_plan(&plan, config, &NoFaults)
}
