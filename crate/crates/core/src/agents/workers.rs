use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    kind_prefix, AgentKind, FunctionSpec, ParamKind, Registry, SubtaskCategory, SubtaskRecord,
    VisualizationSetting,
};
use crate::script::{
    self, lex, parse_source, pretty_print, Diagnostic, Span, TokenKind, COLOR_NAMES,
};

/// Section headers of an assembled script.
pub const SECTION_HEADERS: [&str; 3] = [
    "// --- optimization code ---",
    "// --- assignments ---",
    "// --- visualization ---",
];

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum AgentError {
    #[error("{task}: no value for {name}")]
    MissingValue { task: String, name: String },
    #[error("{task}: no registry function {operation} in {category:?}")]
    NoMatchingFunction {
        task: String,
        operation: String,
        category: SubtaskCategory,
    },
    #[error("{task}: unknown color {color}")]
    UnknownColor { task: String, color: String },
    #[error("{task}: {message}")]
    Malformed { task: String, message: String },
}

impl AgentError {
    pub fn code(&self) -> &'static str {
        match self {
            AgentError::MissingValue { .. } => "A001",
            AgentError::NoMatchingFunction { .. } => "A002",
            AgentError::UnknownColor { .. } => "A003",
            AgentError::Malformed { .. } => "A004",
        }
    }

    pub fn agent(&self) -> AgentKind {
        match self {
            AgentError::MissingValue { .. } | AgentError::Malformed { .. } => AgentKind::Analysis,
            AgentError::NoMatchingFunction { .. } => AgentKind::Code,
            AgentError::UnknownColor { .. } => AgentKind::Visualization,
        }
    }

    pub fn diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.code(), self.to_string(), Span::default())
    }
}

/// Variables and script text produced by earlier subtasks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineContext {
    pub variables: Vec<String>,
    pub sections: Sections,
    reserved: BTreeSet<String>,
    counters: BTreeMap<String, usize>,
}

impl PipelineContext {
    /// A context whose generated names avoid every name in `reserved`.
    pub fn new<I: IntoIterator<Item = String>>(reserved: I) -> Self {
        PipelineContext {
            reserved: reserved.into_iter().collect(),
            ..Default::default()
        }
    }

    /// Next `<kind prefix><counter>` name not used anywhere in the run.
    pub fn fresh(&mut self, kind: &str) -> String {
        let prefix = kind_prefix(kind);
        let n = self.counters.entry(prefix.to_string()).or_insert(0);
        loop {
            *n += 1;
            let name = format!("{prefix}{n}");
            if self.reserved.insert(name.clone()) {
                return name;
            }
        }
    }

    pub fn knows(&self, name: &str) -> bool {
        self.variables.iter().any(|v| v == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarInput {
    pub param: String,
    pub variable: String,
    pub value: f64,
}

/// One application of a registry function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Call {
    pub outputs: Vec<String>,
    pub objects: Vec<String>,
    pub scalars: Vec<ScalarInput>,
    pub temps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedElements {
    pub task_id: String,
    pub category: SubtaskCategory,
    pub operation: String,
    pub object_kind: String,
    pub calls: Vec<Call>,
    /// Context variables the subtask reads.
    pub referenced: Vec<String>,
    pub values: BTreeMap<String, f64>,
    pub visualization: Vec<VisualizationSetting>,
}

impl ExtractedElements {
    pub fn outputs(&self) -> Vec<String> {
        self.calls
            .iter()
            .flat_map(|c| c.outputs.iter().cloned())
            .collect()
    }

    /// Names the subtask assigns: outputs and temporaries.
    pub fn defined(&self) -> Vec<String> {
        self.calls
            .iter()
            .flat_map(|c| c.temps.iter().chain(&c.outputs).cloned())
            .collect()
    }
}

/// Structures a subtask: resolves its calls against the registry, checks
/// that every object it reads exists, and names anonymous temporaries.
pub fn analysis_agent(
    subtask: &SubtaskRecord,
    context: &mut PipelineContext,
    registry: &Registry,
) -> Result<ExtractedElements, AgentError> {
    let task = subtask.task_id.clone();
    let spec = lookup(subtask, registry)?;
    let outs = spec.output_count();
    let malformed = |message: String| AgentError::Malformed {
        task: task.clone(),
        message,
    };
    let call_count = if subtask.operands.is_empty() {
        subtask.variable_names.len() / outs
    } else {
        subtask.operands.len()
    };
    if call_count == 0 || subtask.variable_names.len() != call_count * outs {
        return Err(malformed(format!(
            "{} expects {outs} variable name(s) per call, got {}",
            spec.name,
            subtask.variable_names.len()
        )));
    }

    let mut calls = Vec::new();
    let mut referenced: Vec<String> = Vec::new();
    let mut values = BTreeMap::new();
    for i in 0..call_count {
        let outputs = subtask.variable_names[i * outs..(i + 1) * outs].to_vec();
        let objects = subtask.operands.get(i).cloned().unwrap_or_default();
        if objects.len() != spec.object_count() {
            return Err(malformed(format!(
                "{} takes {} object(s), got {}",
                spec.name,
                spec.object_count(),
                objects.len()
            )));
        }
        for o in &objects {
            let local = calls.iter().any(|c: &Call| c.outputs.contains(o));
            if !local && !context.knows(o) {
                return Err(AgentError::MissingValue {
                    task: task.clone(),
                    name: o.clone(),
                });
            }
            if !local && !referenced.contains(o) {
                referenced.push(o.clone());
            }
        }
        let mut scalars = Vec::new();
        for p in spec.params_of(ParamKind::Scalar) {
            let variable = format!("{}_{}", outputs[0], p.name);
            let value = subtask
                .specific_values
                .get(&variable)
                .or_else(|| {
                    (call_count == 1)
                        .then(|| subtask.specific_values.get(&p.name))
                        .flatten()
                })
                .copied()
                .ok_or_else(|| AgentError::MissingValue {
                    task: task.clone(),
                    name: variable.clone(),
                })?;
            values.insert(variable.clone(), value);
            scalars.push(ScalarInput {
                param: p.name.clone(),
                variable,
                value,
            });
        }
        let temps = spec
            .params_of(ParamKind::Temp)
            .map(|p| context.fresh(&p.semantic_type))
            .collect();
        calls.push(Call {
            outputs,
            objects,
            scalars,
            temps,
        });
    }
    Ok(ExtractedElements {
        task_id: task,
        category: spec.category,
        operation: spec.name.clone(),
        object_kind: spec.returns.clone(),
        calls,
        referenced,
        values,
        visualization: subtask.visualization.clone(),
    })
}

fn lookup<'r>(
    subtask: &SubtaskRecord,
    registry: &'r Registry,
) -> Result<&'r FunctionSpec, AgentError> {
    registry
        .find(subtask.category, &subtask.operation)
        .ok_or_else(|| AgentError::NoMatchingFunction {
            task: subtask.task_id.clone(),
            operation: subtask.operation.clone(),
            category: subtask.category,
        })
}

/// Expands the registry template once per call.
pub fn code_agent(elements: &ExtractedElements, registry: &Registry) -> Result<String, AgentError> {
    let spec = registry
        .find(elements.category, &elements.operation)
        .ok_or_else(|| AgentError::NoMatchingFunction {
            task: elements.task_id.clone(),
            operation: elements.operation.clone(),
            category: elements.category,
        })?;
    let mut out = String::new();
    for call in &elements.calls {
        let mut bound: HashMap<&str, &str> = HashMap::new();
        let mut outputs = call.outputs.iter();
        let mut objects = call.objects.iter();
        let mut temps = call.temps.iter();
        for p in &spec.parameters {
            let value = match p.kind {
                ParamKind::Output => outputs.next(),
                ParamKind::Object => objects.next(),
                ParamKind::Temp => temps.next(),
                ParamKind::Scalar => call
                    .scalars
                    .iter()
                    .find(|s| s.param == p.name)
                    .map(|s| &s.variable),
            };
            if let Some(v) = value {
                bound.insert(&p.name, v);
            }
        }
        let mut text = spec.template.clone();
        for name in spec.placeholders() {
            let value = bound
                .get(name.as_str())
                .ok_or_else(|| AgentError::Malformed {
                    task: elements.task_id.clone(),
                    message: format!("nothing bound to {{{name}}}"),
                })?;
            text = text.replace(&format!("{{{name}}}"), value);
        }
        out.push_str(&text);
        out.push('\n');
    }
    Ok(out)
}

/// Identifiers read by `fragment` that nothing defines: its parameters.
fn free_inputs(fragment: &str, elements: &ExtractedElements) -> Vec<String> {
    let Ok(tokens) = lex(fragment) else {
        return Vec::new();
    };
    let defined = elements.defined();
    let mut free = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        let call = tokens
            .get(i + 1)
            .is_some_and(|n| n.kind == TokenKind::LParen);
        let assigned = tokens
            .get(i + 1)
            .is_some_and(|n| n.kind == TokenKind::Equals);
        if t.kind != TokenKind::Ident
            || call
            || assigned
            || script::BasisVec::from_name(&t.lexeme).is_some()
        {
            continue;
        }
        let name = &t.lexeme;
        if !defined.contains(name) && !elements.referenced.contains(name) && !free.contains(name) {
            free.push(name.clone());
        }
    }
    free
}

/// Binds every free input of the code fragment to its extracted value.
pub fn assignment_agent(
    elements: &ExtractedElements,
    fragment: &str,
) -> Result<String, AgentError> {
    let mut out = String::new();
    for name in free_inputs(fragment, elements) {
        let value = elements
            .values
            .get(&name)
            .ok_or_else(|| AgentError::MissingValue {
                task: elements.task_id.clone(),
                name: name.clone(),
            })?;
        out.push_str(&format!("{name} = {value};\n"));
    }
    Ok(out)
}

/// Canonical color text, or `None` when the color is not drawable.
pub(crate) fn color_text(color: &str) -> Option<String> {
    let c = color.trim().to_ascii_lowercase();
    if COLOR_NAMES.contains(&c.as_str()) {
        return Some(c);
    }
    let inner = c
        .strip_prefix("rgb")?
        .trim()
        .strip_prefix('(')?
        .strip_suffix(')')?;
    let parts: Vec<f64> = inner
        .split(',')
        .map(|p| p.trim().parse::<f64>().ok())
        .collect::<Option<_>>()?;
    match parts.as_slice() {
        [r, g, b] if parts.iter().all(|v| (0.0..=1.0).contains(v)) => {
            Some(format!("rgb({r}, {g}, {b})"))
        }
        _ => None,
    }
}

/// One draw statement per requested visualization. `template` holds the
/// `{name}` and `{color}` placeholders.
pub fn visualization_agent(
    elements: &ExtractedElements,
    template: &str,
) -> Result<String, AgentError> {
    let mut out = String::new();
    for v in &elements.visualization {
        let color = color_text(&v.color).ok_or_else(|| AgentError::UnknownColor {
            task: elements.task_id.clone(),
            color: v.color.clone(),
        })?;
        out.push_str(
            &template
                .replace("{name}", &v.variable)
                .replace("{color}", &color),
        );
        out.push('\n');
    }
    Ok(out)
}

/// The three section bodies, one statement per line.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sections {
    pub optimization: Vec<String>,
    pub assignments: Vec<String>,
    pub draws: Vec<String>,
}

fn lines(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect()
}

impl Sections {
    pub fn from_fragments(code: &str, assignments: &str, draws: &str) -> Self {
        Sections {
            optimization: lines(code),
            assignments: lines(assignments),
            draws: lines(draws),
        }
    }

    pub fn extend(&mut self, other: &Sections) {
        self.optimization.extend(other.optimization.iter().cloned());
        self.assignments.extend(other.assignments.iter().cloned());
        self.draws.extend(other.draws.iter().cloned());
    }

    /// Script text with section headers. The visualization header is
    /// omitted when there are no draws.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let parts = [
            (&self.optimization, true),
            (&self.assignments, true),
            (&self.draws, !self.draws.is_empty()),
        ];
        for (i, (body, keep)) in parts.into_iter().enumerate() {
            if !keep {
                continue;
            }
            out.push_str(SECTION_HEADERS[i]);
            out.push('\n');
            for l in body {
                out.push_str(l);
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub blamed: Vec<AgentKind>,
}

/// Lexes, parses and validates an assembled script. Each error is blamed on
/// the agent that owns the section containing its span.
pub fn validate_agent(script: &str) -> Verdict {
    let diagnostics: Vec<Diagnostic> = script::check(script)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    let owners = [
        AgentKind::Code,
        AgentKind::Assignment,
        AgentKind::Visualization,
    ];
    let mut section_of_line = Vec::new();
    let mut current = 0;
    for line in script.lines() {
        if let Some(i) = SECTION_HEADERS.iter().position(|h| line.trim() == *h) {
            current = i;
        }
        section_of_line.push(current);
    }
    let mut blamed = Vec::new();
    for d in &diagnostics {
        let mut line = (d.span.line as usize).saturating_sub(1);
        if d.code.starts_with('P') {
            // A syntax error surfaces at the next token; blame the statement it interrupts.
            let before = script.get(..d.span.offset).unwrap_or(script);
            let significant = |l: &str| !l.trim().is_empty() && !l.trim_start().starts_with("//");
            if let Some(i) = before
                .split('\n')
                .collect::<Vec<_>>()
                .iter()
                .rposition(|l| significant(l))
            {
                line = i;
            }
        }
        let section = section_of_line.get(line).copied().unwrap_or(current);
        if !blamed.contains(&owners[section]) {
            blamed.push(owners[section]);
        }
    }
    Verdict {
        ok: diagnostics.is_empty(),
        diagnostics,
        blamed,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalScript {
    pub optimization: Vec<String>,
    pub assignments: Vec<String>,
    pub draws: Vec<String>,
    pub text: String,
}

/// Concatenates validated sections in order and pretty-prints the result.
pub fn format_agent(sections: &Sections) -> FinalScript {
    let raw = sections.render();
    let text = parse_source(&raw).map(|s| pretty_print(&s)).unwrap_or(raw);
    FinalScript {
        optimization: sections.optimization.clone(),
        assignments: sections.assignments.clone(),
        draws: sections.draws.clone(),
        text,
    }
}
