//! Compilation of scripts to straight-line per-blade code.
//!
//! [`compile`] evaluates a validated script over symbolic coefficients. Every
//! assigned variable becomes one scalar step per surviving blade, named
//! `<variable>_<blade bitmask>`. [`bind`] fixes parameter values,
//! [`emit_code`] renders the three-section program, [`run`] evaluates it and
//! [`scene_of`] decodes the drawn results. [`interpret`] evaluates a script
//! directly over numbers and serves as the reference semantics.

mod emit;
mod eval;
mod probe;
mod scene;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Blade, Multivector, Signature, ZERO_TOL};
use crate::script::{self, Diagnostic, Script, Span, StmtKind};
use crate::symbolic::{checked_sqrt, ScalarExpr};

pub use emit::{emit_code, IrProgram, IrStep, PYTHON_SECTIONS};
pub use probe::{PROBE_SAMPLES, PROBE_TOL};
pub use scene::{scene_of, Rgb, Scene, SceneObject, SceneParams, XYZ};

use eval::{eval, Domain};
use probe::Probe;

/// Why evaluating an expression failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Failure {
    #[error("divisor does not square to a scalar")]
    SymbolicDivisionByNonScalar,
    #[error("value is not invertible")]
    NotInvertible,
    #[error("cannot normalize a value of zero norm")]
    ZeroNorm,
    #[error("{0} expects scalar arguments")]
    ExpectedScalar(&'static str),
    #[error("{0} requires the conformal algebra cga3d")]
    RequiresConformal(&'static str),
    #[error("{0} is not a basis vector of this algebra")]
    BasisOutOfRange(&'static str),
    #[error("unknown function {0}")]
    UnknownFunction(String),
    #[error("undefined identifier {0}")]
    Undefined(String),
    #[error("missing input {0}")]
    MissingInput(String),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("{0}")]
    Domain(String),
    #[error("temporary {0} collides with another name")]
    NameCollision(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl Failure {
    pub fn code(&self) -> &'static str {
        match self {
            Failure::SymbolicDivisionByNonScalar => "C001",
            Failure::NotInvertible => "C002",
            Failure::ZeroNorm => "C003",
            Failure::ExpectedScalar(_) => "C004",
            Failure::RequiresConformal(_) => "C005",
            Failure::BasisOutOfRange(_) => "C006",
            Failure::UnknownFunction(_) => "C007",
            Failure::Undefined(_) => "C008",
            Failure::MissingInput(_) => "C009",
            Failure::Degenerate(_) => "C010",
            Failure::Domain(_) => "C011",
            Failure::NameCollision(_) => "C012",
            Failure::Algebra(_) => "C013",
        }
    }
}

/// Warning codes attached to programs and scenes.
pub mod warnings {
    pub const EMPTY_OUTPUT: &str = "W001";
    pub const PROBE_FAILED: &str = "W002";
    pub const EXTRA_INPUT: &str = "W003";
    pub const UNCLASSIFIABLE_DRAW: &str = "W004";
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodegenError {
    #[error("script has {} error(s)", .0.len())]
    InvalidScript(Vec<Diagnostic>),
    #[error("{failure} (at {span})")]
    Eval { failure: Failure, span: Span },
    #[error("missing input {0}")]
    MissingInput(String),
    #[error("step {step}: {message}")]
    Runtime {
        step: String,
        message: String,
        span: Span,
    },
}

impl CodegenError {
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            CodegenError::InvalidScript(d) => d.clone(),
            CodegenError::Eval { failure, span } => {
                vec![Diagnostic::error(
                    failure.code(),
                    failure.to_string(),
                    *span,
                )]
            }
            CodegenError::MissingInput(name) => {
                vec![Diagnostic::error(
                    "R001",
                    format!("missing input {name}"),
                    Span::default(),
                )]
            }
            CodegenError::Runtime {
                step,
                message,
                span,
            } => {
                vec![Diagnostic::error(
                    "R002",
                    format!("{step}: {message}"),
                    *span,
                )]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub name: String,
    pub value: f64,
}

/// Parameter values in program input order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AssignmentSection {
    pub bindings: Vec<Binding>,
}

impl AssignmentSection {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.bindings
            .iter()
            .find(|b| b.name == name)
            .map(|b| b.value)
    }
}

/// One scalar assignment: the coefficient of `blade` in `variable`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub name: String,
    pub variable: String,
    pub blade: Blade,
    pub expr: ScalarExpr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub name: String,
    pub blades: Vec<Blade>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawSpec {
    pub name: String,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BladeProgram {
    pub space: Signature,
    pub inputs: Vec<String>,
    /// Values written in the script's parameter declarations.
    pub defaults: Vec<Binding>,
    pub steps: Vec<Step>,
    pub outputs: Vec<OutputSpec>,
    pub draws: Vec<DrawSpec>,
    pub warnings: Vec<Diagnostic>,
}

impl BladeProgram {
    pub fn default_assignment(&self) -> AssignmentSection {
        AssignmentSection {
            bindings: self.defaults.clone(),
        }
    }

    pub fn output(&self, name: &str) -> Option<&OutputSpec> {
        self.outputs.iter().find(|o| o.name == name)
    }
}

/// Names that become program outputs: `?` assignments, then drawn names.
fn output_names(script: &Script) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    let mut push = |n: &str| {
        if !names.iter().any(|x| x == n) {
            names.push(n.to_string());
        }
    };
    for stmt in &script.statements {
        if let StmtKind::Assign {
            name,
            optimize: true,
            ..
        } = &stmt.kind
        {
            push(&name.text);
        }
    }
    for stmt in &script.statements {
        if let StmtKind::Draw { name, .. } = &stmt.kind {
            push(&name.text);
        }
    }
    names
}

fn check_valid(script: &Script) -> Result<(), CodegenError> {
    let errors: Vec<_> = script::validate(script)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CodegenError::InvalidScript(errors))
    }
}

struct Symbolic {
    space: Signature,
    inputs: HashSet<String>,
    vars: HashMap<String, Multivector<ScalarExpr>>,
    probe: Probe,
    inconclusive: Vec<Blade>,
}

impl Domain for Symbolic {
    type S = ScalarExpr;

    fn space(&self) -> Signature {
        self.space
    }

    fn lookup(&self, name: &str) -> Result<Multivector<ScalarExpr>, Failure> {
        if let Some(v) = self.vars.get(name) {
            Ok(v.clone())
        } else if self.inputs.contains(name) {
            Ok(Multivector::scalar(self.space, ScalarExpr::var(name)))
        } else {
            Err(Failure::Undefined(name.to_string()))
        }
    }

    fn clean(&mut self, mv: Multivector<ScalarExpr>) -> Multivector<ScalarExpr> {
        self.probe.clean(mv, &mut self.inconclusive)
    }

    fn sqrt(&self, value: ScalarExpr) -> Result<ScalarExpr, Failure> {
        match value.as_const() {
            Some(c) => checked_sqrt(c)
                .map(ScalarExpr::Const)
                .map_err(|e| Failure::Domain(e.to_string())),
            None => Ok(crate::algebra::Scalar::sqrt(value)),
        }
    }

    fn reciprocal(&self, value: &ScalarExpr) -> Option<ScalarExpr> {
        match value.as_const() {
            Some(c) if c.abs() <= ZERO_TOL => None,
            _ => Some(ScalarExpr::Const(1.0) / value.clone()),
        }
    }

    fn non_scalar_divisor(&self) -> Failure {
        Failure::SymbolicDivisionByNonScalar
    }
}

/// Compiles a valid script into a [`BladeProgram`].
///
/// Blades whose coefficients simplify to zero, or evaluate to zero at every
/// probe sample, are eliminated.
pub fn compile(script: &Script, space: Signature) -> Result<BladeProgram, CodegenError> {
    check_valid(script)?;
    let defaults: Vec<Binding> = script::parameters(script)
        .into_iter()
        .map(|(name, value)| Binding { name, value })
        .collect();
    let inputs: Vec<String> = defaults.iter().map(|b| b.name.clone()).collect();
    let outputs_wanted = output_names(script);
    let mut domain = Symbolic {
        space,
        inputs: inputs.iter().cloned().collect(),
        vars: HashMap::new(),
        probe: Probe::new(&defaults),
        inconclusive: Vec::new(),
    };
    let mut taken: HashSet<String> = inputs.iter().cloned().collect();
    let mut steps = Vec::new();
    let mut blades_of: HashMap<String, Vec<Blade>> = HashMap::new();
    let mut draws = Vec::new();
    let mut warnings = Vec::new();

    for stmt in &script.statements {
        match &stmt.kind {
            StmtKind::Assign { name, expr, .. } if !script::is_parameter_declaration(stmt) => {
                domain.inconclusive.clear();
                let value = eval(&mut domain, expr)
                    .map_err(|(failure, span)| CodegenError::Eval { failure, span })?;
                let value = domain.clean(value);
                if !domain.inconclusive.is_empty() {
                    let blades: Vec<String> =
                        domain.inconclusive.iter().map(|b| b.to_string()).collect();
                    warnings.push(Diagnostic::warning(
                        warnings::PROBE_FAILED,
                        format!(
                            "could not decide whether blades {} of {} vanish; kept",
                            blades.join(", "),
                            name.text
                        ),
                        stmt.span,
                    ));
                }
                let mut symbols = Vec::new();
                let mut blades = Vec::new();
                for (blade, coefficient) in value.terms() {
                    let temp = format!("{}_{}", name.text, blade.bits());
                    if !taken.insert(temp.clone()) {
                        return Err(CodegenError::Eval {
                            failure: Failure::NameCollision(temp),
                            span: name.span,
                        });
                    }
                    domain.probe.record(&temp, coefficient);
                    steps.push(Step {
                        name: temp.clone(),
                        variable: name.text.clone(),
                        blade,
                        expr: coefficient.clone(),
                        span: stmt.span,
                    });
                    symbols.push((blade, ScalarExpr::var(temp)));
                    blades.push(blade);
                }
                if blades.is_empty() && outputs_wanted.contains(&name.text) {
                    warnings.push(Diagnostic::warning(
                        warnings::EMPTY_OUTPUT,
                        format!("{} has no nonzero blades", name.text),
                        stmt.span,
                    ));
                }
                domain
                    .vars
                    .insert(name.text.clone(), Multivector::from_terms(space, symbols));
                blades_of.insert(name.text.clone(), blades);
            }
            StmtKind::Draw { name, color } => draws.push(DrawSpec {
                name: name.text.clone(),
                color: color.as_ref().map(Rgb::from_spec).unwrap_or(Rgb::BLACK),
            }),
            _ => {}
        }
    }

    let outputs = outputs_wanted
        .into_iter()
        .map(|name| OutputSpec {
            blades: blades_of.get(&name).cloned().unwrap_or_default(),
            name,
        })
        .collect();
    Ok(BladeProgram {
        space,
        inputs,
        defaults,
        steps,
        outputs,
        draws,
        warnings,
    })
}

/// Orders `values` by program input; names the program does not use produce
/// warnings.
pub fn bind(
    program: &BladeProgram,
    values: &BTreeMap<String, f64>,
) -> Result<(AssignmentSection, Vec<Diagnostic>), CodegenError> {
    let bindings = program
        .inputs
        .iter()
        .map(|name| {
            values
                .get(name)
                .map(|v| Binding {
                    name: name.clone(),
                    value: *v,
                })
                .ok_or_else(|| CodegenError::MissingInput(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let extra = values
        .keys()
        .filter(|k| !program.inputs.contains(k))
        .map(|k| {
            Diagnostic::warning(
                warnings::EXTRA_INPUT,
                format!("{k} is not an input of the program"),
                Span::default(),
            )
        })
        .collect();
    Ok((AssignmentSection { bindings }, extra))
}

/// Evaluates every step and assembles the output multivectors.
pub fn run(
    program: &BladeProgram,
    assignment: &AssignmentSection,
) -> Result<BTreeMap<String, Multivector>, CodegenError> {
    let mut env: HashMap<String, f64> = HashMap::new();
    for input in &program.inputs {
        let value = assignment
            .get(input)
            .ok_or_else(|| CodegenError::MissingInput(input.clone()))?;
        env.insert(input.clone(), value);
    }
    let mut by_variable: HashMap<&str, Vec<(Blade, f64)>> = HashMap::new();
    for step in &program.steps {
        let value = step
            .expr
            .evaluate(&env)
            .map_err(|e| CodegenError::Runtime {
                step: step.name.clone(),
                message: e.to_string(),
                span: step.span,
            })?;
        env.insert(step.name.clone(), value);
        by_variable
            .entry(step.variable.as_str())
            .or_default()
            .push((step.blade, value));
    }
    Ok(program
        .outputs
        .iter()
        .map(|o| {
            let terms = by_variable
                .get(o.name.as_str())
                .cloned()
                .unwrap_or_default();
            (
                o.name.clone(),
                Multivector::from_terms(program.space, terms),
            )
        })
        .collect())
}

struct Numeric<'a> {
    space: Signature,
    params: &'a HashSet<String>,
    values: &'a BTreeMap<String, f64>,
    vars: HashMap<String, Multivector>,
}

impl Domain for Numeric<'_> {
    type S = f64;

    fn space(&self) -> Signature {
        self.space
    }

    fn lookup(&self, name: &str) -> Result<Multivector, Failure> {
        if let Some(v) = self.vars.get(name) {
            return Ok(v.clone());
        }
        match self.values.get(name) {
            Some(v) if self.params.contains(name) => Ok(Multivector::scalar(self.space, *v)),
            _ if self.params.contains(name) => Err(Failure::MissingInput(name.to_string())),
            _ => Err(Failure::Undefined(name.to_string())),
        }
    }

    fn clean(&mut self, mv: Multivector) -> Multivector {
        mv
    }

    fn sqrt(&self, value: f64) -> Result<f64, Failure> {
        checked_sqrt(value).map_err(|e| Failure::Domain(e.to_string()))
    }

    fn reciprocal(&self, value: &f64) -> Option<f64> {
        (value.abs() > ZERO_TOL).then(|| 1.0 / value)
    }

    fn non_scalar_divisor(&self) -> Failure {
        Failure::NotInvertible
    }
}

/// Reference semantics: evaluates the script directly over numeric
/// multivectors, with `values` binding every parameter.
pub fn interpret(
    script: &Script,
    space: Signature,
    values: &BTreeMap<String, f64>,
) -> Result<BTreeMap<String, Multivector>, CodegenError> {
    check_valid(script)?;
    let params: HashSet<String> = script::parameters(script)
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let mut domain = Numeric {
        space,
        params: &params,
        values,
        vars: HashMap::new(),
    };
    for stmt in &script.statements {
        if let StmtKind::Assign { name, expr, .. } = &stmt.kind {
            if script::is_parameter_declaration(stmt) {
                continue;
            }
            let value = eval(&mut domain, expr).map_err(|(failure, span)| match failure {
                Failure::MissingInput(n) => CodegenError::MissingInput(n),
                failure => CodegenError::Eval { failure, span },
            })?;
            domain.vars.insert(name.text.clone(), value);
        }
    }
    Ok(output_names(script)
        .into_iter()
        .map(|n| {
            let v = domain
                .vars
                .get(&n)
                .cloned()
                .unwrap_or_else(|| Multivector::zero(space));
            (n, v)
        })
        .collect())
}

/// Parameter defaults of a script as a binding map.
pub fn default_values(script: &Script) -> BTreeMap<String, f64> {
    script::parameters(script).into_iter().collect()
}
