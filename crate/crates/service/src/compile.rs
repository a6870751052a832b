//! Stateless compilation of raw scripts, shared by the API and the CLI.

use std::collections::BTreeMap;

use gavis::algebra::Signature;
use gavis::codegen::{self, Binding};
use gavis::script::{self, Diagnostic, Severity, Span};
use gavis::symbolic::EmissionStyle;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileRequest {
    pub script: String,
    #[serde(default = "default_space")]
    pub space: String,
    #[serde(default = "default_target")]
    pub target: String,
    /// Overrides for parameter values declared in the script.
    #[serde(default)]
    pub bindings: BTreeMap<String, f64>,
}

fn default_space() -> String {
    "cga3d".into()
}

fn default_target() -> String {
    "python".into()
}

impl CompileRequest {
    pub fn new(script: impl Into<String>) -> Self {
        CompileRequest {
            script: script.into(),
            space: default_space(),
            target: default_target(),
            bindings: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileResponse {
    pub code: String,
    pub scene: codegen::Scene,
    /// Parameter values used, in program input order.
    pub inputs: Vec<Binding>,
    /// Output coefficients keyed by blade name.
    pub outputs: BTreeMap<String, BTreeMap<String, f64>>,
    pub warnings: Vec<Diagnostic>,
}

/// Request fields the compiler cannot act on.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RequestError {
    #[error("unknown space {0}")]
    Space(String),
    #[error("unknown target {0}; expected python or json-ir")]
    Target(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompileFailure {
    Request(RequestError),
    Diagnostics(Vec<Diagnostic>),
}

/// Parses, validates, compiles, binds, runs and decodes a script.
pub fn compile_script(request: &CompileRequest) -> Result<CompileResponse, CompileFailure> {
    let space = Signature::from_name(&request.space)
        .map_err(|_| CompileFailure::Request(RequestError::Space(request.space.clone())))?;
    let style = EmissionStyle::from_name(&request.target)
        .ok_or_else(|| CompileFailure::Request(RequestError::Target(request.target.clone())))?;
    let diagnostics = |d: Vec<Diagnostic>| CompileFailure::Diagnostics(d);

    let ast = script::parse_source(&request.script).map_err(diagnostics)?;
    let checked = script::validate(&ast);
    if script::has_errors(&checked) {
        return Err(diagnostics(checked));
    }
    let program = codegen::compile(&ast, space).map_err(|e| diagnostics(e.diagnostics()))?;
    let mut values = codegen::default_values(&ast);
    values.extend(request.bindings.iter().map(|(k, v)| (k.clone(), *v)));
    let (assignment, extra) =
        codegen::bind(&program, &values).map_err(|e| diagnostics(e.diagnostics()))?;
    let results = codegen::run(&program, &assignment).map_err(|e| diagnostics(e.diagnostics()))?;
    let (scene, scene_warnings) = codegen::scene_of(&program, &results);

    let mut warnings: Vec<Diagnostic> = checked
        .into_iter()
        .filter(|d| d.severity == Severity::Warning)
        .collect();
    warnings.extend(program.warnings.iter().cloned());
    warnings.extend(extra);
    warnings.extend(scene_warnings);
    let outputs = results
        .iter()
        .map(|(name, mv)| {
            (
                name.clone(),
                mv.terms().map(|(b, c)| (b.to_string(), *c)).collect(),
            )
        })
        .collect();
    Ok(CompileResponse {
        code: codegen::emit_code(&program, &assignment, style),
        scene,
        inputs: assignment.bindings,
        outputs,
        warnings,
    })
}

/// A diagnostic that points nowhere in particular.
pub fn general_error(code: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic::error(code, message, Span::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bindings_override_declared_parameters() {
        let mut request = CompileRequest::new("r = 1;\n?s = r * e1;\n");
        request.bindings.insert("r".into(), 2.5);
        let response = compile_script(&request).unwrap();
        assert_eq!(response.outputs["s"]["e1"], 2.5);
        assert_eq!(
            response.inputs,
            vec![Binding {
                name: "r".into(),
                value: 2.5
            }]
        );
    }

    #[test]
    fn syntax_errors_carry_spans() {
        let Err(CompileFailure::Diagnostics(d)) =
            compile_script(&CompileRequest::new("?a = (1 + ;"))
        else {
            panic!("expected diagnostics");
        };
        assert!(d[0].span.line == 1 && d[0].span.col > 1);
    }

    #[test]
    fn unknown_targets_are_request_errors() {
        let mut request = CompileRequest::new("?a = e1;");
        request.target = "fortran".into();
        assert_eq!(
            compile_script(&request),
            Err(CompileFailure::Request(RequestError::Target(
                "fortran".into()
            )))
        );
    }
}
