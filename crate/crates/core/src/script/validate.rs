use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::{Builtin, Diagnostic, COLOR_NAMES};

/// Diagnostic codes produced by [`validate`].
pub mod codes {
    pub const UNDEFINED: &str = "E001";
    pub const USE_BEFORE_DEFINITION: &str = "E002";
    pub const BASIS_ASSIGNMENT: &str = "E003";
    pub const UNKNOWN_FUNCTION: &str = "E004";
    pub const ARITY: &str = "E005";
    pub const COLOR: &str = "E006";
    pub const DUPLICATE_OUTPUT: &str = "E007";
    pub const DRAW_UNDEFINED: &str = "E008";
    pub const REDEFINITION: &str = "E009";
    pub const DRAW_PARAMETER: &str = "E010";
}

/// Whether an assignment declares a parameter: `name = <number>;` or
/// `name = -<number>;` without the `?` marker.
pub fn is_parameter_declaration(stmt: &Stmt) -> bool {
    matches!(&stmt.kind, StmtKind::Assign { optimize: false, expr, .. } if expr.literal().is_some())
}

/// Declared parameters with their default values, in declaration order.
pub fn parameters(script: &Script) -> Vec<(String, f64)> {
    let mut seen = HashSet::new();
    script
        .statements
        .iter()
        .filter(|s| is_parameter_declaration(s))
        .filter_map(|s| match &s.kind {
            StmtKind::Assign { name, expr, .. } if seen.insert(name.text.clone()) => {
                Some((name.text.clone(), expr.literal()?))
            }
            _ => None,
        })
        .collect()
}

/// Checks a parsed script; an empty result means it is valid.
///
/// Parameters are visible to every statement. Other variables must be
/// assigned before use and cannot be reassigned.
pub fn validate(script: &Script) -> Vec<Diagnostic> {
    let params: HashSet<String> = parameters(script).into_iter().map(|(n, _)| n).collect();
    let assigned_anywhere: HashSet<&str> = script
        .statements
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::Assign { name, .. } => Some(name.text.as_str()),
            _ => None,
        })
        .collect();
    let mut defined: HashMap<String, bool> = HashMap::new();
    let mut diagnostics = Vec::new();

    for stmt in &script.statements {
        match &stmt.kind {
            StmtKind::Comment(_) => {}
            StmtKind::Assign {
                name,
                optimize,
                expr,
            } => {
                check_expr(
                    expr,
                    &params,
                    &defined,
                    &assigned_anywhere,
                    &mut diagnostics,
                );
                if BasisVec::from_name(&name.text).is_some() {
                    diagnostics.push(Diagnostic::error(
                        codes::BASIS_ASSIGNMENT,
                        format!("cannot assign basis vector {}", name.text),
                        name.span,
                    ));
                    continue;
                }
                match defined.get(&name.text) {
                    Some(true) if *optimize => diagnostics.push(Diagnostic::error(
                        codes::DUPLICATE_OUTPUT,
                        format!("output ?{} is declared more than once", name.text),
                        name.span,
                    )),
                    Some(_) => diagnostics.push(Diagnostic::error(
                        codes::REDEFINITION,
                        format!("{} is already assigned", name.text),
                        name.span,
                    )),
                    None => {
                        defined.insert(name.text.clone(), *optimize);
                    }
                }
            }
            StmtKind::Draw { name, color } => {
                if params.contains(&name.text) {
                    diagnostics.push(Diagnostic::error(
                        codes::DRAW_PARAMETER,
                        format!("cannot draw parameter {}", name.text),
                        name.span,
                    ));
                } else if !defined.contains_key(&name.text) {
                    let message = if assigned_anywhere.contains(name.text.as_str()) {
                        format!("cannot draw {} before it is assigned", name.text)
                    } else {
                        format!("draw of undefined {}", name.text)
                    };
                    diagnostics.push(Diagnostic::error(codes::DRAW_UNDEFINED, message, name.span));
                }
                if let Some(color) = color {
                    check_color(color, stmt, &mut diagnostics);
                }
            }
        }
    }
    diagnostics
}

fn check_color(color: &ColorSpec, stmt: &Stmt, diagnostics: &mut Vec<Diagnostic>) {
    match color {
        ColorSpec::Named(n) if !COLOR_NAMES.contains(&n.as_str()) => {
            diagnostics.push(Diagnostic::error(
                codes::COLOR,
                format!(
                    "unknown color {n}; expected one of {} or rgb(r, g, b)",
                    COLOR_NAMES.join(", ")
                ),
                stmt.span,
            ))
        }
        ColorSpec::Rgb(r, g, b) if [r, g, b].iter().any(|c| !(0.0..=1.0).contains(*c)) => {
            diagnostics.push(Diagnostic::error(
                codes::COLOR,
                "rgb components must lie in [0, 1]",
                stmt.span,
            ))
        }
        _ => {}
    }
}

fn check_expr(
    expr: &Expr,
    params: &HashSet<String>,
    defined: &HashMap<String, bool>,
    assigned_anywhere: &HashSet<&str>,
    diagnostics: &mut Vec<Diagnostic>,
) {
    expr.walk(&mut |e| match &e.kind {
        ExprKind::Ident(name) if !params.contains(name) && !defined.contains_key(name) => {
            if assigned_anywhere.contains(name.as_str()) {
                diagnostics.push(Diagnostic::error(
                    codes::USE_BEFORE_DEFINITION,
                    format!("{name} is used before it is assigned"),
                    e.span,
                ));
            } else {
                diagnostics.push(Diagnostic::error(
                    codes::UNDEFINED,
                    format!("undefined identifier {name}"),
                    e.span,
                ));
            }
        }
        ExprKind::Call { name, args } => match Builtin::from_name(name) {
            None => diagnostics.push(Diagnostic::error(
                codes::UNKNOWN_FUNCTION,
                format!("unknown function {name}"),
                e.span,
            )),
            Some(f) if f.arity() != args.len() => diagnostics.push(Diagnostic::error(
                codes::ARITY,
                format!("{name} takes {} argument(s), got {}", f.arity(), args.len()),
                e.span,
            )),
            Some(_) => {}
        },
        _ => {}
    });
}
