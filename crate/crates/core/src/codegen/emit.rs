use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{AssignmentSection, Binding, BladeProgram, Rgb};
use crate::algebra::Signature;
use crate::symbolic::{python_float, python_identifier, EmissionStyle, IrNode};

/// Section headers of Python output, in emission order.
pub const PYTHON_SECTIONS: [&str; 3] = [
    "# --- assignments ---",
    "# --- optimization code ---",
    "# --- visualization ---",
];

/// Renders a bound program. Output is deterministic.
pub fn emit_code(
    program: &BladeProgram,
    assignment: &AssignmentSection,
    style: EmissionStyle,
) -> String {
    match style {
        EmissionStyle::Python => python(program, assignment),
        EmissionStyle::JsonIr => {
            let ir = IrProgram::new(program, assignment);
            let mut text = serde_json::to_string_pretty(&ir).expect("IR serializes");
            text.push('\n');
            text
        }
    }
}

fn color_tuple(c: &Rgb) -> String {
    format!(
        "({}, {}, {})",
        python_float(c.r),
        python_float(c.g),
        python_float(c.b)
    )
}

fn python(program: &BladeProgram, assignment: &AssignmentSection) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Generated by gavis for {}.", program.space.name());
    out.push_str("import math\n\n");

    out.push_str(PYTHON_SECTIONS[0]);
    out.push('\n');
    for b in &assignment.bindings {
        let _ = writeln!(
            out,
            "{} = {}",
            python_identifier(&b.name),
            python_float(b.value)
        );
    }

    out.push_str(PYTHON_SECTIONS[1]);
    out.push('\n');
    for step in &program.steps {
        let _ = writeln!(
            out,
            "{} = {}  # {} {}",
            python_identifier(&step.name),
            step.expr.to_python(),
            step.variable,
            step.blade
        );
    }
    if program.outputs.is_empty() {
        out.push_str("outputs = {}\n");
    } else {
        out.push_str("outputs = {\n");
        for o in &program.outputs {
            let entries: Vec<String> = o
                .blades
                .iter()
                .map(|b| {
                    format!(
                        "\"{}\": {}",
                        b,
                        python_identifier(&format!("{}_{}", o.name, b.bits()))
                    )
                })
                .collect();
            let _ = writeln!(out, "    \"{}\": {{{}}},", o.name, entries.join(", "));
        }
        out.push_str("}\n");
    }

    out.push_str(PYTHON_SECTIONS[2]);
    out.push('\n');
    if program.draws.is_empty() {
        out.push_str("visualize = []\n");
    } else {
        out.push_str("visualize = [\n");
        for d in &program.draws {
            let _ = writeln!(out, "    (\"{}\", {}),", d.name, color_tuple(&d.color));
        }
        out.push_str("]\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrStep {
    pub name: String,
    pub variable: String,
    /// Blade bitmask: bit `i - 1` set for basis vector `e_i`.
    pub blade: u16,
    pub expr: IrNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrOutput {
    pub name: String,
    pub blades: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrDraw {
    pub name: String,
    pub color: Rgb,
}

/// The `json-ir` program document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrProgram {
    pub format: String,
    pub version: u32,
    pub space: Signature,
    pub inputs: Vec<String>,
    pub assignments: Vec<Binding>,
    pub steps: Vec<IrStep>,
    pub outputs: Vec<IrOutput>,
    pub visualization: Vec<IrDraw>,
}

impl IrProgram {
    pub const FORMAT: &'static str = "gavis-ir";

    pub fn new(program: &BladeProgram, assignment: &AssignmentSection) -> Self {
        IrProgram {
            format: Self::FORMAT.to_string(),
            version: 1,
            space: program.space,
            inputs: program.inputs.clone(),
            assignments: assignment.bindings.clone(),
            steps: program
                .steps
                .iter()
                .map(|s| IrStep {
                    name: s.name.clone(),
                    variable: s.variable.clone(),
                    blade: s.blade.bits(),
                    expr: IrNode::from_expr(&s.expr),
                })
                .collect(),
            outputs: program
                .outputs
                .iter()
                .map(|o| IrOutput {
                    name: o.name.clone(),
                    blades: o.blades.iter().map(|b| b.bits()).collect(),
                })
                .collect(),
            visualization: program
                .draws
                .iter()
                .map(|d| IrDraw {
                    name: d.name.clone(),
                    color: d.color,
                })
                .collect(),
        }
    }
}
