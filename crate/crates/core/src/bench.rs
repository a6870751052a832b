//! Benchmark harness: JSONL cases run through the full pipeline and checked
//! against geometric assertions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{run_request, PipelineConfig, PipelineResult, PlanRequest, SubtaskCategory};
use crate::codegen::{Scene, SceneParams};
use crate::script::Diagnostic;

/// The bundled dataset.
pub const BUNDLED_DATASET: &str = include_str!("../data/bench.jsonl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Paper,
    Extension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Assertion {
    Executes,
    /// At least `count` scene objects of `kind`.
    ObjectExists {
        kind: String,
        count: usize,
    },
    /// Some drawn point or point-pair endpoint lies within `tol`.
    PointNear {
        x: f64,
        y: f64,
        z: f64,
        tol: f64,
    },
    /// Every drawn point lies on every drawn sphere.
    OnAllSpheres {
        tol: f64,
    },
    /// `variable` has exactly these coefficients; unlisted blades are zero.
    MultivectorNear {
        variable: String,
        coefficients: BTreeMap<String, f64>,
        tol: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkCase {
    pub id: String,
    pub origin: Origin,
    pub category: SubtaskCategory,
    pub task_description: String,
    pub ga_formula: String,
    #[serde(default = "cga3d")]
    pub space: String,
    pub expected: Vec<Assertion>,
}

fn cga3d() -> String {
    "cga3d".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub id: String,
    pub success: bool,
    /// Descriptions of assertions that did not hold.
    pub failures: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub total: usize,
    pub successes: usize,
    /// Percent.
    pub success_rate: f64,
    pub cases: Vec<CaseOutcome>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dataset has no cases")]
    Empty,
}

pub fn parse_dataset(text: &str) -> Result<Vec<BenchmarkCase>, DatasetError> {
    let mut cases = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let case: BenchmarkCase = serde_json::from_str(raw).map_err(|e| DatasetError::Parse {
            line,
            message: e.to_string(),
        })?;
        if !case.expected.contains(&Assertion::Executes) {
            return Err(DatasetError::Parse {
                line,
                message: format!("{} lacks the executes assertion", case.id),
            });
        }
        if cases.iter().any(|c: &BenchmarkCase| c.id == case.id) {
            return Err(DatasetError::Parse {
                line,
                message: format!("duplicate case id {}", case.id),
            });
        }
        cases.push(case);
    }
    if cases.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(cases)
}

fn drawn_points(scene: &Scene) -> Vec<[f64; 3]> {
    let mut points = Vec::new();
    for o in &scene.objects {
        match &o.params {
            SceneParams::Point { x, y, z } => points.push([*x, *y, *z]),
            SceneParams::PointPair { p1, p2 } => {
                points.push([p1.x, p1.y, p1.z]);
                points.push([p2.x, p2.y, p2.z]);
            }
            _ => {}
        }
    }
    points
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Returns why `assertion` fails on `result`, or `None` if it holds.
pub fn check(assertion: &Assertion, result: &PipelineResult) -> Option<String> {
    match assertion {
        Assertion::Executes => None,
        Assertion::ObjectExists { kind, count } => {
            let found = result.scene.count(kind);
            (found < *count).then(|| format!("expected {count} {kind}(s), scene has {found}"))
        }
        Assertion::PointNear { x, y, z, tol } => {
            let target = [*x, *y, *z];
            let best = drawn_points(&result.scene)
                .into_iter()
                .map(|p| distance(p, target))
                .fold(f64::INFINITY, f64::min);
            (best > *tol).then(|| {
                format!("no drawn point within {tol} of ({x}, {y}, {z}); closest is {best:e} away")
            })
        }
        Assertion::OnAllSpheres { tol } => {
            let points = drawn_points(&result.scene);
            let spheres: Vec<([f64; 3], f64)> = result
                .scene
                .objects
                .iter()
                .filter_map(|o| match o.params {
                    SceneParams::Sphere { cx, cy, cz, r } => Some(([cx, cy, cz], r)),
                    _ => None,
                })
                .collect();
            if points.is_empty() || spheres.is_empty() {
                return Some("scene needs at least one point and one sphere".into());
            }
            let worst = points
                .iter()
                .flat_map(|p| {
                    spheres
                        .iter()
                        .map(move |(c, r)| (distance(*p, *c) - r).abs())
                })
                .fold(0.0, f64::max);
            (worst > *tol).then(|| format!("a point is {worst:e} off a sphere, tolerance {tol}"))
        }
        Assertion::MultivectorNear {
            variable,
            coefficients,
            tol,
        } => {
            let Some(actual) = result.outputs.get(variable) else {
                return Some(format!("no output named {variable}"));
            };
            let blades = coefficients.keys().chain(actual.keys());
            let off: Vec<String> = blades
                .filter_map(|b| {
                    let want = coefficients.get(b).copied().unwrap_or(0.0);
                    let got = actual.get(b).copied().unwrap_or(0.0);
                    ((want - got).abs() > *tol).then(|| format!("{b}: {got} != {want}"))
                })
                .collect();
            (!off.is_empty()).then(|| format!("{variable} differs at {}", off.join(", ")))
        }
    }
}

pub fn run_case(case: &BenchmarkCase, config: &PipelineConfig) -> CaseOutcome {
    let request = PlanRequest {
        description: case.task_description.clone(),
        formula: Some(case.ga_formula.clone()),
        space: case.space.clone(),
        language: "python".into(),
    };
    match run_request(&request, config) {
        Ok(result) => {
            let failures: Vec<String> = case
                .expected
                .iter()
                .filter_map(|a| check(a, &result))
                .collect();
            CaseOutcome {
                id: case.id.clone(),
                success: failures.is_empty(),
                failures,
                diagnostics: result.warnings,
            }
        }
        Err(e) => CaseOutcome {
            id: case.id.clone(),
            success: false,
            failures: vec![e.to_string()],
            diagnostics: e.diagnostics().to_vec(),
        },
    }
}

pub fn bench(cases: &[BenchmarkCase], config: &PipelineConfig) -> BenchmarkReport {
    let outcomes: Vec<CaseOutcome> = cases.iter().map(|c| run_case(c, config)).collect();
    let successes = outcomes.iter().filter(|o| o.success).count();
    let total = outcomes.len();
    BenchmarkReport {
        total,
        successes,
        success_rate: if total == 0 {
            0.0
        } else {
            100.0 * successes as f64 / total as f64
        },
        cases: outcomes,
    }
}
