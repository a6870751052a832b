use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{warnings, BladeProgram};
use crate::algebra::{Multivector, Signature};
use crate::cga::{classify, EuclidPoint, GeometricObject};
use crate::script::{ColorSpec, Diagnostic, Span};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb { r, g, b }
    }

    pub fn named(name: &str) -> Option<Rgb> {
        Some(match name {
            "blue" => Rgb::new(0.0, 0.0, 1.0),
            "red" => Rgb::new(1.0, 0.0, 0.0),
            "green" => Rgb::new(0.0, 1.0, 0.0),
            "yellow" => Rgb::new(1.0, 1.0, 0.0),
            "black" => Rgb::BLACK,
            "white" => Rgb::new(1.0, 1.0, 1.0),
            "cyan" => Rgb::new(0.0, 1.0, 1.0),
            "magenta" => Rgb::new(1.0, 0.0, 1.0),
            _ => return None,
        })
    }

    /// Unknown names fall back to black; validated scripts never contain them.
    pub fn from_spec(spec: &ColorSpec) -> Rgb {
        match spec {
            ColorSpec::Named(n) => Rgb::named(n).unwrap_or(Rgb::BLACK),
            ColorSpec::Rgb(r, g, b) => Rgb::new(*r, *g, *b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XYZ {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<EuclidPoint> for XYZ {
    fn from(p: EuclidPoint) -> Self {
        XYZ {
            x: p.x,
            y: p.y,
            z: p.z,
        }
    }
}

/// Kind-specific parameters of a scene object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneParams {
    Circle {
        cx: f64,
        cy: f64,
        cz: f64,
        nx: f64,
        ny: f64,
        nz: f64,
        r: f64,
    },
    Sphere {
        cx: f64,
        cy: f64,
        cz: f64,
        r: f64,
    },
    Plane {
        nx: f64,
        ny: f64,
        nz: f64,
        d: f64,
    },
    Line {
        px: f64,
        py: f64,
        pz: f64,
        dx: f64,
        dy: f64,
        dz: f64,
    },
    PointPair {
        p1: XYZ,
        p2: XYZ,
    },
    Point {
        x: f64,
        y: f64,
        z: f64,
    },
    /// Raw coefficients keyed by blade name.
    Unknown {
        coefficients: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    pub kind: String,
    pub color: Rgb,
    pub label: String,
    pub params: SceneParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub version: u32,
    pub objects: Vec<SceneObject>,
}

impl Default for Scene {
    fn default() -> Self {
        Scene {
            version: 1,
            objects: Vec::new(),
        }
    }
}

impl Scene {
    pub fn count(&self, kind: &str) -> usize {
        self.objects.iter().filter(|o| o.kind == kind).count()
    }
}

fn params_of(object: &GeometricObject, mv: &Multivector) -> SceneParams {
    match *object {
        GeometricObject::Point { position: p } => SceneParams::Point {
            x: p.x,
            y: p.y,
            z: p.z,
        },
        GeometricObject::PointPair { first, second } => SceneParams::PointPair {
            p1: first.into(),
            p2: second.into(),
        },
        GeometricObject::Line { point, direction } => SceneParams::Line {
            px: point.x,
            py: point.y,
            pz: point.z,
            dx: direction.x,
            dy: direction.y,
            dz: direction.z,
        },
        GeometricObject::Circle {
            center,
            normal,
            radius,
        } => SceneParams::Circle {
            cx: center.x,
            cy: center.y,
            cz: center.z,
            nx: normal.x,
            ny: normal.y,
            nz: normal.z,
            r: radius,
        },
        GeometricObject::Plane { normal, distance } => SceneParams::Plane {
            nx: normal.x,
            ny: normal.y,
            nz: normal.z,
            d: distance,
        },
        GeometricObject::Sphere { center, radius } => SceneParams::Sphere {
            cx: center.x,
            cy: center.y,
            cz: center.z,
            r: radius,
        },
        GeometricObject::Unknown => SceneParams::Unknown {
            coefficients: mv.terms().map(|(b, c)| (b.to_string(), *c)).collect(),
        },
    }
}

/// Classifies every drawn result. Objects that cannot be classified are kept
/// as raw coefficients and reported as warnings.
pub fn scene_of(
    program: &BladeProgram,
    results: &BTreeMap<String, Multivector>,
) -> (Scene, Vec<Diagnostic>) {
    let mut scene = Scene::default();
    let mut warnings_out = Vec::new();
    let mut ids = HashSet::new();
    for draw in &program.draws {
        let mv = results
            .get(&draw.name)
            .cloned()
            .unwrap_or_else(|| Multivector::zero(program.space));
        let object = if program.space == Signature::cga3d() {
            classify(&mv)
        } else {
            GeometricObject::Unknown
        };
        if object == GeometricObject::Unknown {
            warnings_out.push(Diagnostic::warning(
                warnings::UNCLASSIFIABLE_DRAW,
                format!(
                    "{} is not a recognizable object; drawn as raw coefficients",
                    draw.name
                ),
                Span::default(),
            ));
        }
        let mut id = draw.name.clone();
        let mut n = 2;
        while !ids.insert(id.clone()) {
            id = format!("{}_{n}", draw.name);
            n += 1;
        }
        scene.objects.push(SceneObject {
            id,
            kind: object.kind().name().to_string(),
            color: draw.color,
            label: draw.name.clone(),
            params: params_of(&object, &mv),
        });
    }
    (scene, warnings_out)
}
