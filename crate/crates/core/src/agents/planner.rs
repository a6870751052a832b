//! Deterministic template planner.
//!
//! The description is split into sentences and clauses. Each clause is
//! matched against a closed set of intent patterns; a match becomes one or
//! more drafts, each of which turns into a [`SubtaskRecord`]. Color phrases
//! are lifted out of a clause before its intent is matched.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use super::{
    kind_prefix, Plan, PlanRequest, ReActTrace, Registry, SubtaskRecord, VisualizationSetting,
};
use crate::algebra::Signature;
use crate::symbolic::EmissionStyle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("the task description is empty")]
    EmptyDescription,
    #[error("no known operation matches \"{clause}\"")]
    UnrecognizedIntent { clause: String },
    #[error("\"{clause}\" refers to {name}, which no earlier step creates")]
    UnknownObject { clause: String, name: String },
    #[error("unsupported algebra {0}")]
    UnsupportedSpace(String),
    #[error("unsupported code language {0}")]
    UnsupportedLanguage(String),
}

macro_rules! re {
    ($($pat:expr),+ $(,)?) => {{
        static RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!($($pat),+)).unwrap());
        &*RE
    }};
}

const NUM: &str = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?";
const NAME: &str = r"[A-Za-z][A-Za-z0-9_]*";
const NOUN: &str = r"(?:point\s+pair|points?|spheres?|balls?|planes?|lines?|circles?|vectors?|multivectors?|objects?|blades?|bivectors?|translators?|rotors?|versors?|scalars?|values?|results?)";

/// Words that never name an object.
const STOP: &[&str] = &[
    "a",
    "an",
    "the",
    "and",
    "at",
    "of",
    "by",
    "to",
    "from",
    "through",
    "with",
    "in",
    "on",
    "onto",
    "into",
    "as",
    "is",
    "are",
    "it",
    "them",
    "that",
    "which",
    "whose",
    "having",
    "using",
    "for",
    "then",
    "named",
    "called",
    "center",
    "centers",
    "centered",
    "centre",
    "centred",
    "radius",
    "radii",
    "normal",
    "distance",
    "offset",
    "respectively",
    "visualized",
    "shown",
    "drawn",
    "point",
    "points",
    "sphere",
    "spheres",
    "ball",
    "balls",
    "plane",
    "planes",
    "line",
    "lines",
    "circle",
    "circles",
    "vector",
    "vectors",
    "pair",
    "both",
    "all",
];

fn is_stop(word: &str) -> bool {
    // Single capitals such as `A` are names, not articles.
    !(word.len() == 1 && word.chars().all(|c| c.is_ascii_uppercase()))
        && STOP.contains(&word.to_ascii_lowercase().as_str())
}

fn number(text: &str) -> f64 {
    text.parse().expect("pattern admits only numbers")
}

fn numbers(text: &str) -> Vec<f64> {
    re!("{NUM}")
        .find_iter(text)
        .map(|m| number(m.as_str()))
        .collect()
}

/// Names at the start of `text`, separated by commas or "and". Leading
/// articles and object nouns are skipped.
fn leading_names(text: &str) -> Vec<String> {
    let token = re!(r"^\s*(?:,|\band\b|{NAME})");
    let mut rest = text;
    let mut names = Vec::new();
    let mut started = false;
    while let Some(m) = token.find(rest) {
        let word = m.as_str().trim();
        rest = &rest[m.end()..];
        if word == "," || word.eq_ignore_ascii_case("and") {
            continue;
        }
        if is_stop(word) {
            if started
                || !["a", "an", "the"].contains(&word.to_ascii_lowercase().as_str())
                    && !re!(r"(?i)^{NOUN}$").is_match(word)
            {
                break;
            }
            continue;
        }
        // A name followed by "(" is a coordinate item, not a reference.
        if rest.trim_start().starts_with('(') {
            break;
        }
        started = true;
        names.push(word.to_string());
    }
    names
}

#[derive(Debug, Clone, PartialEq)]
enum PointRef {
    Coords(Option<String>, [f64; 3]),
    Name(String),
}

fn coords_at(c: &regex::Captures, first: usize) -> [f64; 3] {
    [
        number(&c[first]),
        number(&c[first + 1]),
        number(&c[first + 2]),
    ]
}

/// Every `name(x, y, z)`, `(x, y, z)` or bare name in `text`.
fn point_refs(text: &str) -> Vec<PointRef> {
    let item = re!(r"(?:({NAME})\s*)?\(\s*({NUM})\s*,\s*({NUM})\s*,\s*({NUM})\s*\)|\b({NAME})\b");
    item.captures_iter(text)
        .filter_map(|c| {
            if let Some(bare) = c.get(5) {
                return (!is_stop(bare.as_str()))
                    .then(|| PointRef::Name(bare.as_str().to_string()));
            }
            let name = c
                .get(1)
                .map(|m| m.as_str())
                .filter(|n| n.len() == 1 || !is_stop(n))
                .map(str::to_string);
            Some(PointRef::Coords(name, coords_at(&c, 2)))
        })
        .collect()
}

fn coord_items(text: &str) -> Vec<(Option<String>, [f64; 3])> {
    point_refs(text)
        .into_iter()
        .filter_map(|r| match r {
            PointRef::Coords(n, c) => Some((n, c)),
            PointRef::Name(_) => None,
        })
        .collect()
}

#[derive(Debug, Clone)]
struct ColorDirective {
    names: Vec<String>,
    colors: Vec<String>,
}

fn color_words(list: &str) -> Vec<String> {
    re!(r"(?i)rgb\s*\([^)]*\)|[A-Za-z]+")
        .find_iter(list)
        .map(|m| m.as_str().to_ascii_lowercase())
        .filter(|w| w != "and" && w != "respectively")
        .map(|w| {
            if w.starts_with("rgb") {
                w.split_whitespace().collect::<String>().replace(',', ", ")
            } else {
                w
            }
        })
        .collect()
}

/// Removes color phrases from `text` and returns them.
fn extract_colors(text: &mut String) -> Vec<ColorDirective> {
    const LIST: &str =
        r"(?:rgb\s*\([^)]*\)|[A-Za-z]+)(?:\s*(?:,?\s*and\b|,)\s*(?:rgb\s*\([^)]*\)|[A-Za-z]+))*";
    let mut out = Vec::new();
    let paren = re!(r"(?i)\(\s*colou?r\s*:\s*([^()]*(?:\([^)]*\))?[^()]*)\)");
    let passive = re!(
        r"(?i),?\s*({NAME}(?:\s*(?:,?\s*and\b|,)\s*{NAME})*)\s+(?:are|is)\s+(?:visuali[sz]ed|shown|drawn|displayed|rendered|colou?red)\s+(?:in\s+)?({LIST})"
    );
    let active = re!(
        r"(?i),?\s*\b(?:and\s+)?(?:visuali[sz]e|show|draw|display|render|colou?r)\s+(them|it|the\s+results?|both|all|{NAME}(?:\s*(?:,?\s*and\b|,)\s*{NAME})*)\s+(?:in\s+)({LIST})"
    );
    for (pattern, named) in [(paren, false), (passive, true), (active, true)] {
        while let Some(c) = pattern.captures(text) {
            let whole = c.get(0).unwrap().range();
            let (names, colors) = if named {
                let subject = c[1].to_string();
                let names: Vec<String> =
                    if re!(r"(?i)^(?:them|it|the\s+results?|both|all)$").is_match(&subject) {
                        Vec::new()
                    } else {
                        subject
                            .split(|ch: char| ch == ',' || ch.is_whitespace())
                            .filter(|w| !w.is_empty() && !is_stop(w))
                            .map(str::to_string)
                            .collect()
                    };
                (names, color_words(&c[2]))
            } else {
                (Vec::new(), color_words(&c[1]))
            };
            out.push(ColorDirective { names, colors });
            text.replace_range(whole, " ");
        }
    }
    out
}

/// Removes "as NAME", "named NAME" or "called NAME" and returns the names.
fn extract_outputs(text: &mut String) -> Vec<String> {
    let pattern = re!(
        r"(?i),?\s*\b(?:and\s+)?(?:as|named|called|store\s+(?:it|the\s+result)\s+(?:in|as)|name\s+(?:it|the\s+result))\s+({NAME}(?:\s*(?:,?\s*and\b|,)\s*{NAME})*)"
    );
    match pattern.captures(text) {
        Some(c) => {
            let names = leading_names(&c[1]);
            let range = c.get(0).unwrap().range();
            text.replace_range(range, " ");
            names
        }
        None => Vec::new(),
    }
}

/// Splits on sentence punctuation that is not part of a number.
fn sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    for (i, &ch) in chars.iter().enumerate() {
        let next = chars.get(i + 1).copied();
        let boundary = match ch {
            ';' | '!' | '?' => true,
            '.' => next.is_none_or(char::is_whitespace),
            _ => false,
        };
        if boundary {
            out.push(std::mem::take(&mut current));
        } else {
            current.push(ch);
        }
    }
    out.push(current);
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn clauses(sentence: &str) -> Vec<String> {
    re!(r"(?i),?\s+(?:and\s+)?then\s+")
        .split(sentence)
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn strip_connectives(clause: &str) -> String {
    let lead = re!(
        r"(?i)^(?:(?:finally|then|next|first|firstly|second|secondly|third|also|now|lastly|afterwards|and|please|after\s+that)\b\s*,?\s*)+"
    );
    let space = re!(
        r"(?i)\bin\s+(?:the\s+)?(?:3d\s+)?(?:conformal|euclidean|cga)(?:\s+(?:space|model|geometric\s+algebra))?\s*,?\s*"
    );
    space
        .replace_all(&lead.replace(clause, ""), "")
        .trim()
        .to_string()
}

/// Replaces inline math with plain text and collects `$...$` formulas.
fn detex(description: &str) -> (String, Vec<String>) {
    let mut formulas = Vec::new();
    let text = re!(r"\$([^$]*)\$")
        .replace_all(description, |c: &regex::Captures| {
            let inner = &c[1];
            if inner.contains('=') {
                formulas.push(inner.trim().to_string());
                String::new()
            } else {
                inner.replace(['_', '{', '}', '\\'], "")
            }
        })
        .into_owned();
    let text = re!(r"(?i)\b(?:visuali[sz]ation\s+)?formula\s*:\s*")
        .replace_all(&text, "")
        .into_owned();
    (text, formulas)
}

#[derive(Debug, Clone)]
struct DraftCall {
    outputs: Vec<String>,
    operands: Vec<String>,
    values: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone)]
struct Draft {
    function: &'static str,
    kind: String,
    title: String,
    clause: String,
    intent: &'static str,
    thoughts: String,
    calls: Vec<DraftCall>,
    visualization: Vec<VisualizationSetting>,
}

impl Draft {
    fn outputs(&self) -> Vec<String> {
        self.calls.iter().flat_map(|c| c.outputs.clone()).collect()
    }
}

struct Builder {
    reserved: BTreeSet<String>,
    counters: HashMap<&'static str, usize>,
    produced: Vec<(String, String)>,
    drafts: Vec<Draft>,
    clause: String,
    explicit: Vec<String>,
}

type Step = Result<bool, PlanError>;

impl Builder {
    fn unrecognized(&self) -> PlanError {
        PlanError::UnrecognizedIntent {
            clause: self.clause.clone(),
        }
    }

    fn fresh(&mut self, kind: &str) -> String {
        let prefix = kind_prefix(kind);
        let n = self.counters.entry(prefix).or_insert(0);
        loop {
            *n += 1;
            let name = format!("{prefix}{n}");
            if self.reserved.insert(name.clone()) {
                return name;
            }
        }
    }

    /// The next explicitly named output, or a generated one.
    fn output(&mut self, kind: &str) -> String {
        if self.explicit.is_empty() {
            self.fresh(kind)
        } else {
            self.explicit.remove(0)
        }
    }

    fn kind_of(&self, name: &str) -> Option<&str> {
        self.produced
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, k)| k.as_str())
    }

    fn require(&self, name: &str) -> Result<(), PlanError> {
        match self.kind_of(name) {
            Some(_) => Ok(()),
            None => Err(PlanError::UnknownObject {
                clause: self.clause.clone(),
                name: name.to_string(),
            }),
        }
    }

    fn push(&mut self, draft: Draft) {
        for name in draft.outputs() {
            self.reserved.insert(name.clone());
            self.produced.push((name, draft.kind.clone()));
        }
        self.drafts.push(draft);
    }

    fn draft(
        &self,
        function: &'static str,
        kind: &str,
        intent: &'static str,
        calls: Vec<DraftCall>,
    ) -> Draft {
        let outputs: Vec<String> = calls.iter().flat_map(|c| c.outputs.clone()).collect();
        let verb = intent[..1].to_ascii_uppercase() + &intent[1..];
        Draft {
            function,
            kind: kind.to_string(),
            title: format!("{verb} {}", outputs.join(", ")),
            clause: self.clause.clone(),
            intent,
            thoughts: String::new(),
            calls,
            visualization: Vec::new(),
        }
    }

    /// Creates the points that a list of references needs and returns the
    /// names of all referenced points.
    fn materialize(&mut self, refs: Vec<PointRef>) -> Result<Vec<String>, PlanError> {
        let mut names = Vec::new();
        let mut calls = Vec::new();
        for r in refs {
            match r {
                PointRef::Name(n) => {
                    self.require(&n)?;
                    names.push(n);
                }
                PointRef::Coords(name, [x, y, z]) => {
                    if let Some(n) = name.as_ref().filter(|n| self.kind_of(n) == Some("point")) {
                        names.push(n.clone());
                        continue;
                    }
                    let n = match name {
                        Some(n) => {
                            self.reserved.insert(n.clone());
                            n
                        }
                        None => self.fresh("point"),
                    };
                    calls.push(DraftCall {
                        outputs: vec![n.clone()],
                        operands: vec![],
                        values: vec![("x", x), ("y", y), ("z", z)],
                    });
                    names.push(n);
                }
            }
        }
        if !calls.is_empty() {
            let mut d = self.draft("createPoint", "point", "create points", calls);
            d.thoughts = format!("{} must exist before they are used", d.outputs().join(", "));
            if d.calls.len() == 1 {
                d.title = format!("Create point {}", d.outputs()[0]);
            }
            self.push(d);
        }
        Ok(names)
    }

    fn create(&mut self, text: &str) -> Step {
        let verb = re!(
            r"(?i)\b(?:create|construct|define|make|build|generate|draw|place)\s+(?:(?:an?|the|one|two|three|four|five|six|\d+)\s+)?(point\s+pairs?|points?|vectors?|spheres?|balls?|planes?|lines?|circles?|translators?)\b"
        );
        let Some(c) = verb.captures(text) else {
            return Ok(false);
        };
        let noun = c[1].to_ascii_lowercase();
        let rest = &text[c.get(0).unwrap().end()..];
        let mut names = leading_names(rest);
        names.extend(std::mem::take(&mut self.explicit));
        self.explicit = names;
        match noun.trim_end_matches('s') {
            "point" | "vector" => self.create_points(rest, noun.starts_with("vector")),
            "sphere" | "ball" => self.create_spheres(rest),
            "plane" => self.create_plane(rest),
            "line" => self.create_through(rest, "createLine", "line", 2),
            "circle" => self.create_through(rest, "createCircle", "circle", 3),
            "translator" => self.create_translator(rest),
            _ => self.create_through(rest, "createPointPair", "point_pair", 2),
        }
    }

    fn create_points(&mut self, rest: &str, vectors: bool) -> Step {
        let items = coord_items(rest);
        if items.is_empty() {
            return Err(self.unrecognized());
        }
        let kind = if vectors { "vector" } else { "point" };
        let mut calls = Vec::new();
        for (name, [x, y, z]) in items {
            let n = match name {
                Some(n) => {
                    self.explicit.retain(|e| e != &n);
                    n
                }
                None => self.output(kind),
            };
            calls.push(DraftCall {
                outputs: vec![n],
                operands: vec![],
                values: vec![("x", x), ("y", y), ("z", z)],
            });
        }
        let function = if vectors {
            "createVector"
        } else {
            "createPoint"
        };
        let intent = match (vectors, calls.len()) {
            (true, 1) => "create vector",
            (true, _) => "create vectors",
            (false, 1) => "create point",
            (false, _) => "create points",
        };
        let mut d = self.draft(function, kind, intent, calls);
        d.thoughts = format!("{} from the given coordinates", d.outputs().join(", "));
        self.push(d);
        Ok(true)
    }

    fn create_spheres(&mut self, rest: &str) -> Step {
        let radius_kw = re!(
            r"(?i)\bradi(?:us|i)\b(?:\s+(?:of|is|are|=|equal\s+to))?\s*((?:{NUM})(?:\s*(?:,?\s*and\b|,)\s*(?:{NUM}))*)"
        );
        let center_kw = re!(r"(?i)\b(?:cent(?:er|re)(?:s|ed|d)?(?:\s+(?:at|on|in|of))?|at)\b");
        let Some(radius) = radius_kw.captures(rest) else {
            return Err(self.unrecognized());
        };
        let radii = numbers(&radius[1]);
        let Some(center) = center_kw.find(rest) else {
            return Err(self.unrecognized());
        };
        let end = if radius.get(0).unwrap().start() > center.end() {
            radius.get(0).unwrap().start()
        } else {
            rest.len()
        };
        let refs = point_refs(&rest[center.end()..end]);
        let n = refs.len();
        if n == 0 || !(radii.len() == n || radii.len() == 1) || self.explicit.len() > n {
            return Err(self.unrecognized());
        }
        let radius_of = |i: usize| if radii.len() == 1 { radii[0] } else { radii[i] };
        let anonymous = refs.iter().all(|r| matches!(r, PointRef::Coords(None, _)));
        let mut calls = Vec::new();
        let function = if anonymous {
            for (i, r) in refs.iter().enumerate() {
                let PointRef::Coords(_, [x, y, z]) = r else {
                    unreachable!()
                };
                let out = self.output("sphere");
                calls.push(DraftCall {
                    outputs: vec![out],
                    operands: vec![],
                    values: vec![("cx", *x), ("cy", *y), ("cz", *z), ("r", radius_of(i))],
                });
            }
            "createSphereAt"
        } else {
            let reserved: Vec<String> = self.explicit.clone();
            self.reserved.extend(reserved);
            let centers = self.materialize(refs)?;
            for (i, c) in centers.into_iter().enumerate() {
                let out = self.output("sphere");
                calls.push(DraftCall {
                    outputs: vec![out],
                    operands: vec![c],
                    values: vec![("r", radius_of(i))],
                });
            }
            "createSphere"
        };
        let intent = if calls.len() == 1 {
            "create sphere"
        } else {
            "create spheres"
        };
        let mut d = self.draft(function, "sphere", intent, calls);
        let radii_text: Vec<String> = d
            .calls
            .iter()
            .map(|c| c.values.last().unwrap().1.to_string())
            .collect();
        d.thoughts = format!("S = C - 1/2 r^2 einf with radii {}", radii_text.join(", "));
        self.push(d);
        Ok(true)
    }

    fn create_plane(&mut self, rest: &str) -> Step {
        let normal = re!(
            r"(?i)\bnormal\s*(?:vector\s*)?(?:of\s+)?\(\s*({NUM})\s*,\s*({NUM})\s*,\s*({NUM})\s*\)"
        );
        let distance = re!(r"(?i)\b(?:distance|offset|d)\s*(?:of\s+|=\s*|is\s+)?({NUM})");
        if let Some(c) = normal.captures(rest) {
            let [nx, ny, nz] = coords_at(&c, 1);
            let d = distance.captures(rest).map_or(0.0, |c| number(&c[1]));
            let out = self.output("plane");
            let call = DraftCall {
                outputs: vec![out],
                operands: vec![],
                values: vec![("nx", nx), ("ny", ny), ("nz", nz), ("d", d)],
            };
            let mut draft = self.draft("createPlane", "plane", "create plane", vec![call]);
            draft.thoughts = "plane n + d einf from its normal and distance".into();
            self.push(draft);
            return Ok(true);
        }
        self.create_through(rest, "createPlaneThroughPoints", "plane", 3)
    }

    fn create_through(
        &mut self,
        rest: &str,
        function: &'static str,
        kind: &str,
        count: usize,
    ) -> Step {
        let through = re!(r"(?i)\b(?:through|from|between|containing|connecting|with)\b");
        let Some(m) = through.find(rest) else {
            return Err(self.unrecognized());
        };
        let refs = point_refs(&rest[m.end()..]);
        if refs.len() != count {
            return Err(self.unrecognized());
        }
        let out = self.explicit.first().cloned();
        if let Some(o) = &out {
            self.reserved.insert(o.clone());
        }
        let points = self.materialize(refs)?;
        let out = match out {
            Some(o) => {
                self.explicit.remove(0);
                o
            }
            None => self.fresh(kind),
        };
        let intent = match kind {
            "line" => "create line",
            "circle" => "create circle",
            "plane" => "create plane",
            _ => "create point pair",
        };
        let mut d = self.draft(
            function,
            kind,
            intent,
            vec![DraftCall {
                outputs: vec![out],
                operands: points,
                values: vec![],
            }],
        );
        d.thoughts = format!(
            "{} through {}",
            kind.replace('_', " "),
            d.calls[0].operands.join(", ")
        );
        self.push(d);
        Ok(true)
    }

    fn create_translator(&mut self, rest: &str) -> Step {
        let items = coord_items(rest);
        let [(_, [x, y, z])] = items.as_slice() else {
            return Err(self.unrecognized());
        };
        let out = self.output("versor");
        let call = DraftCall {
            outputs: vec![out],
            operands: vec![],
            values: vec![("tx", *x), ("ty", *y), ("tz", *z)],
        };
        let mut d = self.draft(
            "createTranslator",
            "versor",
            "create translator",
            vec![call],
        );
        d.thoughts = "T = 1 - 1/2 t einf".into();
        self.push(d);
        Ok(true)
    }

    fn last_of_kind(&self, kind: Option<&str>, count: usize) -> Vec<String> {
        let mut found: Vec<String> = Vec::new();
        for (name, k) in self.produced.iter().rev() {
            if kind.is_none_or(|want| want == k) && !found.contains(name) {
                found.push(name.clone());
            }
            if found.len() == count {
                break;
            }
        }
        found.reverse();
        found
    }

    fn intersect(&mut self, text: &str) -> Step {
        let Some(m) = re!(r"(?i)\bintersect(?:ion|ing|s)?\b").find(text) else {
            return Ok(false);
        };
        let named = re!(
            r"(?i)\bintersection\s+(?:points?|circle|line|point\s+pair|pair|objects?)\s+({NAME}(?:\s*(?:,?\s*and\b|,)\s*{NAME})*)"
        );
        let mut outputs: Vec<String> = named
            .captures(text)
            .map(|c| leading_names(&c[1]))
            .unwrap_or_default();
        outputs.extend(std::mem::take(&mut self.explicit));
        let group = re!(
            r"(?i)\b(?:of|between)\s+(?:the\s+|all\s+)*(two|three|both|2|3)?\s*(spheres|balls|planes|circles|lines|objects)\b"
        );
        let operands = match group.captures(text) {
            Some(c) if leading_names(&text[c.get(0).unwrap().end()..]).is_empty() => {
                let count = match c.get(1).map(|g| g.as_str().to_ascii_lowercase()) {
                    Some(n) if n == "three" || n == "3" => 3,
                    _ => 2,
                };
                let kind = match c[2].to_ascii_lowercase().as_str() {
                    "spheres" | "balls" => Some("sphere"),
                    "planes" => Some("plane"),
                    "circles" => Some("circle"),
                    "lines" => Some("line"),
                    _ => None,
                };
                self.last_of_kind(kind, count)
            }
            _ => {
                let after = re!(r"(?i)\b(?:of|between)\b")
                    .find_at(text, m.start())
                    .map_or(m.end(), |o| o.end());
                leading_names(&text[after..])
            }
        };
        for o in &operands {
            self.require(o)?;
        }
        let kinds: Vec<&str> = operands.iter().filter_map(|o| self.kind_of(o)).collect();
        let draft = match operands.len() {
            3 => {
                let first = if outputs.is_empty() {
                    self.fresh("point")
                } else {
                    outputs.remove(0)
                };
                let second = if outputs.is_empty() {
                    self.fresh("point")
                } else {
                    outputs.remove(0)
                };
                let call = DraftCall {
                    outputs: vec![first, second],
                    operands: operands.clone(),
                    values: vec![],
                };
                let mut d = self.draft("intersectThree", "point", "intersect", vec![call]);
                d.thoughts = format!(
                    "the meet {} is a point pair; split it into its two points",
                    operands.join(" ^ ")
                );
                d.title = format!(
                    "Intersect {} into {}",
                    operands.join(", "),
                    d.outputs().join(", ")
                );
                d
            }
            2 => {
                let kind = match kinds.as_slice() {
                    ["sphere" | "plane", "sphere"] | ["sphere", "plane"] => "circle",
                    ["plane", "plane"] => "line",
                    ["line", "plane"]
                    | ["plane", "line"]
                    | ["line", "sphere"]
                    | ["sphere", "line"] => "point_pair",
                    _ => "multivector",
                };
                let out = if outputs.is_empty() {
                    self.fresh(kind)
                } else {
                    outputs.remove(0)
                };
                let call = DraftCall {
                    outputs: vec![out],
                    operands: operands.clone(),
                    values: vec![],
                };
                let mut d = self.draft("intersect", kind, "intersect", vec![call]);
                d.thoughts = format!(
                    "the meet of IPNS objects is their outer product {}",
                    operands.join(" ^ ")
                );
                d
            }
            _ => return Err(self.unrecognized()),
        };
        self.push(draft);
        Ok(true)
    }

    fn split(&mut self, text: &str) -> Step {
        let Some(c) =
            re!(r"(?i)\bsplit\s+(?:the\s+)?(?:point\s+pair\s+)?({NAME})(?:\s+into\s+(.*))?")
                .captures(text)
        else {
            return Ok(false);
        };
        let pair = c[1].to_string();
        self.require(&pair)?;
        let mut outs = c
            .get(2)
            .map(|g| leading_names(g.as_str()))
            .unwrap_or_default();
        outs.extend(std::mem::take(&mut self.explicit));
        while outs.len() < 2 {
            outs.push(self.fresh("point"));
        }
        outs.truncate(2);
        let mut d = self.draft(
            "splitPointPair",
            "point",
            "split",
            vec![DraftCall {
                outputs: outs,
                operands: vec![pair],
                values: vec![],
            }],
        );
        d.thoughts = "a point pair holds two points, one per sign of the root".into();
        self.push(d);
        Ok(true)
    }

    fn with_values(&mut self, text: &str) -> Step {
        let translate = re!(
            r"(?i)\b(?:translate|move|shift)\s+(?:the\s+)?(?:{NOUN}\s+)?({NAME})\s+by\s+(?:the\s+)?(?:vector\s+|offset\s+)?\(\s*({NUM})\s*,\s*({NUM})\s*,\s*({NUM})\s*\)"
        );
        let rotate = re!(
            r"(?i)\brotate\s+(?:the\s+)?(?:{NOUN}\s+)?({NAME})\s+by\s+({NUM})\s*(degrees?|deg|radians?|rad)?\s+(?:about|around)\s+(?:the\s+)?([xyz])[\s-]*axis"
        );
        let scale = re!(
            r"(?i)\b(?:scale|multiply)\s+(?:the\s+)?(?:{NOUN}\s+)?({NAME})\s+by\s+(?:the\s+)?(?:scalar\s+|factor\s+)?({NUM})"
        );
        let (function, intent, operand, values, thoughts) =
            if let Some(c) = translate.captures(text) {
                let [tx, ty, tz] = coords_at(&c, 2);
                (
                    "translate",
                    "translate",
                    c[1].to_string(),
                    vec![("tx", tx), ("ty", ty), ("tz", tz)],
                    "T X ~T with T = 1 - 1/2 t einf".to_string(),
                )
            } else if let Some(c) = rotate.captures(text) {
                let mut angle = number(&c[2]);
                if c.get(3)
                    .is_some_and(|u| u.as_str().to_ascii_lowercase().starts_with("deg"))
                {
                    angle = angle.to_radians();
                }
                let (function, plane) = match c[4].to_ascii_lowercase().as_str() {
                    "x" => ("rotateX", "e2 ^ e3"),
                    "y" => ("rotateY", "e3 ^ e1"),
                    _ => ("rotateZ", "e1 ^ e2"),
                };
                (
                    function,
                    "rotate",
                    c[1].to_string(),
                    vec![("angle", angle)],
                    format!("R X ~R with R = cos(a/2) - sin(a/2) {plane}"),
                )
            } else if let Some(c) = scale.captures(text) {
                (
                    "scale",
                    "scale",
                    c[1].to_string(),
                    vec![("k", number(&c[2]))],
                    "k X".to_string(),
                )
            } else {
                return Ok(false);
            };
        self.require(&operand)?;
        let kind = if function == "scale" {
            "multivector".to_string()
        } else {
            self.kind_of(&operand).unwrap_or("multivector").to_string()
        };
        let out = self.output(&kind);
        let mut d = self.draft(
            function,
            &kind,
            intent,
            vec![DraftCall {
                outputs: vec![out],
                operands: vec![operand],
                values,
            }],
        );
        d.thoughts = thoughts;
        self.push(d);
        Ok(true)
    }

    fn binary(&mut self, text: &str) -> Step {
        // (pattern, function, intent, swap operands, output kind; None keeps the first operand's kind)
        type Entry = (
            &'static LazyLock<Regex>,
            &'static str,
            &'static str,
            bool,
            Option<&'static str>,
        );
        macro_rules! pat {
            ($p:literal) => {{
                static RE: LazyLock<Regex> = LazyLock::new(|| {
                    let x = format!(r"(?:the\s+)?(?:{NOUN}\s+)?({NAME})");
                    Regex::new(&$p.replace("{x}", &x)).unwrap()
                });
                &RE
            }};
        }
        let table: [Entry; 12] = [
            (
                pat!(r"(?i)\bgeometric\s+product\s+(?:of|between)\s+{x}\s+and\s+{x}"),
                "geometricProduct",
                "geometric product",
                false,
                Some("multivector"),
            ),
            (
                pat!(
                    r"(?i)\b(?:outer|wedge|exterior)\s+product\s+(?:of|between)\s+{x}\s+and\s+{x}"
                ),
                "outerProduct",
                "outer product",
                false,
                Some("multivector"),
            ),
            (
                pat!(
                    r"(?i)\b(?:inner\s+product|left\s+contraction)\s+(?:of|between)\s+{x}\s+(?:and|onto|on)\s+{x}"
                ),
                "innerProduct",
                "inner product",
                false,
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\bsum\s+of\s+{x}\s+and\s+{x}"),
                "add",
                "add",
                false,
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\badd\s+{x}\s+(?:and|to)\s+{x}"),
                "add",
                "add",
                false,
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\bdifference\s+(?:of|between)\s+{x}\s+and\s+{x}"),
                "subtract",
                "subtract",
                false,
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\bsubtract\s+{x}\s+from\s+{x}"),
                "subtract",
                "subtract",
                true,
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\bdivide\s+{x}\s+by\s+{x}"),
                "divide",
                "divide",
                false,
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\bdistance\s+between\s+{x}\s+and\s+{x}"),
                "distance",
                "distance",
                false,
                Some("scalar"),
            ),
            (
                pat!(r"(?i)\b(?:reflect|mirror)\s+{x}\s+(?:in|across|through|about|over)\s+{x}"),
                "reflect",
                "reflect",
                false,
                None,
            ),
            (
                pat!(r"(?i)\bproject\s+{x}\s+(?:onto|on)\s+{x}"),
                "project",
                "project",
                false,
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\bapply\s+{x}\s+to\s+{x}"),
                "applyVersor",
                "apply versor",
                false,
                None,
            ),
        ];
        for (pattern, function, intent, swap, kind) in table {
            let Some(c) = pattern.captures(text) else {
                continue;
            };
            let (a, b) = if swap {
                (c[2].to_string(), c[1].to_string())
            } else {
                (c[1].to_string(), c[2].to_string())
            };
            self.require(&a)?;
            self.require(&b)?;
            let kind = match kind {
                Some(k) => k.to_string(),
                None if function == "applyVersor" => {
                    self.kind_of(&b).unwrap_or("multivector").to_string()
                }
                None => self.kind_of(&a).unwrap_or("multivector").to_string(),
            };
            let out = self.output(&kind);
            let mut d = self.draft(
                function,
                &kind,
                intent,
                vec![DraftCall {
                    outputs: vec![out],
                    operands: vec![a, b],
                    values: vec![],
                }],
            );
            d.thoughts = format!("{} of {}", intent, d.calls[0].operands.join(" and "));
            self.push(d);
            return Ok(true);
        }
        Ok(false)
    }

    fn unary(&mut self, text: &str) -> Step {
        type Entry = (
            &'static LazyLock<Regex>,
            &'static str,
            &'static str,
            Option<&'static str>,
        );
        macro_rules! pat {
            ($p:literal) => {{
                static RE: LazyLock<Regex> = LazyLock::new(|| {
                    let x = format!(r"(?:the\s+)?(?:{NOUN}\s+)?({NAME})");
                    Regex::new(&$p.replace("{x}", &x)).unwrap()
                });
                &RE
            }};
        }
        let table: [Entry; 10] = [
            (
                pat!(r"(?i)\bnormali[sz]e\s+{x}"),
                "normalize",
                "normalize",
                None,
            ),
            (
                pat!(r"(?i)\b(?:norm|magnitude|length)\s+of\s+{x}"),
                "norm",
                "norm",
                Some("scalar"),
            ),
            (
                pat!(r"(?i)\bradius\s+of\s+{x}"),
                "sphereRadius",
                "radius",
                Some("scalar"),
            ),
            (
                pat!(r"(?i)\bsquare\s+root\s+of\s+{x}"),
                "squareRoot",
                "square root",
                Some("scalar"),
            ),
            (
                pat!(r"(?i)\babsolute\s+value\s+of\s+{x}"),
                "absoluteValue",
                "absolute value",
                Some("scalar"),
            ),
            (
                pat!(r"(?i)\breciprocal\s+of\s+{x}"),
                "reciprocal",
                "reciprocal",
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\b(?:reverse|reversion)\s+(?:of\s+)?{x}"),
                "reverse",
                "reverse",
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\bdual(?:i[sz]e)?\s+(?:of\s+)?{x}"),
                "dual",
                "dual",
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\b(?:inverse\s+of|invert)\s+{x}"),
                "inverse",
                "inverse",
                Some("multivector"),
            ),
            (
                pat!(r"(?i)\b(?:negate|negative\s+of|negation\s+of)\s+{x}"),
                "negate",
                "negate",
                None,
            ),
        ];
        for (pattern, function, intent, kind) in table {
            let Some(c) = pattern.captures(text) else {
                continue;
            };
            let a = c[1].to_string();
            self.require(&a)?;
            let kind = kind
                .map(str::to_string)
                .unwrap_or_else(|| self.kind_of(&a).unwrap_or("multivector").to_string());
            let out = self.output(&kind);
            let mut d = self.draft(
                function,
                &kind,
                intent,
                vec![DraftCall {
                    outputs: vec![out],
                    operands: vec![a],
                    values: vec![],
                }],
            );
            d.thoughts = format!("{} of {}", intent, d.calls[0].operands[0]);
            self.push(d);
            return Ok(true);
        }
        Ok(false)
    }

    fn clause(&mut self, original: &str) -> Result<(), PlanError> {
        self.clause = original.to_string();
        let mut text = strip_connectives(original);
        if text.is_empty() {
            return Ok(());
        }
        let colors = extract_colors(&mut text);
        self.explicit = extract_outputs(&mut text);
        let before = self.drafts.len();
        let text = text.trim().to_string();
        let matched = !text.is_empty()
            && (self.create(&text)?
                || self.intersect(&text)?
                || self.split(&text)?
                || self.with_values(&text)?
                || self.binary(&text)?
                || self.unary(&text)?);
        if !matched
            && (colors.is_empty()
                || re!(r"[A-Za-z]").is_match(&text)
                    && !re!(r"(?i)^(?:and\s+)?(?:visuali[sz]e|show|draw|display)?$")
                        .is_match(&text))
        {
            return Err(self.unrecognized());
        }
        let primary: Vec<String> = if self.drafts.len() > before {
            self.drafts.last().unwrap().outputs()
        } else {
            Vec::new()
        };
        for directive in colors {
            let names = if directive.names.is_empty() {
                primary.clone()
            } else {
                directive.names
            };
            if names.is_empty()
                || !(directive.colors.len() == names.len() || directive.colors.len() == 1)
            {
                return Err(self.unrecognized());
            }
            for (i, name) in names.iter().enumerate() {
                let color =
                    directive.colors[if directive.colors.len() == 1 { 0 } else { i }].clone();
                let Some(draft) = self
                    .drafts
                    .iter_mut()
                    .rev()
                    .find(|d| d.outputs().contains(name))
                else {
                    return Err(PlanError::UnknownObject {
                        clause: self.clause.clone(),
                        name: name.clone(),
                    });
                };
                draft.visualization.retain(|v| &v.variable != name);
                draft.visualization.push(VisualizationSetting {
                    variable: name.clone(),
                    color,
                });
            }
        }
        Ok(())
    }
}

/// Returns the requested code language when the sentence only asks for one.
fn language_request(sentence: &str) -> Option<String> {
    let ask = re!(
        r"(?i)^(?:i\s+(?:need|want|would\s+like)|please\s+(?:give|generate|write|output|produce)|give\s+me|output|generate|emit|produce|write)\b.*?\b([A-Za-z][A-Za-z0-9+#-]*)\s+code\b"
    );
    ask.captures(sentence.trim()).map(|c| c[1].to_string())
}

/// Plans a request with the deterministic template planner.
pub fn plan(request: &PlanRequest) -> Result<Plan, PlanError> {
    if request.description.trim().is_empty() {
        return Err(PlanError::EmptyDescription);
    }
    let space = Signature::from_name(&request.space)
        .map_err(|_| PlanError::UnsupportedSpace(request.space.clone()))?;
    let mut language = request.language.clone();
    let (text, mut formulas) = detex(&request.description);
    if let Some(f) = &request.formula {
        if !f.trim().is_empty() {
            formulas.insert(0, f.trim().trim_matches('$').to_string());
        }
    }

    let reserved: BTreeSet<String> = re!("{NAME}")
        .find_iter(&text)
        .map(|m| m.as_str().to_string())
        .collect();
    let mut b = Builder {
        reserved,
        counters: HashMap::new(),
        produced: Vec::new(),
        drafts: Vec::new(),
        clause: String::new(),
        explicit: Vec::new(),
    };
    for sentence in sentences(&text) {
        if let Some(lang) = language_request(&sentence) {
            language = lang;
            continue;
        }
        for clause in clauses(&sentence) {
            b.clause(&clause)?;
        }
    }
    let style = EmissionStyle::from_name(&language)
        .ok_or_else(|| PlanError::UnsupportedLanguage(language.clone()))?;
    if b.drafts.is_empty() {
        return Err(PlanError::UnrecognizedIntent {
            clause: request.description.trim().to_string(),
        });
    }

    let registry = Registry::shared();
    let mut subtasks: Vec<SubtaskRecord> = Vec::new();
    let mut trace = ReActTrace::default();
    let mut producer: BTreeMap<String, String> = BTreeMap::new();
    for (i, d) in b.drafts.iter().enumerate() {
        let id = format!("T{}", i + 1);
        let spec = registry
            .get(d.function)
            .expect("planner functions are registered");
        let mut depends_on: Vec<String> = Vec::new();
        for operand in d.calls.iter().flat_map(|c| &c.operands) {
            if let Some(p) = producer.get(operand) {
                if !depends_on.contains(p) {
                    depends_on.push(p.clone());
                }
            }
        }
        let mut specific_values = BTreeMap::new();
        for call in &d.calls {
            for (param, value) in &call.values {
                specific_values.insert(format!("{}_{param}", call.outputs[0]), *value);
            }
        }
        let outputs = d.outputs();
        let mut observation = format!("\"{}\" asks to {}.", d.clause, d.intent);
        if i == 0 && !formulas.is_empty() {
            observation.push_str(&format!(" Formula: {}.", formulas.join("; ")));
        }
        if !specific_values.is_empty() {
            let vals: Vec<String> = specific_values
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            observation.push_str(&format!(" Values: {}.", vals.join(", ")));
        }
        let mut thoughts = format!("{}: {}", spec.category.label(), d.thoughts);
        if !depends_on.is_empty() {
            thoughts.push_str(&format!("; needs {}", depends_on.join(", ")));
        }
        thoughts.push('.');
        let mut action = format!("{id} {} -> {}", d.function, outputs.join(", "));
        if !d.visualization.is_empty() {
            let v: Vec<String> = d
                .visualization
                .iter()
                .map(|v| format!("{} {}", v.variable, v.color))
                .collect();
            action.push_str(&format!(" (draw {})", v.join(", ")));
        }
        trace.cycle(observation, thoughts, action);
        for o in &outputs {
            producer.insert(o.clone(), id.clone());
        }
        subtasks.push(SubtaskRecord {
            task_id: id,
            task_name: d.title.clone(),
            task_description: d.clause.clone(),
            variable_names: outputs,
            code_language: style.name().to_string(),
            ga_type: space.name(),
            specific_values,
            visualization: d.visualization.clone(),
            category: spec.category,
            depends_on,
            operation: d.function.to_string(),
            operands: d.calls.iter().map(|c| c.operands.clone()).collect(),
        });
    }
    let plan = Plan {
        source: request.clone(),
        subtasks,
        trace,
    };
    debug_assert!(plan.check().is_ok() && plan.unresolved_operands().is_empty());
    Ok(plan)
}
