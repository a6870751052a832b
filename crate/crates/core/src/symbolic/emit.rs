//! Text renderings of [`ScalarExpr`]: Python infix and the JSON IR.

use serde::{Deserialize, Serialize};

use super::ScalarExpr;

/// Output flavour for generated code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EmissionStyle {
    #[serde(rename = "python")]
    Python,
    #[serde(rename = "json-ir")]
    JsonIr,
}

impl EmissionStyle {
    pub fn name(self) -> &'static str {
        match self {
            EmissionStyle::Python => "python",
            EmissionStyle::JsonIr => "json-ir",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "python" | "py" => Some(EmissionStyle::Python),
            "json-ir" | "json" | "ir" => Some(EmissionStyle::JsonIr),
            _ => None,
        }
    }
}

const PY_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield", "math", "abs",
];

/// Python-safe spelling of a script identifier.
pub fn python_identifier(name: &str) -> String {
    if PY_KEYWORDS.contains(&name) {
        format!("{name}_")
    } else {
        name.to_string()
    }
}

/// Python literal for a float; always contains a `.` or exponent.
pub fn python_float(value: f64) -> String {
    if value.is_nan() {
        "float('nan')".to_string()
    } else if value.is_infinite() {
        if value > 0.0 {
            "float('inf')"
        } else {
            "-float('inf')"
        }
        .to_string()
    } else {
        format!("{value:?}")
    }
}

// binding strength of the rendered form
const ADD: u8 = 1;
const MUL: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn wrap(rendered: (String, u8), parenthesize: bool) -> String {
    if parenthesize {
        format!("({})", rendered.0)
    } else {
        rendered.0
    }
}

/// The positive counterpart of a term that renders with a leading minus.
fn subtracted(term: &ScalarExpr) -> Option<ScalarExpr> {
    match term {
        ScalarExpr::Neg(a) => Some((**a).clone()),
        ScalarExpr::Const(c) if *c < 0.0 => Some(ScalarExpr::Const(-c)),
        ScalarExpr::Mul(factors) => match factors.first() {
            Some(ScalarExpr::Const(c)) if *c < 0.0 => {
                let mut positive = factors.clone();
                positive[0] = ScalarExpr::Const(-c);
                Some(ScalarExpr::Mul(positive))
            }
            _ => None,
        },
        _ => None,
    }
}

fn render_python(e: &ScalarExpr) -> (String, u8) {
    use ScalarExpr::*;
    match e {
        Const(c) => (python_float(*c), if *c < 0.0 { UNARY } else { ATOM }),
        Var(name) => (python_identifier(name), ATOM),
        Add(terms) => {
            let mut out = String::new();
            for (i, t) in terms.iter().enumerate() {
                if i == 0 {
                    let r = render_python(t);
                    let p = r.1 < ADD;
                    out.push_str(&wrap(r, p));
                } else if let Some(pos) = subtracted(t) {
                    let r = render_python(&pos);
                    let p = r.1 <= ADD;
                    out.push_str(" - ");
                    out.push_str(&wrap(r, p));
                } else {
                    let r = render_python(t);
                    let p = r.1 <= ADD;
                    out.push_str(" + ");
                    out.push_str(&wrap(r, p));
                }
            }
            (out, ADD)
        }
        Mul(factors) => {
            let parts: Vec<String> = factors
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let r = render_python(f);
                    let p = if i == 0 { r.1 < MUL } else { r.1 <= MUL };
                    wrap(r, p)
                })
                .collect();
            (parts.join(" * "), MUL)
        }
        Div(n, d) => {
            let rn = render_python(n);
            let pn = rn.1 < MUL;
            let rd = render_python(d);
            let pd = rd.1 <= MUL;
            (format!("{} / {}", wrap(rn, pn), wrap(rd, pd)), MUL)
        }
        Neg(a) => {
            let r = render_python(a);
            let p = r.1 < UNARY;
            (format!("-{}", wrap(r, p)), UNARY)
        }
        Pow(b, n) => {
            let r = render_python(b);
            let p = r.1 <= POW;
            (format!("{}**{}", wrap(r, p), n), POW)
        }
        Sqrt(a) => (format!("math.sqrt({})", render_python(a).0), ATOM),
        Abs(a) => (format!("abs({})", render_python(a).0), ATOM),
        Sin(a) => (format!("math.sin({})", render_python(a).0), ATOM),
        Cos(a) => (format!("math.cos({})", render_python(a).0), ATOM),
    }
}

/// Node of the JSON IR: `{"op": ..., "args": [...]}`, with `value` on
/// constants, `name` on variables and `exponent` on powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrNode {
    pub op: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<IrNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid IR node: {0}")]
pub struct IrError(pub String);

impl IrNode {
    fn node(op: &str, args: Vec<IrNode>) -> Self {
        IrNode {
            op: op.to_string(),
            args,
            value: None,
            name: None,
            exponent: None,
        }
    }

    pub fn from_expr(e: &ScalarExpr) -> Self {
        use ScalarExpr::*;
        match e {
            Const(c) => IrNode {
                value: Some(*c),
                ..Self::node("const", vec![])
            },
            Var(name) => IrNode {
                name: Some(name.clone()),
                ..Self::node("var", vec![])
            },
            Add(ts) => Self::node("add", ts.iter().map(Self::from_expr).collect()),
            Mul(fs) => Self::node("mul", fs.iter().map(Self::from_expr).collect()),
            Neg(a) => Self::node("neg", vec![Self::from_expr(a)]),
            Div(n, d) => Self::node("div", vec![Self::from_expr(n), Self::from_expr(d)]),
            Pow(b, n) => IrNode {
                exponent: Some(*n),
                ..Self::node("pow", vec![Self::from_expr(b)])
            },
            Sqrt(a) => Self::node("sqrt", vec![Self::from_expr(a)]),
            Abs(a) => Self::node("abs", vec![Self::from_expr(a)]),
            Sin(a) => Self::node("sin", vec![Self::from_expr(a)]),
            Cos(a) => Self::node("cos", vec![Self::from_expr(a)]),
        }
    }

    pub fn to_expr(&self) -> Result<ScalarExpr, IrError> {
        use ScalarExpr::*;
        let args = self
            .args
            .iter()
            .map(IrNode::to_expr)
            .collect::<Result<Vec<_>, _>>()?;
        let unary = |mut args: Vec<ScalarExpr>| -> Result<Box<ScalarExpr>, IrError> {
            if args.len() == 1 {
                Ok(Box::new(args.pop().unwrap()))
            } else {
                Err(IrError(format!("`{}` takes one argument", self.op)))
            }
        };
        Ok(match self.op.as_str() {
            "const" => Const(
                self.value
                    .ok_or_else(|| IrError("const without value".into()))?,
            ),
            "var" => Var(self
                .name
                .clone()
                .ok_or_else(|| IrError("var without name".into()))?),
            "add" => Add(args),
            "mul" => Mul(args),
            "neg" => Neg(unary(args)?),
            "div" => {
                let mut args = args;
                if args.len() != 2 {
                    return Err(IrError("div takes two arguments".into()));
                }
                let d = args.pop().unwrap();
                let n = args.pop().unwrap();
                Div(Box::new(n), Box::new(d))
            }
            "pow" => Pow(
                unary(args)?,
                self.exponent
                    .ok_or_else(|| IrError("pow without exponent".into()))?,
            ),
            "sqrt" => Sqrt(unary(args)?),
            "abs" => Abs(unary(args)?),
            "sin" => Sin(unary(args)?),
            "cos" => Cos(unary(args)?),
            other => return Err(IrError(format!("unknown op `{other}`"))),
        })
    }
}

impl ScalarExpr {
    /// Renders the expression in the given style.
    ///
    /// Python output uses minimal parentheses and the `math` module for
    /// `sqrt`, `sin` and `cos`; JSON IR output is a single-line document.
    pub fn emit(&self, style: EmissionStyle) -> String {
        match style {
            EmissionStyle::Python => render_python(self).0,
            EmissionStyle::JsonIr => {
                serde_json::to_string(&IrNode::from_expr(self)).expect("IR serializes")
            }
        }
    }

    pub fn to_python(&self) -> String {
        self.emit(EmissionStyle::Python)
    }
}

impl Serialize for ScalarExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        IrNode::from_expr(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ScalarExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        IrNode::deserialize(deserializer)?
            .to_expr()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ScalarExpr::*;

    fn v(n: &str) -> ScalarExpr {
        ScalarExpr::var(n)
    }

    #[test]
    fn python_minimal_parentheses() {
        let e = Mul(vec![
            Const(0.5),
            Add(vec![Pow(Box::new(v("x")), 2), Pow(Box::new(v("y")), 2)]),
        ]);
        assert_eq!(e.to_python(), "0.5 * (x**2 + y**2)");
        assert_eq!(Const(-1.0).to_python(), "-1.0");
        assert_eq!(Sqrt(Box::new(v("x"))).to_python(), "math.sqrt(x)");
        let sub = Add(vec![v("a"), Neg(Box::new(Add(vec![v("b"), v("c")])))]);
        assert_eq!(sub.to_python(), "a - (b + c)");
        let neg_base = Pow(Box::new(Neg(Box::new(v("x")))), 2);
        assert_eq!(neg_base.to_python(), "(-x)**2");
        let quotient = Div(Box::new(v("a")), Box::new(Mul(vec![v("b"), v("c")])));
        assert_eq!(quotient.to_python(), "a / (b * c)");
        let scaled = Add(vec![v("a"), Mul(vec![Const(-2.0), v("b")])]);
        assert_eq!(scaled.to_python(), "a - 2.0 * b");
        assert_eq!(v("lambda").to_python(), "lambda_");
    }

    #[test]
    fn json_ir_round_trip() {
        let e = Add(vec![
            Mul(vec![Const(0.5), Pow(Box::new(v("x")), 2)]),
            Sqrt(Box::new(Abs(Box::new(v("y"))))),
            Neg(Box::new(Div(
                Box::new(Cos(Box::new(v("t")))),
                Box::new(Sin(Box::new(v("t")))),
            ))),
        ]);
        let text = e.emit(EmissionStyle::JsonIr);
        let back: ScalarExpr = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
        assert_eq!(
            Const(2.0).emit(EmissionStyle::JsonIr),
            r#"{"op":"const","value":2.0}"#
        );
        assert!(serde_json::from_str::<ScalarExpr>(r#"{"op":"frob"}"#).is_err());
    }
}
