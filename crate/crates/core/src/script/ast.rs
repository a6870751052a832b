use serde::{Deserialize, Serialize};

use super::Span;

/// A parsed script: an ordered list of statements.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Script {
    pub statements: Vec<Stmt>,
}

/// Statement with its source span. Equality ignores spans.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    Assign {
        name: Name,
        optimize: bool,
        expr: Expr,
    },
    Draw {
        name: Name,
        color: Option<ColorSpec>,
    },
    Comment(String),
}

/// Identifier occurrence. Equality ignores the span.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

impl Name {
    pub fn new(text: impl Into<String>, span: Span) -> Self {
        Name {
            text: text.into(),
            span,
        }
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColorSpec {
    /// A color keyword, or an identifier the validator will reject.
    Named(String),
    Rgb(f64, f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Literal value of `n` or `-n`.
    pub fn literal(&self) -> Option<f64> {
        match &self.kind {
            ExprKind::Num(v) => Some(*v),
            ExprKind::Unary(UnaryOp::Neg, inner) => match inner.kind {
                ExprKind::Num(v) => Some(-v),
                _ => None,
            },
            _ => None,
        }
    }

    /// Visits this expression and all subexpressions in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Unary(_, a) => a.walk(f),
            ExprKind::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Num(_) | ExprKind::Ident(_) | ExprKind::Basis(_) => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExprKind {
    Num(f64),
    Ident(String),
    Basis(BasisVec),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call { name: String, args: Vec<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisVec {
    E1,
    E2,
    E3,
    Einf,
    E0,
}

impl BasisVec {
    pub const ALL: [BasisVec; 5] = [
        BasisVec::E1,
        BasisVec::E2,
        BasisVec::E3,
        BasisVec::Einf,
        BasisVec::E0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisVec::E1 => "e1",
            BasisVec::E2 => "e2",
            BasisVec::E3 => "e3",
            BasisVec::Einf => "einf",
            BasisVec::E0 => "e0",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    Reverse,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Reverse => "~",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Gp,
    Wedge,
    Lcont,
    Div,
    Add,
    Sub,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Gp => "*",
            BinaryOp::Wedge => "^",
            BinaryOp::Lcont => ".",
            BinaryOp::Div => "/",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
        }
    }

    /// 1 for additive operators, 2 for products.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            _ => 2,
        }
    }
}
