//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use gavis::algebra::Signature;
use gavis::script::{
    BasisVec, BinaryOp, ColorSpec, Expr, ExprKind, Name, Script, Span, Stmt, StmtKind, UnaryOp,
    COLOR_NAMES,
};
use proptest::prelude::*;

/// Brute-force product: blades as index lists, sorted by adjacent swaps,
/// equal neighbours contracted through the metric.
pub fn oracle_gp(a: &[f64], b: &[f64], squares: &[f64]) -> Vec<f64> {
    let n = squares.len();
    let mut out = vec![0.0; 1 << n];
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            if *ca == 0.0 || *cb == 0.0 {
                continue;
            }
            let mut word: Vec<usize> = (0..n).filter(|k| i >> k & 1 == 1).collect();
            word.extend((0..n).filter(|k| j >> k & 1 == 1));
            let mut sign = 1.0;
            let mut sorted = false;
            while !sorted {
                sorted = true;
                for k in 1..word.len() {
                    if word[k - 1] > word[k] {
                        word.swap(k - 1, k);
                        sign = -sign;
                        sorted = false;
                    }
                }
            }
            let mut reduced: Vec<usize> = Vec::new();
            for idx in word {
                if reduced.last() == Some(&idx) {
                    reduced.pop();
                    sign *= squares[idx];
                } else {
                    reduced.push(idx);
                }
            }
            let mask: usize = reduced.iter().map(|k| 1 << k).sum();
            out[mask] += sign * ca * cb;
        }
    }
    out
}

pub fn squares(sig: Signature) -> Vec<f64> {
    (0..sig.dimension()).map(|i| sig.square(i) as f64).collect()
}

pub fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,6}".prop_filter("reserved word", |s| {
        !COLOR_NAMES.contains(&s.as_str())
            && !BasisVec::ALL.iter().any(|b| b.name() == s)
            && s != "rgb"
    })
}

pub fn expr(kind: ExprKind) -> Expr {
    Expr::new(kind, Span::default())
}

pub fn number() -> impl Strategy<Value = f64> {
    prop_oneof![(0u32..1000).prop_map(f64::from), 0.0..1e6f64, 1e-9..1.0f64]
}

pub fn expression() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        number().prop_map(|v| expr(ExprKind::Num(v))),
        ident().prop_map(|n| expr(ExprKind::Ident(n))),
        prop::sample::select(BasisVec::ALL.to_vec()).prop_map(|b| expr(ExprKind::Basis(b))),
    ];
    let binary = [
        BinaryOp::Gp,
        BinaryOp::Wedge,
        BinaryOp::Lcont,
        BinaryOp::Div,
        BinaryOp::Add,
        BinaryOp::Sub,
    ];
    leaf.prop_recursive(5, 40, 4, move |inner| {
        prop_oneof![
            (
                prop::sample::select(vec![UnaryOp::Neg, UnaryOp::Reverse]),
                inner.clone()
            )
                .prop_map(|(op, a)| expr(ExprKind::Unary(op, Box::new(a)))),
            (
                prop::sample::select(binary.to_vec()),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| expr(ExprKind::Binary(
                    op,
                    Box::new(a),
                    Box::new(b)
                ))),
            (ident(), prop::collection::vec(inner, 0..4))
                .prop_map(|(name, args)| expr(ExprKind::Call { name, args })),
        ]
    })
}

pub fn color() -> impl Strategy<Value = Option<ColorSpec>> {
    prop_oneof![
        Just(None),
        prop::sample::select(COLOR_NAMES.to_vec())
            .prop_map(|c| Some(ColorSpec::Named(c.to_string()))),
        prop::array::uniform3(0.0..=1.0f64).prop_map(|[r, g, b]| Some(ColorSpec::Rgb(r, g, b))),
    ]
}

pub fn statement() -> impl Strategy<Value = Stmt> {
    let kind = prop_oneof![
        4 => (ident(), any::<bool>(), expression())
            .prop_map(|(n, optimize, expr)| StmtKind::Assign { name: Name::new(n, Span::default()), optimize, expr }),
        1 => (ident(), color()).prop_map(|(n, color)| StmtKind::Draw { name: Name::new(n, Span::default()), color }),
        1 => "[ A-Za-z0-9=;?:.]{0,24}".prop_map(StmtKind::Comment),
    ];
    kind.prop_map(|kind| Stmt {
        kind,
        span: Span::default(),
    })
}

pub fn script() -> impl Strategy<Value = Script> {
    prop::collection::vec(statement(), 0..8).prop_map(|statements| Script { statements })
}

/// Source-like text: mostly script tokens, some stray characters.
pub fn noisy_source() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        8 => prop::sample::select(vec![
            "P", "S1", "x", " = ", ";", "?", ":", "(", ")", ",", " + ", " - ", " * ", " ^ ", " . ", " / ", "~",
            "e1", "e2", "einf", "e0", "1.5", "0.5", "2", "blue", "rgb(1, 0, 0)", "sqrt", "createPoint", "\n",
            "// note\n", " ", "1e999", "undefined",
        ]),
        1 => prop::sample::select(vec!["#", "$", "é", "€", "@", "\t", "\r\n"]),
    ];
    prop::collection::vec(piece, 0..40).prop_map(|ps| ps.concat())
}

pub fn line_col(source: &str, offset: usize) -> (u32, u32) {
    let before = &source[..offset];
    let line = before.matches('\n').count() as u32 + 1;
    let col = before.rsplit('\n').next().unwrap_or("").chars().count() as u32 + 1;
    (line, col)
}
