use std::fmt::Write;

use super::ast::*;

/// Canonical text of a script: one statement per line, single spaces around
/// binary operators, minimal parentheses, comments on their own lines.
pub fn pretty_print(script: &Script) -> String {
    let mut out = String::new();
    for stmt in &script.statements {
        out.push_str(&statement(stmt));
        out.push('\n');
    }
    out
}

pub fn statement(stmt: &Stmt) -> String {
    match &stmt.kind {
        StmtKind::Comment(text) => format!("//{text}"),
        StmtKind::Assign {
            name,
            optimize,
            expr,
        } => {
            format!(
                "{}{} = {};",
                if *optimize { "?" } else { "" },
                name.text,
                expression(expr)
            )
        }
        StmtKind::Draw { name, color: None } => format!(":{};", name.text),
        StmtKind::Draw {
            name,
            color: Some(color),
        } => format!(":{} {};", name.text, color_text(color)),
    }
}

pub fn color_text(color: &ColorSpec) -> String {
    match color {
        ColorSpec::Named(n) => n.clone(),
        ColorSpec::Rgb(r, g, b) => format!("rgb({r}, {g}, {b})"),
    }
}

const UNARY: u8 = 3;
const ATOM: u8 = 4;

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, _, _) => op.precedence(),
        ExprKind::Unary(..) => UNARY,
        _ => ATOM,
    }
}

pub fn expression(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_wrapped(out: &mut String, e: &Expr, parenthesize: bool) {
    if parenthesize {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Num(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Ident(name) => out.push_str(name),
        ExprKind::Basis(b) => out.push_str(b.name()),
        ExprKind::Unary(op, operand) => {
            out.push_str(op.symbol());
            write_wrapped(out, operand, precedence(operand) < UNARY);
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            write_wrapped(out, lhs, precedence(lhs) < p);
            let _ = write!(out, " {} ", op.symbol());
            write_wrapped(out, rhs, precedence(rhs) <= p);
        }
        ExprKind::Call { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::parse_source;

    fn canon(src: &str) -> String {
        pretty_print(&parse_source(src).unwrap())
    }

    #[test]
    fn normalizes_whitespace_and_parentheses() {
        assert_eq!(
            canon("?S=C-0.5*r*r*einf ;"),
            "?S = C - 0.5 * r * r * einf;\n"
        );
        assert_eq!(canon("x=(a+b)*(c);"), "x = (a + b) * c;\n");
        assert_eq!(canon("x = a - (b - c);"), "x = a - (b - c);\n");
        assert_eq!(canon("x = (a - b) - c;"), "x = a - b - c;\n");
        assert_eq!(canon("x = -(a*b) ^ ~c;"), "x = -(a * b) ^ ~c;\n");
        assert_eq!(canon("x = - - a;"), "x = --a;\n");
        assert_eq!(canon(":S1   rgb( 1,0.5 ,0 ) ;"), ":S1 rgb(1, 0.5, 0);\n");
    }

    #[test]
    fn comments_are_kept_verbatim() {
        assert_eq!(canon("//  keep   me\n?x=1;"), "//  keep   me\n?x = 1;\n");
    }
}
