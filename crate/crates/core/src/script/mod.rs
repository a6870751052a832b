//! The script language.
//!
//! ```text
//! script  := { stmt } ;
//! stmt    := assign | draw | comment ;
//! assign  := [ "?" ] IDENT "=" expr ";" ;
//! draw    := ":" IDENT [ color ] ";" ;
//! color   := COLORKW | "rgb" "(" num "," num "," num ")" ;
//! expr    := term { ("+"|"-") term } ;
//! term    := factor { ("*"|"."|"^"|"/") factor } ;
//! factor  := ("-"|"~") factor | atom ;
//! atom    := NUMBER | IDENT | BASIS | IDENT "(" [expr {"," expr}] ")" | "(" expr ")" ;
//! ```
//!
//! `*` is the geometric product, `^` the outer product, `.` the left
//! contraction and `/` right multiplication by an inverse. `~` reverses.
//! `?name = ...;` marks an output; `name = 1.5;` (a plain numeric literal)
//! declares a parameter whose value is bound when the program runs.

mod ast;
mod builtins;
mod diagnostic;
mod lexer;
mod parser;
mod pretty;
mod validate;

pub use ast::{
    BasisVec, BinaryOp, ColorSpec, Expr, ExprKind, Name, Script, Stmt, StmtKind, UnaryOp,
};
pub use builtins::Builtin;
pub use diagnostic::{has_errors, Diagnostic, Severity, Span};
pub use lexer::{lex, Token, TokenKind};
pub use parser::parse;
pub use pretty::{color_text, expression, pretty_print, statement};
pub use validate::{codes, is_parameter_declaration, parameters, validate};

/// Color keywords accepted in draw statements.
pub const COLOR_NAMES: [&str; 8] = [
    "blue", "red", "green", "yellow", "black", "white", "cyan", "magenta",
];

/// Lexes and parses, returning every lexical error or the first syntax error.
pub fn parse_source(source: &str) -> Result<Script, Vec<Diagnostic>> {
    let tokens = lex(source)?;
    parse(&tokens).map_err(|d| vec![d])
}

/// Lexes, parses and validates; an empty result means the script is valid.
pub fn check(source: &str) -> Vec<Diagnostic> {
    match parse_source(source) {
        Ok(script) => validate(&script),
        Err(diagnostics) => diagnostics,
    }
}
