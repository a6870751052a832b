use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::Diagnostic;

/// Parses a token stream into a [`Script`].
///
/// Comments between statements become [`StmtKind::Comment`]; comments inside
/// a statement are dropped. The first syntax error is returned.
pub fn parse(tokens: &[Token]) -> Result<Script, Diagnostic> {
    let mut parser = Parser { tokens, pos: 0 };
    let mut statements = Vec::new();
    while let Some(tok) = parser.peek_raw() {
        if tok.kind == TokenKind::Comment {
            statements.push(Stmt {
                kind: StmtKind::Comment(tok.lexeme.clone()),
                span: tok.span,
            });
            parser.pos += 1;
        } else {
            statements.push(parser.statement()?);
        }
    }
    Ok(Script { statements })
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek_raw(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn skip_comments(&mut self) {
        while self
            .peek_raw()
            .is_some_and(|t| t.kind == TokenKind::Comment)
        {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<&'a Token> {
        self.skip_comments();
        self.peek_raw()
    }

    fn peek_kind(&mut self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let tok = self.peek()?;
        self.pos += 1;
        Some(tok)
    }

    fn error_here(&mut self, expected: &str) -> Diagnostic {
        match self.peek() {
            Some(tok) => Diagnostic::error(
                "P001",
                format!(
                    "expected {expected}, found {} `{}`",
                    tok.kind.describe(),
                    tok.lexeme
                ),
                tok.span,
            ),
            None => {
                let span = self
                    .tokens
                    .iter()
                    .rev()
                    .find(|t| t.kind != TokenKind::Comment)
                    .map(|t| t.span)
                    .unwrap_or_default();
                Diagnostic::error(
                    "P002",
                    format!("expected {expected}, found end of input"),
                    span,
                )
            }
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<&'a Token, Diagnostic> {
        if self.peek_kind() == Some(kind) {
            Ok(self.next().unwrap())
        } else {
            Err(self.error_here(kind.describe()))
        }
    }

    fn statement(&mut self) -> Result<Stmt, Diagnostic> {
        let start = self.peek().map(|t| t.span).unwrap_or_default();
        let kind = match self.peek_kind() {
            Some(TokenKind::Colon) => {
                self.next();
                let name = self.name()?;
                let color = match self.peek_kind() {
                    Some(TokenKind::Semicolon) => None,
                    _ => Some(self.color()?),
                };
                StmtKind::Draw { name, color }
            }
            Some(TokenKind::Question) | Some(TokenKind::Ident) => {
                let optimize = self.peek_kind() == Some(TokenKind::Question);
                if optimize {
                    self.next();
                }
                let name = self.name()?;
                self.expect(TokenKind::Equals)?;
                let expr = self.expr()?;
                StmtKind::Assign {
                    name,
                    optimize,
                    expr,
                }
            }
            _ => {
                return Err(
                    self.error_here("a statement (`?name = ...;`, `name = ...;` or `:name;`)")
                )
            }
        };
        let end = self.expect(TokenKind::Semicolon)?.span;
        Ok(Stmt {
            kind,
            span: start.to(end),
        })
    }

    fn name(&mut self) -> Result<Name, Diagnostic> {
        let tok = self.expect(TokenKind::Ident)?;
        Ok(Name::new(tok.lexeme.clone(), tok.span))
    }

    fn color(&mut self) -> Result<ColorSpec, Diagnostic> {
        match self.peek() {
            Some(tok) if tok.kind == TokenKind::Color => {
                self.next();
                Ok(ColorSpec::Named(tok.lexeme.clone()))
            }
            Some(tok) if tok.kind == TokenKind::Ident => {
                self.next();
                if tok.lexeme == "rgb" && self.peek_kind() == Some(TokenKind::LParen) {
                    self.next();
                    let r = self.signed_number()?;
                    self.expect(TokenKind::Comma)?;
                    let g = self.signed_number()?;
                    self.expect(TokenKind::Comma)?;
                    let b = self.signed_number()?;
                    self.expect(TokenKind::RParen)?;
                    Ok(ColorSpec::Rgb(r, g, b))
                } else {
                    Ok(ColorSpec::Named(tok.lexeme.clone()))
                }
            }
            _ => Err(self.error_here("a color")),
        }
    }

    fn signed_number(&mut self) -> Result<f64, Diagnostic> {
        let negative = self.peek_kind() == Some(TokenKind::Minus);
        if negative {
            self.next();
        }
        let tok = self.expect(TokenKind::Number)?;
        let value = tok.number().unwrap_or(f64::NAN);
        Ok(if negative { -value } else { value })
    }

    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Plus) => BinaryOp::Add,
                Some(TokenKind::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, Diagnostic> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek_kind() {
                Some(TokenKind::Star) => BinaryOp::Gp,
                Some(TokenKind::Dot) => BinaryOp::Lcont,
                Some(TokenKind::Caret) => BinaryOp::Wedge,
                Some(TokenKind::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.factor()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, Diagnostic> {
        let op = match self.peek_kind() {
            Some(TokenKind::Minus) => UnaryOp::Neg,
            Some(TokenKind::Tilde) => UnaryOp::Reverse,
            _ => return self.atom(),
        };
        let start = self.next().unwrap().span;
        let operand = self.factor()?;
        let span = start.to(operand.span);
        Ok(Expr::new(ExprKind::Unary(op, Box::new(operand)), span))
    }

    fn atom(&mut self) -> Result<Expr, Diagnostic> {
        let Some(tok) = self.peek() else {
            return Err(self.error_here("an expression"));
        };
        match tok.kind {
            TokenKind::Number => {
                self.next();
                Ok(Expr::new(
                    ExprKind::Num(tok.number().unwrap_or(f64::NAN)),
                    tok.span,
                ))
            }
            TokenKind::Ident => {
                self.next();
                if self.peek_kind() == Some(TokenKind::LParen) {
                    self.next();
                    let mut args = Vec::new();
                    if self.peek_kind() != Some(TokenKind::RParen) {
                        args.push(self.expr()?);
                        while self.peek_kind() == Some(TokenKind::Comma) {
                            self.next();
                            args.push(self.expr()?);
                        }
                    }
                    let end = self.expect(TokenKind::RParen)?.span;
                    let call = ExprKind::Call {
                        name: tok.lexeme.clone(),
                        args,
                    };
                    Ok(Expr::new(call, tok.span.to(end)))
                } else if let Some(b) = BasisVec::from_name(&tok.lexeme) {
                    Ok(Expr::new(ExprKind::Basis(b), tok.span))
                } else {
                    Ok(Expr::new(ExprKind::Ident(tok.lexeme.clone()), tok.span))
                }
            }
            TokenKind::LParen => {
                self.next();
                let inner = self.expr()?;
                let end = self.expect(TokenKind::RParen)?.span;
                Ok(Expr {
                    span: tok.span.to(end),
                    ..inner
                })
            }
            _ => Err(self.error_here("an expression")),
        }
    }
}

fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
    let span = lhs.span.to(rhs.span);
    Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span)
}
