use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Diagnostic, Span, COLOR_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Ident,
    Number,
    Color,
    Plus,
    Minus,
    Star,
    Dot,
    Caret,
    Slash,
    Tilde,
    Equals,
    Question,
    Colon,
    Semicolon,
    Comma,
    LParen,
    RParen,
    Comment,
}

impl TokenKind {
    pub fn describe(self) -> &'static str {
        match self {
            TokenKind::Ident => "identifier",
            TokenKind::Number => "number",
            TokenKind::Color => "color name",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::Dot => "`.`",
            TokenKind::Caret => "`^`",
            TokenKind::Slash => "`/`",
            TokenKind::Tilde => "`~`",
            TokenKind::Equals => "`=`",
            TokenKind::Question => "`?`",
            TokenKind::Colon => "`:`",
            TokenKind::Semicolon => "`;`",
            TokenKind::Comma => "`,`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::Comment => "comment",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

impl Token {
    /// Numeric value of a number token.
    pub fn number(&self) -> Option<f64> {
        (self.kind == TokenKind::Number)
            .then(|| self.lexeme.parse().ok())
            .flatten()
    }
}

static NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?").unwrap());
static IDENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z_][A-Za-z0-9_]*").unwrap());

fn punctuation(c: char) -> Option<TokenKind> {
    Some(match c {
        '+' => TokenKind::Plus,
        '-' => TokenKind::Minus,
        '*' => TokenKind::Star,
        '.' => TokenKind::Dot,
        '^' => TokenKind::Caret,
        '/' => TokenKind::Slash,
        '~' => TokenKind::Tilde,
        '=' => TokenKind::Equals,
        '?' => TokenKind::Question,
        ':' => TokenKind::Colon,
        ';' => TokenKind::Semicolon,
        ',' => TokenKind::Comma,
        '(' => TokenKind::LParen,
        ')' => TokenKind::RParen,
        _ => return None,
    })
}

struct Cursor<'a> {
    source: &'a str,
    offset: usize,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn rest(&self) -> &str {
        &self.source[self.offset..]
    }

    fn span(&self, len: usize) -> Span {
        Span::new(self.offset, len, self.line, self.col)
    }

    fn advance(&mut self, len: usize) {
        for c in self.source[self.offset..self.offset + len].chars() {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        self.offset += len;
    }
}

/// Splits source text into tokens.
///
/// Whitespace is skipped; `//` comments become [`TokenKind::Comment`] tokens
/// whose lexeme is the text after the slashes. Every illegal character is
/// reported.
pub fn lex(source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut cur = Cursor {
        source,
        offset: 0,
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    while let Some(c) = cur.rest().chars().next() {
        if c.is_whitespace() {
            cur.advance(c.len_utf8());
            continue;
        }
        if cur.rest().starts_with("//") {
            let line_len = cur.rest().find('\n').unwrap_or(cur.rest().len());
            let text = cur.rest()[2..line_len].trim_end_matches('\r').to_string();
            tokens.push(Token {
                kind: TokenKind::Comment,
                lexeme: text,
                span: cur.span(line_len),
            });
            cur.advance(line_len);
            continue;
        }
        if let Some(m) = NUMBER.find(cur.rest()) {
            let text = m.as_str().to_string();
            let span = cur.span(text.len());
            if !text.parse::<f64>().is_ok_and(f64::is_finite) {
                errors.push(Diagnostic::error(
                    "L002",
                    format!("number `{text}` is out of range"),
                    span,
                ));
            }
            tokens.push(Token {
                kind: TokenKind::Number,
                lexeme: text,
                span,
            });
            cur.advance(span.len);
            continue;
        }
        if let Some(m) = IDENT.find(cur.rest()) {
            let text = m.as_str().to_string();
            let kind = if COLOR_NAMES.contains(&text.as_str()) {
                TokenKind::Color
            } else {
                TokenKind::Ident
            };
            let span = cur.span(text.len());
            tokens.push(Token {
                kind,
                lexeme: text,
                span,
            });
            cur.advance(span.len);
            continue;
        }
        let len = c.len_utf8();
        match punctuation(c) {
            Some(kind) => tokens.push(Token {
                kind,
                lexeme: c.to_string(),
                span: cur.span(len),
            }),
            None => errors.push(Diagnostic::error(
                "L001",
                format!("illegal character `{c}`"),
                cur.span(len),
            )),
        }
        cur.advance(len);
    }
    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        lex(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn optimized_assignment() {
        assert_eq!(
            kinds("?P = e1;"),
            vec![Question, Ident, Equals, Ident, Semicolon]
        );
    }

    #[test]
    fn numbers_and_operators() {
        let tokens = lex("0.5*r").unwrap();
        assert_eq!(tokens[0].number(), Some(0.5));
        assert_eq!(tokens[1].kind, Star);
        assert_eq!(tokens[2].lexeme, "r");
        assert_eq!(lex("2.5e-3").unwrap()[0].number(), Some(2.5e-3));
        assert_eq!(kinds("1.e1"), vec![Number, Dot, Ident]);
    }

    #[test]
    fn colors_and_comments() {
        let tokens = lex(":S1 blue; // the end\n").unwrap();
        assert_eq!(tokens[2].kind, Color);
        assert_eq!(tokens[4].kind, Comment);
        assert_eq!(tokens[4].lexeme, " the end");
        assert_eq!(tokens[4].span.line, 1);
    }

    #[test]
    fn illegal_character_is_located() {
        let errors = lex("@").unwrap_err();
        assert_eq!(errors[0].span, Span::new(0, 1, 1, 1));
        let errors = lex("x = 1;\n  y = é;").unwrap_err();
        assert_eq!((errors[0].span.line, errors[0].span.col), (2, 7));
        assert_eq!(errors[0].span.text("x = 1;\n  y = é;"), Some("é"));
    }

    #[test]
    fn out_of_range_number() {
        assert_eq!(lex("1e999").unwrap_err()[0].code, "L002");
    }
}
