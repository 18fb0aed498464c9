//! A small text language for rational maps (`*.rmap` files).
//!
//! ```text
//! dim 2;
//! x' = x*(1-y)/(1-x);
//! y' = y*(1-x)/(1-y);
//! inv r = x*y;
//! ```
//!
//! Components may use `+ - * / ^`, parentheses, decimal literals and the
//! variables `x`, `y`, `z`. Exponents are non-negative integers. Nested
//! fractions are cleared while parsing; the resulting denominators keep the
//! factored shape they were written in. `#` starts a line comment.

mod lexer;

use std::fmt;

use thiserror::Error;

use crate::expr::Expr;
use crate::map::{Component, Invariant, MapError, RationalMapSpec};
use crate::poly::{parse_decimal, MAX_VARS, VAR_NAMES};
use lexer::{tokenize, Token, TokenKind};

const MAX_EXPONENT: u32 = 64;

/// Location and cause of a syntax error.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseDiagnostic {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseDiagnostic {
    fn new(src: &str, offset: usize, message: impl Into<String>, expected: &[&str]) -> Self {
        // end-of-input errors point at the last character
        let offset = offset.min(src.len().saturating_sub(1));
        let offset = floor_char_boundary(src, offset);
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
        ParseDiagnostic {
            offset,
            line,
            column,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn floor_char_boundary(s: &str, mut i: usize) -> usize {
    while i > 0 && !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {} (expected {})", self.line, self.column, self.message, self.expected.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {0}")]
    Parse(ParseDiagnostic),
    #[error("{0}")]
    Semantic(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

const OPERAND: &[&str] = &["number", "variable", "'('", "'-'"];
const OPERATOR: &[&str] = &["'+'", "'-'", "'*'", "'/'", "'^'"];

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> DslError {
        let found = self.peek().to_string();
        DslError::Parse(ParseDiagnostic::new(self.src, self.offset(), format!("unexpected {found}"), expected))
    }

    fn expect(&mut self, kind: TokenKind, label: &str) -> Result<Token, DslError> {
        if *self.peek() == kind {
            Ok(self.bump())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), DslError> {
        match self.peek() {
            TokenKind::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.error(&[&format!("`{kw}`")])),
        }
    }

    fn parse_map(&mut self) -> Result<RationalMapSpec, DslError> {
        self.expect_keyword("dim")?;
        let dim = match self.peek() {
            TokenKind::Number(s) => s.parse::<usize>().ok().filter(|d| (1..=MAX_VARS).contains(d)),
            _ => None,
        };
        let Some(dim) = dim else {
            return Err(self.error(&["1", "2", "3"]));
        };
        self.bump();
        self.dim = dim;
        self.expect(TokenKind::Semi, "';'")?;

        let mut components: Vec<Option<Component>> = vec![None; dim];
        let mut invariants = Vec::new();
        loop {
            match self.peek().clone() {
                TokenKind::Ident(name) if name == "inv" => {
                    self.bump();
                    let name = match self.peek().clone() {
                        TokenKind::Ident(n) => {
                            self.bump();
                            n
                        }
                        _ => return Err(self.error(&["invariant name"])),
                    };
                    self.expect(TokenKind::Eq, "'='")?;
                    let start = self.offset();
                    let e = self.parse_expr()?;
                    self.expect(TokenKind::Semi, "';'")?;
                    let inv = Invariant::new(name.clone(), e).map_err(|_| {
                        DslError::Semantic(format!("invariant `{name}` at offset {start} must be a polynomial"))
                    })?;
                    invariants.push(inv);
                }
                TokenKind::Ident(_) if !invariants.is_empty() => {
                    return Err(self.error(&["`inv`", "end of input"]));
                }
                TokenKind::Ident(name) => {
                    let Some(var) = VAR_NAMES.iter().position(|v| *v == name) else {
                        return Err(self.error(&["x", "y", "z", "`inv`"]));
                    };
                    if var >= dim {
                        return Err(DslError::Semantic(format!(
                            "component {name}' declared but the map has dimension {dim}"
                        )));
                    }
                    if components[var].is_some() {
                        return Err(DslError::Semantic(format!("component {name}' declared twice")));
                    }
                    self.bump();
                    self.expect(TokenKind::Prime, "'''")?;
                    self.expect(TokenKind::Eq, "'='")?;
                    let e = self.parse_expr()?;
                    self.expect(TokenKind::Semi, "';'")?;
                    components[var] = Some(Component::from_expr(&e));
                }
                TokenKind::Eof => break,
                _ => {
                    let expected: &[&str] = if invariants.is_empty() {
                        &["x", "y", "z", "`inv`", "end of input"]
                    } else {
                        &["`inv`", "end of input"]
                    };
                    return Err(self.error(expected));
                }
            }
        }
        let missing: Vec<_> = (0..dim).filter(|&i| components[i].is_none()).map(|i| VAR_NAMES[i]).collect();
        if !missing.is_empty() {
            return Err(DslError::Semantic(format!(
                "dimension {dim} map is missing component(s) {}",
                missing.iter().map(|v| format!("{v}'")).collect::<Vec<_>>().join(", ")
            )));
        }
        let components = components.into_iter().map(Option::unwrap).collect();
        Ok(RationalMapSpec::new(dim, components, invariants)?)
    }

    // expr := term (('+' | '-') term)*
    fn parse_expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                TokenKind::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.parse_term()?));
                }
                TokenKind::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.parse_term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // term := unary (('*' | '/') unary)*
    fn parse_term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                TokenKind::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.parse_unary()?));
                }
                TokenKind::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.parse_unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary := '-' unary | power
    fn parse_unary(&mut self) -> Result<Expr, DslError> {
        if *self.peek() == TokenKind::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.parse_unary()?)));
        }
        self.parse_power()
    }

    // power := atom ('^' INT)?
    fn parse_power(&mut self) -> Result<Expr, DslError> {
        let base = self.parse_atom()?;
        if *self.peek() != TokenKind::Caret {
            return Ok(base);
        }
        self.bump();
        let k = match self.peek() {
            TokenKind::Number(s) => s.parse::<u32>().ok().filter(|&k| k <= MAX_EXPONENT),
            _ => None,
        };
        match k {
            Some(k) => {
                self.bump();
                Ok(Expr::Pow(Box::new(base), k))
            }
            None => Err(self.error(&["integer exponent 0..=64"])),
        }
    }

    fn parse_atom(&mut self) -> Result<Expr, DslError> {
        match self.peek().clone() {
            TokenKind::Number(s) => match parse_decimal(&s) {
                Some(c) => {
                    self.bump();
                    Ok(Expr::Num(c))
                }
                None => Err(DslError::Parse(ParseDiagnostic::new(
                    self.src,
                    self.offset(),
                    format!("malformed number `{s}`"),
                    &["number"],
                ))),
            },
            TokenKind::Ident(name) => match VAR_NAMES.iter().position(|v| *v == name) {
                Some(i) if i < self.dim => {
                    self.bump();
                    Ok(Expr::Var(i))
                }
                Some(_) => Err(DslError::Semantic(format!(
                    "variable `{name}` is not declared in a dimension {} map",
                    self.dim
                ))),
                None => Err(self.error(OPERAND)),
            },
            TokenKind::LParen => {
                let open = self.offset();
                self.bump();
                let e = self.parse_expr()?;
                if *self.peek() == TokenKind::RParen {
                    self.bump();
                    Ok(e)
                } else {
                    let found = self.peek().to_string();
                    let mut expected = vec!["')'"];
                    expected.extend_from_slice(OPERATOR);
                    Err(DslError::Parse(ParseDiagnostic::new(
                        self.src,
                        open,
                        format!("unclosed '(' (found {found})"),
                        &expected,
                    )))
                }
            }
            _ => Err(self.error(OPERAND)),
        }
    }
}

/// Parses map source text.
pub fn parse_map(src: &str) -> Result<RationalMapSpec, DslError> {
    let tokens = tokenize(src).map_err(|e| {
        DslError::Parse(ParseDiagnostic::new(
            src,
            e.offset,
            format!("unexpected character {:?}", e.found),
            &["number", "variable", "operator", "';'"],
        ))
    })?;
    let mut p = Parser { src, tokens, pos: 0, dim: MAX_VARS };
    p.parse_map()
}

/// Parses a bare expression over the first `dim` variables.
pub fn parse_expr(src: &str, dim: usize) -> Result<Expr, DslError> {
    let tokens = tokenize(src).map_err(|e| {
        DslError::Parse(ParseDiagnostic::new(
            src,
            e.offset,
            format!("unexpected character {:?}", e.found),
            &["number", "variable", "operator"],
        ))
    })?;
    let mut p = Parser { src, tokens, pos: 0, dim };
    let e = p.parse_expr()?;
    if *p.peek() != TokenKind::Eof {
        let mut expected = vec!["end of input"];
        expected.extend_from_slice(OPERATOR);
        return Err(p.error(&expected));
    }
    Ok(e)
}

/// Renders a map in the source language; `parse_map` reads it back to an
/// equal spec.
pub fn format_map(spec: &RationalMapSpec) -> String {
    let mut out = format!("dim {};\n", spec.dim());
    for (i, c) in spec.components().iter().enumerate() {
        out.push_str(&format!("{}' = {};\n", VAR_NAMES[i], c));
    }
    for inv in spec.invariants() {
        out.push_str(&format!("inv {} = {};\n", inv.name(), inv.expr()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    #[test]
    fn plane_map_source_gives_the_builtin() {
        let spec = parse_map("dim 2; x' = x*(1-y)/(1-x); y' = y*(1-x)/(1-y); inv r = x*y;").unwrap();
        assert_eq!(spec, builtin::f2d());
    }

    #[test]
    fn recurrence_source_gives_the_builtin() {
        let spec = parse_map("dim 1; x' = -x/(1-x);").unwrap();
        assert_eq!(spec, builtin::lv_recurrence());
    }

    #[test]
    fn unterminated_parenthesis() {
        let src = "dim 2; x' = (x";
        let DslError::Parse(d) = parse_map(src).unwrap_err() else { panic!() };
        assert_eq!(d.offset, 12);
        assert_eq!(&src[d.offset..d.offset + 1], "(");
        assert!(d.expected.contains(&"')'".to_string()));
        assert_eq!((d.line, d.column), (1, 13));
    }

    #[test]
    fn nested_fraction_formats_as_product() {
        let spec = parse_map("dim 2; x' = x/(1/(1-y)); y' = y;").unwrap();
        assert_eq!(spec.components()[0].to_string(), "x*(1-y)");
    }

    #[test]
    fn round_trip_of_builtins() {
        for spec in [builtin::f2d(), builtin::f3d(), builtin::lv_recurrence(), builtin::f2d_reduced(-3.0)] {
            let text = format_map(&spec);
            let back = parse_map(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
            assert_eq!(back, spec, "{text}");
        }
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(parse_map("dim 1; x' = x*y;"), Err(DslError::Semantic(_))));
        assert!(matches!(parse_map("dim 2; x' = x;"), Err(DslError::Semantic(_))));
        assert!(matches!(parse_map("dim 1; x' = x; x' = x;"), Err(DslError::Semantic(_))));
        assert!(matches!(parse_map("dim 1; x' = 2*x; inv r = x;"), Err(DslError::Map(MapError::NotInvariant { .. }))));
        assert!(matches!(parse_map("dim 1; x' = x; inv r = 1/x;"), Err(DslError::Semantic(_))));
    }

    #[test]
    fn syntax_errors_point_inside_the_input() {
        for src in ["", "dim", "dim 4;", "dim 2; x' = ;", "dim 1; x' = x^y;", "dim 1 x' = x;", "dim 1; x' = x $ 1;"] {
            match parse_map(src) {
                Err(DslError::Parse(d)) => {
                    assert!(d.offset < src.len().max(1), "{src:?}: {d:?}");
                    assert!(!d.expected.is_empty());
                }
                other => panic!("{src:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn comments_and_whitespace() {
        let spec = parse_map("# recurrence\ndim 1;\n  x'=\n -x / ( 1 - x ) ;\n").unwrap();
        assert_eq!(spec, builtin::lv_recurrence());
    }
}
