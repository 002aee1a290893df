//! Recursive-descent parser for the plain expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' factor)?
//! base   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')' | '-' base
//! ```
//!
//! `NUMBER` is a decimal literal or an integer (rationals are written
//! `p/q` and fold through constant division). `IDENT` is
//! `[A-Za-z_][A-Za-z0-9_]*`. Division and unary minus desugar to products,
//! `sqrt(e)` to `e^(1/2)`.
//!
//! Identifiers that name a derivative atom (`psi_x`, `psi_xy`, ...) are
//! only recognized when the parse runs under a [`ParseContext`] that
//! declares the unknown function and its variables; the bare [`parse`]
//! entry point treats every identifier as a plain symbol.

use super::{Elementary, Expr, Rat};
use crate::error::ParseError;
use num::BigInt;
use std::collections::BTreeSet;

/// Declared variables and unknown-function names for identifier resolution.
#[derive(Debug, Clone, Default)]
pub struct ParseContext {
    variables: Vec<String>,
    unknowns: BTreeSet<String>,
}

impl ParseContext {
    pub fn new<V, U>(variables: V, unknowns: U) -> Self
    where
        V: IntoIterator,
        V::Item: Into<String>,
        U: IntoIterator,
        U::Item: Into<String>,
    {
        ParseContext {
            variables: variables.into_iter().map(Into::into).collect(),
            unknowns: unknowns.into_iter().map(Into::into).collect(),
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        let tokens = lex(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            ctx: self,
        };
        let expr = parser.expr()?;
        parser.expect_eof()?;
        Ok(expr)
    }

    fn resolve_ident(&self, name: &str, _offset: usize) -> Result<Expr, ParseError> {
        if self.unknowns.contains(name) {
            return Ok(Expr::unknown(name));
        }
        // psi_xy style: a declared unknown, an underscore, then a run of
        // declared variable names (greedy longest match).
        for (i, _) in name.match_indices('_') {
            let (prefix, suffix) = (&name[..i], &name[i + 1..]);
            if !self.unknowns.contains(prefix) || suffix.is_empty() {
                continue;
            }
            return match self.decompose_suffix(suffix) {
                Some(orders) => Ok(Expr::Deriv(super::DerivAtom::new(prefix, orders))),
                None => Err(ParseError::BadDerivativeSuffix {
                    ident: name.to_string(),
                    suffix: suffix.to_string(),
                }),
            };
        }
        Ok(Expr::var(name))
    }

    fn decompose_suffix(&self, suffix: &str) -> Option<Vec<(String, u32)>> {
        let mut by_len: Vec<&String> = self.variables.iter().collect();
        by_len.sort_by_key(|v| std::cmp::Reverse(v.len()));
        let mut counts: Vec<(String, u32)> = Vec::new();
        let mut rest = suffix;
        'outer: while !rest.is_empty() {
            for var in &by_len {
                if !var.is_empty() && rest.starts_with(var.as_str()) {
                    rest = &rest[var.len()..];
                    match counts.iter_mut().find(|(v, _)| v == *var) {
                        Some((_, k)) => *k += 1,
                        None => counts.push(((*var).clone(), 1)),
                    }
                    continue 'outer;
                }
            }
            return None;
        }
        Some(counts)
    }
}

/// Parse with no declared variables or unknowns.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    ParseContext::default().parse(text)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(Rat),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(_) => "number".into(),
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                tokens.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                tokens.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                tokens.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                tokens.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                tokens.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                tokens.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                tokens.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut frac_digits = 0usize;
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    frac_digits = i - frac_start;
                }
                let body = &text[start..i];
                if body == "." || body.is_empty() {
                    return Err(ParseError::Syntax {
                        offset: start,
                        found: format!("`{body}`"),
                        expected: vec!["number".into()],
                    });
                }
                let digits: String = body.chars().filter(|c| *c != '.').collect();
                let numer: BigInt = digits.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    found: format!("`{body}`"),
                    expected: vec!["number".into()],
                })?;
                let denom = BigInt::from(10u32).pow(frac_digits as u32);
                tokens.push((Tok::Number(Rat::from_big(numer, denom)), start));
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((Tok::Ident(text[start..i].to_string()), start));
            }
            other => {
                return Err(ParseError::Syntax {
                    offset: i,
                    found: format!("`{}`", other as char),
                    expected: vec![
                        "number".into(),
                        "identifier".into(),
                        "operator".into(),
                        "'('".into(),
                    ],
                });
            }
        }
    }
    tokens.push((Tok::Eof, text.len()));
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    ctx: &'a ParseContext,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &(Tok, usize) {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (tok, offset) = self.peek();
        ParseError::Syntax {
            offset: *offset,
            found: tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek().0 {
            Tok::Eof => Ok(()),
            _ => Err(self.error(&["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"])),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().0 {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(negate(self.term()?));
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek().0 {
                Tok::Star => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = multiply(acc, rhs);
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = divide(acc, rhs);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if matches!(self.peek().0, Tok::Caret) {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            (Tok::Number(r), _) => Ok(Expr::Rational(r)),
            (Tok::Minus, _) => Ok(negate(self.base()?)),
            (Tok::LParen, _) => {
                let inner = self.expr()?;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (tok, offset) => Err(ParseError::Syntax {
                        offset,
                        found: tok.describe(),
                        expected: vec!["')'".into()],
                    }),
                }
            }
            (Tok::Ident(name), offset) => {
                if matches!(self.peek().0, Tok::LParen) {
                    self.bump();
                    let arg = self.expr()?;
                    match self.bump() {
                        (Tok::RParen, _) => {}
                        (tok, offset) => {
                            return Err(ParseError::Syntax {
                                offset,
                                found: tok.describe(),
                                expected: vec!["')'".into()],
                            })
                        }
                    }
                    if name == "sqrt" {
                        return Ok(Expr::sqrt(arg));
                    }
                    match Elementary::from_name(&name) {
                        Some(f) => Ok(Expr::func(f, arg)),
                        None => Err(ParseError::UnknownFunction { name, offset }),
                    }
                } else {
                    self.ctx.resolve_ident(&name, offset)
                }
            }
            (tok, offset) => Err(ParseError::Syntax {
                offset,
                found: tok.describe(),
                expected: vec![
                    "number".into(),
                    "identifier".into(),
                    "'('".into(),
                    "'-'".into(),
                ],
            }),
        }
    }
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Rational(r) => Expr::Rational(-r),
        other => Expr::product(vec![Expr::int(-1), other]),
    }
}

fn multiply(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Rational(x), Expr::Rational(y)) => Expr::Rational(x * y),
        _ => Expr::product(vec![a, b]),
    }
}

fn divide(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Rational(x), Expr::Rational(y)) if !y.is_zero() => Expr::Rational(x / y),
        _ => Expr::product(vec![a, Expr::recip(b)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_desugars_to_product_of_power() {
        let e = parse("x/y").unwrap();
        assert_eq!(
            e,
            Expr::Product(vec![
                Expr::var("x"),
                Expr::pow(Expr::var("y"), Expr::int(-1)),
            ])
        );
    }

    #[test]
    fn constant_fraction_folds_to_lowest_terms() {
        assert_eq!(parse("2/4").unwrap(), Expr::rational(1, 2));
        assert_eq!(parse("-3/6").unwrap(), Expr::rational(-1, 2));
        assert_eq!(parse("0.25").unwrap(), Expr::rational(1, 4));
    }

    #[test]
    fn potential_of_the_variable_coefficient_example_parses() {
        let e = parse("(1-2*x^2)/(1+x^2)^2").unwrap();
        let syms: Vec<_> = e.free_symbols().into_iter().collect();
        assert_eq!(syms, vec!["x".to_string()]);
        // Shape: numerator times denominator^-2.
        match &e {
            Expr::Product(args) => assert_eq!(args.len(), 2),
            other => panic!("expected a product, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_offset_and_expectations() {
        let err = parse("x + * y").unwrap_err();
        match err {
            ParseError::Syntax {
                offset, expected, ..
            } => {
                assert_eq!(offset, 4);
                assert!(!expected.is_empty());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_function_is_rejected() {
        let err = parse("tan(x)").unwrap_err();
        assert!(matches!(err, ParseError::UnknownFunction { ref name, offset: 0 } if name == "tan"));
    }

    #[test]
    fn sqrt_normalizes_to_half_power() {
        let e = parse("sqrt(x+y)").unwrap();
        assert_eq!(
            e,
            Expr::pow(Expr::var("x") + Expr::var("y"), Expr::rational(1, 2))
        );
    }

    #[test]
    fn derivative_atoms_need_a_context() {
        assert_eq!(parse("psi_xy").unwrap(), Expr::var("psi_xy"));

        let ctx = ParseContext::new(["x", "y"], ["psi"]);
        assert_eq!(
            ctx.parse("psi_xy").unwrap(),
            Expr::deriv("psi", [("x", 1), ("y", 1)])
        );
        assert_eq!(
            ctx.parse("psi_xx").unwrap(),
            Expr::deriv("psi", [("x", 2)])
        );
        assert_eq!(ctx.parse("psi").unwrap(), Expr::unknown("psi"));
        let err = ctx.parse("psi_z").unwrap_err();
        assert!(matches!(err, ParseError::BadDerivativeSuffix { .. }));
    }

    #[test]
    fn unary_minus_binds_inside_power_per_grammar() {
        // factor := base ('^' factor)?, base := '-' base, so -x^2 is (-x)^2.
        let e = parse("-x^2").unwrap();
        assert_eq!(
            e,
            Expr::pow(Expr::int(-1) * Expr::var("x"), Expr::int(2))
        );
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("x^2^3").unwrap();
        assert_eq!(
            e,
            Expr::pow(Expr::var("x"), Expr::pow(Expr::int(2), Expr::int(3)))
        );
    }
}
