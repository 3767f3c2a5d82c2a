//! Recursive-descent parser for the model expression language.
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! exponent := '-'? integer ('^' exponent)?
//! base     := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-I1^2` is `-(I1^2)`.

use thiserror::Error;

use super::{simplify_fold, BinaryOp, Expr, UnaryOp, Var};
use crate::geometry::ChartSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: expected {expected}")]
    Syntax { position: usize, expected: &'static str },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("division by a constant zero")]
    ZeroDivisor,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let value = src[start..i].parse::<f64>().map_err(|_| ParseError::Syntax {
                    position: start,
                    expected: "number",
                })?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(ParseError::Syntax {
                    position: start,
                    expected: "expression character",
                })
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    chart: &'a ChartSpec,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn error(&self, expected: &'static str) -> ParseError {
        ParseError::Syntax {
            position: self.offset(),
            expected,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.factor()?);
        }
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let n = self.exponent()?;
            return Ok(Expr::powi(base, n));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let start = self.offset();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let n = match self.peek() {
            Tok::Num(v) if v.fract() == 0.0 && *v <= i32::MAX as f64 => *v as i32,
            _ => return Err(self.error("integer exponent")),
        };
        self.bump();
        let n = if negative { -n } else { n };
        if *self.peek() != Tok::Caret {
            return Ok(n);
        }
        // a^b^c is a^(b^c); with integer literals the tower folds here.
        self.bump();
        let outer = self.exponent()?;
        let tower = if outer < 0 { None } else { n.checked_pow(outer as u32) };
        tower.ok_or(ParseError::Syntax {
            position: start,
            expected: "integer exponent within i32 range",
        })
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let start = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(UnaryOp::Sin),
                    "cos" => Some(UnaryOp::Cos),
                    "exp" => Some(UnaryOp::Exp),
                    _ => None,
                };
                if let Some(op) = func {
                    self.expect(Tok::LParen, "'(' after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::unary(op, arg));
                }
                match name.parse::<Var>() {
                    Ok(v) if self.chart.contains(v) => Ok(Expr::Var(v)),
                    _ => Err(ParseError::UnknownVariable(name)),
                }
            }
            _ => Err(ParseError::Syntax {
                position: start,
                expected: "number, variable, function or '('",
            }),
        }
    }
}

/// Parses `source` against the symbol set of `chart`.
pub fn parse(source: &str, chart: &ChartSpec) -> Result<Expr, ParseError> {
    let toks = tokenize(source)?;
    let mut parser = Parser { toks, pos: 0, chart };
    let e = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error("operator or end of input"));
    }
    if has_zero_divisor(&simplify_fold(&e)) {
        return Err(ParseError::ZeroDivisor);
    }
    Ok(e)
}

fn has_zero_divisor(e: &Expr) -> bool {
    match e {
        Expr::Const(_) | Expr::Var(_) => false,
        Expr::Unary(_, c) => has_zero_divisor(c),
        Expr::Binary(op, l, r) => {
            (*op == BinaryOp::Div && r.is_const(0.0)) || has_zero_divisor(l) || has_zero_divisor(r)
        }
    }
}
