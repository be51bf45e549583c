//! Recursive-descent parser.
//!
//! Precedence, loosest first: `+ -`, `* /`, unary minus, `^` (right-associative,
//! integer exponents only), atoms.

use super::{Expression, Func};
use crate::error::ExprError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integral: bool },
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let tok = lx.next()?;
            let done = tok.0 == Tok::End;
            out.push(tok);
            if done {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        while matches!(self.peek_byte(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek_byte() else {
            return Ok((Tok::End, start));
        };
        if b.is_ascii_digit() || b == b'.' {
            return self.number(start);
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while matches!(self.peek_byte(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if b"+-*/^()".contains(&b) {
            self.pos += 1;
            return Ok((Tok::Op(b as char), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ExprError::Syntax {
            pos: start,
            msg: format!("unexpected character '{ch}'"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ExprError> {
        let bytes = self.src.as_bytes();
        let mut integral = true;
        while matches!(self.peek_byte(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek_byte() == Some(b'.') {
            integral = false;
            self.pos += 1;
            while matches!(self.peek_byte(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek_byte(), Some(b'e' | b'E')) {
            let mut look = self.pos + 1;
            if matches!(bytes.get(look), Some(b'+' | b'-')) {
                look += 1;
            }
            if matches!(bytes.get(look), Some(c) if c.is_ascii_digit()) {
                integral = false;
                self.pos = look;
                while matches!(self.peek_byte(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
            pos: start,
            msg: format!("malformed number '{text}'"),
        })?;
        Ok((Tok::Num { value, integral }, start))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expression, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Expression::add(lhs, self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Expression::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Expression::mul(lhs, self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Expression::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expression, ExprError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expression::neg(self.unary()?))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expression, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let n = self.exponent()?;
            return Ok(Expression::powi(base, n));
        }
        Ok(base)
    }

    /// Signed integer literal, optionally parenthesized, optionally raised again
    /// (right-associative).
    fn exponent(&mut self) -> Result<i32, ExprError> {
        let start = self.pos();
        let base = self.exponent_atom()?;
        let value = if *self.peek() == Tok::Op('^') {
            self.bump();
            let e = self.exponent()?;
            if e < 0 {
                return Err(ExprError::Syntax {
                    pos: start,
                    msg: "exponent tower does not reduce to an integer".into(),
                });
            }
            (base as f64).powi(e)
        } else {
            base as f64
        };
        if value.abs() > i32::MAX as f64 {
            return Err(ExprError::Syntax {
                pos: start,
                msg: "exponent out of range".into(),
            });
        }
        Ok(value as i32)
    }

    fn exponent_atom(&mut self) -> Result<i64, ExprError> {
        match self.peek().clone() {
            Tok::Op('-') => {
                self.bump();
                Ok(-self.exponent_atom()?)
            }
            Tok::Op('(') => {
                self.bump();
                let n = self.exponent()?;
                self.expect(')')?;
                Ok(n as i64)
            }
            Tok::Num { value, integral } if integral && value <= i32::MAX as f64 => {
                self.bump();
                Ok(value as i64)
            }
            _ => self.error("integer exponent expected"),
        }
    }

    fn atom(&mut self) -> Result<Expression, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num { value, .. } => Ok(Expression::constant(value)),
            Tok::Ident(name) => {
                if *self.peek() == Tok::Op('(') {
                    let func = Func::from_name(&name)
                        .ok_or(ExprError::UnknownFunction { name, pos })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(')')?;
                    Ok(Expression::call(func, arg))
                } else {
                    Ok(Expression::var(&name))
                }
            }
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::End => Err(ExprError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            Tok::Op(c) => Err(ExprError::Syntax {
                pos,
                msg: format!("unexpected '{c}'"),
            }),
        }
    }
}

/// Parses a formula over `+ - * / ^`, parentheses, numbers, identifiers and the
/// functions `sin cos exp log sqrt`.
pub fn parse(text: &str) -> Result<Expression, ExprError> {
    let toks = Lexer::tokenize(text)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error("trailing input");
    }
    Ok(e)
}
