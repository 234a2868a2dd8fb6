//! Text syntax for exact scalars.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | atom ['^' integer]
//! atom   := number | identifier | '(' expr ')'
//! ```
//!
//! Numbers are integers or exact decimals; `p/q` falls out of the grammar as
//! a division by a constant. Division by a non-constant is rejected.

use crate::error::{Error, Result};
use crate::poly::Generator;
use crate::rational::Rational;
use crate::ExactScalar;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let err = |m: String| Error::Parse {
        input: src.to_string(),
        message: m,
    };
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' | '\u{2212}' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' | '\u{00b7}' => {
                out.push(Tok::Star);
                i += 1
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                out.push(Tok::Num(chars[start..i].iter().collect()));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(err(format!("unexpected character {:?}", other))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, m: &str) -> Error {
        Error::Parse {
            input: self.src.to_string(),
            message: m.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<ExactScalar> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -self.term()?
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ExactScalar> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = self.factor()?;
                    let q = d
                        .as_rational()
                        .ok_or_else(|| self.err("division by a non-constant"))?;
                    if num_traits::Zero::is_zero(&q) {
                        return Err(self.err("division by zero"));
                    }
                    acc = acc.scale(&q.recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<ExactScalar> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(-self.factor()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(n)) => {
                    let e: u32 = n.parse().map_err(|_| self.err("exponent must be a non-negative integer"))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(self.err("expected exponent after '^'")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExactScalar> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(ExactScalar::from_rational(&Rational::parse(&n)?)),
            Some(Tok::Ident(id)) => Ok(ExactScalar::generator(Generator::named(&id))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(self.err("missing ')'")),
                }
            }
            Some(t) => Err(self.err(&format!("unexpected token {:?}", t))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parses the scalar text syntax, e.g. `"2*g1^2*g2 + 1/3"`.
pub fn parse_scalar(src: &str) -> Result<ExactScalar> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(Error::Parse {
            input: src.to_string(),
            message: "empty expression".into(),
        });
    }
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

impl std::str::FromStr for ExactScalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_scalar(s)
    }
}

impl<'de> serde::Deserialize<'de> for ExactScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => parse_scalar(&s).map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) if n.is_i64() => {
                Ok(ExactScalar::from_integer(n.as_i64().unwrap_or_default()))
            }
            other => Err(serde::de::Error::custom(format!(
                "expected a scalar string or integer, found {other}"
            ))),
        }
    }
}
