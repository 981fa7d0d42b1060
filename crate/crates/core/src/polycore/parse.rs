//! Recursive-descent parser for the polynomial grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | name | '(' expr ')'
//! number := digits ('.' digits)?
//! ```
//!
//! `*` is mandatory between factors. Names resolve to variables first, then
//! to parameters (substituted by their exact value).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::polynomial::Polynomial;
use super::ratfun::RationalFunction;
use crate::error::{Error, Result};

type Rf = RationalFunction<BigRational>;

pub fn parse_polynomial(text: &str, vars: &[String]) -> Result<Polynomial<BigRational>> {
    parse_polynomial_with(text, vars, &BTreeMap::new())
}

pub fn parse_polynomial_with(
    text: &str,
    vars: &[String],
    params: &BTreeMap<String, BigRational>,
) -> Result<Polynomial<BigRational>> {
    let r = parse_rational_with(text, vars, params)?;
    r.as_polynomial().ok_or(Error::Parse {
        pos: 1,
        msg: "division by a non-constant expression".into(),
    })
}

pub fn parse_rational(text: &str, vars: &[String]) -> Result<Rf> {
    parse_rational_with(text, vars, &BTreeMap::new())
}

pub fn parse_rational_with(
    text: &str,
    vars: &[String],
    params: &BTreeMap<String, BigRational>,
) -> Result<Rf> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, vars, params };
    let r = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(r)
}

/// Parses a plain rational literal such as `-3/4` or `0.25`.
pub fn parse_number(text: &str) -> Result<BigRational> {
    let r = parse_rational(text, &[])?;
    r.as_polynomial()
        .and_then(|p| p.as_constant())
        .ok_or(Error::Parse { pos: 1, msg: format!("`{text}` is not a number") })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
    params: &'a BTreeMap<String, BigRational>,
}

impl Parser<'_> {
    fn n(&self) -> usize {
        self.vars.len()
    }

    fn err(&self, msg: String) -> Error {
        Error::Parse { pos: self.pos + 1, msg }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Rf> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == b'+' { acc + t } else { acc - t };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Rf> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let t = self.unary()?;
            if c == b'*' {
                acc = acc * t;
            } else {
                if t.is_zero() {
                    self.pos = at;
                    return Err(self.err("division by zero".into()));
                }
                acc = acc / t;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Rf> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Rf> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected a non-negative integer exponent".into()));
            }
            let e: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| Error::Parse { pos: start + 1, msg: "exponent too large".into() })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Rf> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(c) => Err(self.err(format!("unexpected `{}`", c as char))),
            None => Err(self.err("unexpected end of input".into())),
        }
    }

    fn number(&mut self) -> Result<Rf> {
        let start = self.pos;
        let mut int = BigInt::zero();
        let mut den = BigInt::one();
        let mut seen_dot = false;
        let mut digits = 0;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() {
                int = int * 10 + (c - b'0') as u32;
                if seen_dot {
                    den *= 10;
                }
                digits += 1;
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits == 0 {
            self.pos = start;
            return Err(self.err("malformed number".into()));
        }
        Ok(Rf::constant(self.n(), BigRational::new(int, den)))
    }

    fn name(&mut self) -> Result<Rf> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            return Ok(Rf::from_poly(Polynomial::var(self.n(), i)));
        }
        if let Some(v) = self.params.get(name) {
            return Ok(Rf::constant(self.n(), v.clone()));
        }
        Err(Error::UnknownVariable { name: name.to_string(), pos: start + 1 })
    }
}
