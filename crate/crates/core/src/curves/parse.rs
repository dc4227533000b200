//! Recursive descent parser for polynomial text.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := ('+' | '-') unary | power
//! power := atom ('^' integer)?
//! atom  := number | 'x' | 'y' | 'i' | '(' expr ')'
//! ```
//!
//! Juxtaposition is rejected, so `2x` is an error while `2*x` is accepted.

use num_traits::Zero;

use super::poly::BiPoly;
use crate::error::{GeomError, Result};
use crate::scalar::{Real, C};

/// Largest exponent accepted, both as a literal and as a monomial degree.
pub const EXPONENT_CAP: u32 = 64;

pub fn parse_poly<T: Real>(text: &str) -> Result<BiPoly<T>> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(p.err("empty input"));
    }
    let out = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err(match p.peek() {
            Some(b')') => "unbalanced ')'",
            _ => "expected an operator",
        }));
    }
    Ok(out)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> GeomError {
        GeomError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr<T: Real>(&mut self) -> Result<BiPoly<T>> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<BiPoly<T>> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            let start = self.pos;
            if self.eat(b'*') {
                let rhs = self.unary()?;
                acc = &acc * &rhs;
                check_degree(&acc, start)?;
            } else {
                if matches!(self.peek(), Some(b'x' | b'y' | b'i' | b'(' | b'0'..=b'9' | b'.')) {
                    return Err(self.err("implicit multiplication is not allowed; use '*'"));
                }
                return Ok(acc);
            }
        }
    }

    fn unary<T: Real>(&mut self) -> Result<BiPoly<T>> {
        if self.eat(b'-') {
            return Ok(-&self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power<T: Real>(&mut self) -> Result<BiPoly<T>> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer exponent"));
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        let e: u32 = match digits.parse() {
            Ok(e) if e <= EXPONENT_CAP => e,
            _ => {
                return Err(GeomError::ExponentOverflow {
                    offset: start,
                    cap: EXPONENT_CAP,
                })
            }
        };
        if base.degree().unwrap_or(0).saturating_mul(e) > EXPONENT_CAP {
            return Err(GeomError::ExponentOverflow {
                offset: start,
                cap: EXPONENT_CAP,
            });
        }
        Ok(base.pow(e))
    }

    fn atom<T: Real>(&mut self) -> Result<BiPoly<T>> {
        self.skip_ws();
        let one = T::one();
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(BiPoly::x())
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(BiPoly::y())
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(BiPoly::constant(C::new(T::zero(), one)))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'0'..=b'9' | b'.') => {
                let start = self.pos;
                while matches!(self.peek(), Some(b'0'..=b'9' | b'.')) {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
                let v: T = text.parse().map_err(|_| GeomError::Syntax {
                    offset: start,
                    message: format!("malformed number '{text}'"),
                })?;
                let c = C::new(v, T::zero());
                Ok(if c.is_zero() { BiPoly::zero() } else { BiPoly::constant(c) })
            }
            None => Err(self.err("unexpected end of input")),
            Some(_) => Err(self.err("unexpected character")),
        }
    }
}

fn check_degree<T: Real>(p: &BiPoly<T>, offset: usize) -> Result<()> {
    if p.degree().unwrap_or(0) > EXPONENT_CAP {
        return Err(GeomError::ExponentOverflow {
            offset,
            cap: EXPONENT_CAP,
        });
    }
    Ok(())
}
