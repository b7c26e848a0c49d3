//! Recursive-descent parser for linear polynomials.
//!
//! ```text
//! poly   := ['+' | '-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := coef | var | '(' poly ')'
//! coef   := integer ['/' integer]
//! var    := 'x' positive-integer
//! ```
//!
//! Whitespace is ignored. Parenthesized factors are expanded, so
//! `(x1*x2 - x2*x1)*(x3*x4 - x4*x3)` is accepted; any product that repeats a
//! variable is rejected as nonlinear.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::ncpoly::{NcLinearPoly, PolyError};
use crate::scalar::{FieldSpec, Scalar};

/// Parses `text` as a polynomial in `x_1..x_m` over `field`.
pub fn parse_polynomial(text: &str, num_vars: usize, field: FieldSpec) -> Result<NcLinearPoly, PolyError> {
    if num_vars == 0 {
        return Err(PolyError::NoVariables);
    }
    let mut parser = Parser { src: text.as_bytes(), pos: 0, num_vars, field };
    let expr = parser.poly()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error("unexpected character"));
    }
    let mut p = NcLinearPoly::zero(num_vars, field)?;
    for (word, coef) in expr {
        p.add_term(word, coef)?;
    }
    Ok(p)
}

/// Intermediate expansion: word -> coefficient (empty word = constant).
type Expr = BTreeMap<Vec<usize>, Scalar>;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    num_vars: usize,
    field: FieldSpec,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> PolyError {
        PolyError::Syntax { pos: self.pos, msg: msg.to_string() }
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

    fn poly(&mut self) -> Result<Expr, PolyError> {
        let mut acc = Expr::new();
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let term = self.term()?;
            let s = self.field.from_i64(sign);
            for (w, c) in term {
                accumulate(&mut acc, w, &c * &s);
            }
            sign = match self.peek() {
                Some(b'+') => 1,
                Some(b'-') => -1,
                _ => break,
            };
            self.pos += 1;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr, PolyError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = multiply(&acc, &rhs)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.poly()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'x') | Some(b'X') => {
                self.pos += 1;
                let start = self.pos;
                let digits = self.digits();
                if digits.is_empty() {
                    return Err(self.error("expected variable index after 'x'"));
                }
                let var: usize = digits.parse().map_err(|_| PolyError::Syntax {
                    pos: start,
                    msg: "variable index too large".into(),
                })?;
                if var == 0 || var > self.num_vars {
                    return Err(PolyError::VarOutOfRange { var, num_vars: self.num_vars });
                }
                Ok(Expr::from([(vec![var], self.field.one())]))
            }
            Some(c) if c.is_ascii_digit() => {
                let num: BigInt = self.digits().parse().expect("digits");
                let den = if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let d = self.digits();
                    if d.is_empty() {
                        return Err(self.error("expected denominator"));
                    }
                    d.parse().expect("digits")
                } else {
                    BigInt::from(1)
                };
                let c = self
                    .field
                    .from_fraction(&num, &den)
                    .map_err(|e| self.error(&e.to_string()))?;
                let mut e = Expr::new();
                accumulate(&mut e, Vec::new(), c);
                Ok(e)
            }
            Some(_) => Err(self.error("expected a coefficient, variable or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}

fn accumulate(acc: &mut Expr, word: Vec<usize>, c: Scalar) {
    if c.is_zero() {
        return;
    }
    let sum = match acc.get(&word) {
        Some(old) => old + &c,
        None => c,
    };
    if sum.is_zero() {
        acc.remove(&word);
    } else {
        acc.insert(word, sum);
    }
}

fn multiply(a: &Expr, b: &Expr) -> Result<Expr, PolyError> {
    let mut out = Expr::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            if let Some(&v) = wb.iter().find(|v| wa.contains(v)) {
                return Err(PolyError::NotLinear { var: v });
            }
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            accumulate(&mut out, w, ca * cb);
        }
    }
    Ok(out)
}
