//! Arithmetic expressions in the single variable `u`.
//!
//! Grammar (`^` binds tightest and is right-associative, unary minus sits
//! between `*`/`/` and `^`, so `-u^2 == -(u^2)` and `2^-1 == 0.5`):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'u' | '(' expr ')'
//! ```

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Evaluates at `u`. Division by zero and non-finite intermediate results
    /// are reported as evaluation errors at that point.
    pub fn eval(&self, u: f64) -> Result<f64> {
        let v = match self {
            Expr::Num(c) => *c,
            Expr::Var => u,
            Expr::Neg(e) => -e.eval(u)?,
            Expr::Bin(op, l, r) => {
                let a = l.eval(u)?;
                let b = r.eval(u)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::Evaluation {
                                u,
                                reason: "division by zero".into(),
                            });
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                u,
                reason: format!("non-finite value {v}"),
            })
        }
    }
}

// integer exponents go through powi so that (-1)^3 = -1
fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "u"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l} {s} {r})")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error<T>(&self, expected: &str) -> Result<T> {
        let found = match self.src.get(self.pos) {
            Some(&c) => format!("'{}'", c as char),
            None => "end of input".to_string(),
        };
        Err(Error::Syntax {
            offset: self.pos,
            message: format!("expected {expected}, found {found}"),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'u') => {
                self.pos += 1;
                Ok(Expr::Var)
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.error("')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            _ => self.error("number, 'u', '(' or '-'"),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        let mut p = self.pos;
        digits(&mut p);
        if p < s.len() && s[p] == b'.' {
            p += 1;
            digits(&mut p);
        }
        if p < s.len() && (s[p] == b'e' || s[p] == b'E') {
            let mut q = p + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                digits(&mut q);
                p = q;
            }
        }
        let text = std::str::from_utf8(&s[start..p]).expect("ascii slice");
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = p;
                Ok(Expr::Num(v))
            }
            Err(_) => self.error("number"),
        }
    }
}

/// Parses an expression in `u`; errors carry the byte offset of the offending token.
pub fn parse_expression(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    if p.peek().is_none() {
        return p.error("expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.error("operator or end of input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, u: f64) -> f64 {
        parse_expression(s).unwrap().eval(u).unwrap()
    }

    #[test]
    fn basic_examples() {
        assert_eq!(ev("u^3", 2.0), 8.0);
        assert_eq!(ev("2*u^3 + u^5", 1.0), 3.0);
        assert_eq!(ev("u^3", -1.0), -1.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert_eq!(ev("-u^2", 3.0), -9.0);
        assert_eq!(ev("8 - 3 - 2", 0.0), 3.0);
        assert_eq!(ev("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("(1 + u) * (1 - u)", 2.0), -3.0);
        assert_eq!(ev("1.5e1 + .5", 0.0), 15.5);
        assert_eq!(ev("--u", 4.0), 4.0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse_expression("u^^2") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expression(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_expression("(u + 1"), Err(Error::Syntax { offset: 6, .. })));
        assert!(matches!(parse_expression("u x"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expression("2 *"), Err(Error::Syntax { offset: 3, .. })));
    }

    #[test]
    fn division_by_zero_reported_at_point() {
        let e = parse_expression("1/u").unwrap();
        match e.eval(0.0) {
            Err(Error::Evaluation { u, .. }) => assert_eq!(u, 0.0),
            other => panic!("{other:?}"),
        }
        assert_eq!(e.eval(2.0).unwrap(), 0.5);
    }

    #[test]
    fn display_reparses_to_same_tree() {
        for s in ["u^3", "2*u^3 + u^5", "-(u - 1)/(u + 2)^0.5"] {
            let e = parse_expression(s).unwrap();
            let again = parse_expression(&e.to_string()).unwrap();
            assert_eq!(e, again);
        }
    }
}
