//! Recursive-descent parser for the kernel expression language.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! base     := number | var | func '(' args ')' | '(' expr ')'
//! var      := 'x'k | 'y'k            (1 ≤ k ≤ n)
//! func     := sqrt | exp | log | dot | norm2
//! exponent := integer | '(' '-'? number ('/' number)? ')'
//! ```
//!
//! Positions in errors are byte offsets into the input.

use super::expr::{Exponent, Expr, Func, VecArg};
use crate::error::{Error, Result};

/// Parses `text` as a kernel over `dim` base and fiber coordinates.
pub fn parse_expression(text: &str, dim: usize) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn found(&self) -> String {
        match self.src.get(self.pos) {
            None => "end of input".to_string(),
            Some(c) => format!("'{}'", *c as char),
        }
    }

    fn error(&self, expected: &[&str]) -> Error {
        Error::Parse {
            position: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.found(),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[&format!("'{}'", c as char)]))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == b'+' { Expr::add(lhs, rhs) } else { Expr::sub(lhs, rhs) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = if c == b'*' { Expr::mul(lhs, rhs) } else { Expr::div(lhs, rhs) };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Num(self.number()?)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(self.error(&["number", "variable", "function", "'('"])),
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos > s
        };
        let int_part = digits(self);
        let mut frac_part = false;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac_part = digits(self);
        }
        if !int_part && !frac_part {
            self.pos = start;
            return Err(self.error(&["number"]));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if !digits(self) {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map_err(|_| Error::Parse {
            position: start,
            expected: vec!["number".into()],
            found: format!("'{text}'"),
        })
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error(&["integer"]));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<i64>().map_err(|_| Error::Parse {
            position: start,
            expected: vec!["integer".into()],
            found: format!("'{text}'"),
        })
    }

    fn exponent(&mut self) -> Result<Exponent> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let k = self.integer()?;
                i32::try_from(k).map(Exponent::Int).map_err(|_| Error::Parse {
                    position: start,
                    expected: vec!["small integer exponent".into()],
                    found: k.to_string(),
                })
            }
            Some(b'(') => {
                self.pos += 1;
                let negative = if self.peek() == Some(b'-') {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                let sign = if negative { -1.0 } else { 1.0 };
                self.skip_ws();
                let start = self.pos;
                let num = self.number()?;
                let num_is_int = self.src[start..self.pos].iter().all(u8::is_ascii_digit);
                let e = if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let dstart = self.pos;
                    let den = self.number()?;
                    let den_is_int = self.src[dstart..self.pos].iter().all(u8::is_ascii_digit);
                    if den == 0.0 {
                        self.pos = dstart;
                        return Err(self.error(&["non-zero denominator"]));
                    }
                    if num_is_int && den_is_int {
                        let (p, q) = ((sign * num) as i64, den as i64);
                        if p % q == 0 {
                            Exponent::Int((p / q) as i32)
                        } else {
                            Exponent::Ratio(p, q)
                        }
                    } else {
                        Exponent::Real(sign * num / den)
                    }
                } else if num_is_int && num <= i32::MAX as f64 {
                    Exponent::Int((sign * num) as i32)
                } else {
                    Exponent::Real(sign * num)
                };
                self.expect(b')')?;
                Ok(e)
            }
            _ => Err(self.error(&["integer", "'('"])),
        }
    }

    fn identifier(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match word {
            "sqrt" | "exp" | "log" => {
                let func = match word {
                    "sqrt" => Func::Sqrt,
                    "exp" => Func::Exp,
                    _ => Func::Log,
                };
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            "dot" => {
                self.expect(b'(')?;
                let a = self.vec_arg()?;
                self.expect(b',')?;
                let b = self.vec_arg()?;
                self.expect(b')')?;
                Ok(Expr::Dot(a, b))
            }
            "norm2" => {
                self.expect(b'(')?;
                let a = self.vec_arg()?;
                self.expect(b')')?;
                Ok(Expr::Norm2(a))
            }
            _ => {
                let (head, tail) = word.split_at(1);
                let is_var = (head == "x" || head == "y")
                    && !tail.is_empty()
                    && tail.bytes().all(|b| b.is_ascii_digit());
                if !is_var {
                    return Err(Error::Parse {
                        position: start,
                        expected: vec![
                            "x1..xn".into(),
                            "y1..yn".into(),
                            "sqrt".into(),
                            "exp".into(),
                            "log".into(),
                            "dot".into(),
                            "norm2".into(),
                        ],
                        found: format!("identifier '{word}'"),
                    });
                }
                let k: usize = tail.parse().unwrap_or(usize::MAX);
                if k == 0 || k > self.dim {
                    return Err(Error::Arity {
                        position: start,
                        message: format!("variable '{word}' does not exist in dimension {}", self.dim),
                    });
                }
                Ok(if head == "x" { Expr::X(k - 1) } else { Expr::Y(k - 1) })
            }
        }
    }

    fn vec_arg(&mut self) -> Result<VecArg> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        match &self.src[start..self.pos] {
            b"x" => Ok(VecArg::X),
            b"y" => Ok(VecArg::Y),
            _ => {
                self.pos = start;
                Err(self.error(&["x", "y"]))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(e: &Expr, x: &[f64], y: &[f64]) -> f64 {
        e.eval(x, y).unwrap()
    }

    #[test]
    fn euclidean_norm() {
        let e = parse_expression("sqrt(y1^2 + y2^2)", 2).unwrap();
        assert_eq!(eval(&e, &[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn unterminated_call_reports_end_position() {
        match parse_expression("sqrt(", 2) {
            Err(Error::Parse { position, expected, .. }) => {
                assert_eq!(position, 5);
                assert!(expected.iter().any(|e| e == "number"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_variables() {
        assert!(matches!(parse_expression("y3", 2), Err(Error::Arity { position: 0, .. })));
        assert!(matches!(parse_expression("1 + x0", 2), Err(Error::Arity { position: 4, .. })));
    }

    #[test]
    fn unknown_identifiers_and_non_smooth_primitives() {
        assert!(matches!(parse_expression("abs(y1)", 2), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(parse_expression("max(y1, y2)", 2), Err(Error::Parse { .. })));
        assert!(matches!(parse_expression("z1", 2), Err(Error::Parse { .. })));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expression("2 - 3 - 4 * 2 / 4 + -y1^2", 2).unwrap();
        // 2 - 3 - 2 + -(y1^2)
        assert_eq!(eval(&e, &[0.0, 0.0], &[3.0, 1.0]), -12.0);
    }

    #[test]
    fn exponents() {
        let e = parse_expression("norm2(y)^(1/2) + y1^(-1) + x1^(0.5) + y2^(4/2)", 2).unwrap();
        let v = eval(&e, &[0.25, 0.0], &[3.0, 4.0]);
        assert!((v - (5.0 + 1.0 / 3.0 + 0.5 + 16.0)).abs() < 1e-14);
        assert!(parse_expression("y1^-1", 2).is_err());
    }

    #[test]
    fn scientific_literals() {
        let e = parse_expression("1.5e-3*y1 + 2E2*y2 + .5*y1", 2).unwrap();
        assert!((eval(&e, &[0.0, 0.0], &[1.0, 1.0]) - (1.5e-3 + 200.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn trailing_garbage() {
        assert!(matches!(parse_expression("y1 y2", 2), Err(Error::Parse { position: 3, .. })));
    }

    #[test]
    fn vector_primitives() {
        let e = parse_expression("dot(x, y) + norm2(x)", 3).unwrap();
        assert_eq!(eval(&e, &[1.0, 2.0, 3.0], &[1.0, 0.0, -1.0]), -2.0 + 14.0);
        assert!(parse_expression("dot(x, 2)", 2).is_err());
    }
}
