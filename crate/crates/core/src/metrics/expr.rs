use std::fmt;

use crate::error::Result;
use crate::jets::Scalar;

/// Vector-valued arguments accepted by `dot` and `norm2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecArg {
    X,
    Y,
}

/// Smooth unary primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
}

impl Func {
    pub fn name(&self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Int(i32),
    Ratio(i64, i64),
    Real(f64),
}

/// Expression graph of a kernel in the coordinates `x1..xn, y1..yn`.
/// Variable indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X(usize),
    Y(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, Exponent),
    Call(Func, Box<Expr>),
    Dot(VecArg, VecArg),
    Norm2(VecArg),
}

impl Expr {
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }
    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }
    pub fn powi(a: Expr, k: i32) -> Expr {
        Expr::Pow(Box::new(a), Exponent::Int(k))
    }
    pub fn sqrt(a: Expr) -> Expr {
        Expr::Call(Func::Sqrt, Box::new(a))
    }

    /// Sum of a non-empty list of terms, left-associated.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms
            .into_iter()
            .reduce(Expr::add)
            .unwrap_or(Expr::Num(0.0))
    }

    /// True when some `y` coordinate occurs in the expression.
    pub fn uses_fiber(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::X(_) => false,
            Expr::Y(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses_fiber() || b.uses_fiber()
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.uses_fiber(),
            Expr::Dot(a, b) => *a == VecArg::Y || *b == VecArg::Y,
            Expr::Norm2(a) => *a == VecArg::Y,
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        let proto = &y[0];
        Ok(match self {
            Expr::Num(c) => proto.constant_like(*c),
            Expr::X(k) => x[*k].clone(),
            Expr::Y(k) => y[*k].clone(),
            Expr::Add(a, b) => a.eval(x, y)?.add(&b.eval(x, y)?),
            Expr::Sub(a, b) => a.eval(x, y)?.sub(&b.eval(x, y)?),
            Expr::Mul(a, b) => a.eval(x, y)?.mul(&b.eval(x, y)?),
            Expr::Div(a, b) => a.eval(x, y)?.div(&b.eval(x, y)?)?,
            Expr::Neg(a) => a.eval(x, y)?.neg(),
            Expr::Pow(a, e) => {
                let base = a.eval(x, y)?;
                match *e {
                    Exponent::Int(k) => base.powi(k)?,
                    Exponent::Ratio(p, q) => base.powf(p as f64 / q as f64)?,
                    Exponent::Real(r) => base.powf(r)?,
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(x, y)?;
                match f {
                    Func::Sqrt => v.sqrt()?,
                    Func::Exp => v.exp(),
                    Func::Log => v.ln()?,
                }
            }
            Expr::Dot(a, b) => {
                let (u, v) = (pick(*a, x, y), pick(*b, x, y));
                dot(u, v)
            }
            Expr::Norm2(a) => {
                let u = pick(*a, x, y);
                dot(u, u)
            }
        })
    }
}

fn pick<'a, S>(arg: VecArg, x: &'a [S], y: &'a [S]) -> &'a [S] {
    match arg {
        VecArg::X => x,
        VecArg::Y => y,
    }
}

fn dot<S: Scalar>(u: &[S], v: &[S]) -> S {
    let mut acc = u[0].mul(&v[0]);
    for (a, b) in u.iter().zip(v).skip(1) {
        acc = acc.add(&a.mul(b));
    }
    acc
}

impl fmt::Display for VecArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VecArg::X => "x",
            VecArg::Y => "y",
        })
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Exponent::Int(k) if k >= 0 => write!(f, "{k}"),
            Exponent::Int(k) => write!(f, "({k})"),
            Exponent::Ratio(p, q) => write!(f, "({p}/{q})"),
            Exponent::Real(r) => write!(f, "({r:?})"),
        }
    }
}

/// Fully parenthesised text that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => write!(f, "(-{:?})", -c),
            Expr::Num(c) => write!(f, "{c:?}"),
            Expr::X(k) => write!(f, "x{}", k + 1),
            Expr::Y(k) => write!(f, "y{}", k + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, e) => write!(f, "({a})^{e}"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Dot(a, b) => write!(f, "dot({a}, {b})"),
            Expr::Norm2(a) => write!(f, "norm2({a})"),
        }
    }
}
