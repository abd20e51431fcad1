//! Finsler metric kernels: built-in families, the expression language, the
//! JSON metric spec, and numerical validation of the Finsler axioms.

mod builtin;
mod expr;
mod parser;
mod spec;
mod validate;

pub use builtin::{builtin_metric, BuiltinName, MetricParams};
pub use expr::{Exponent, Expr, Func, VecArg};
pub use parser::parse_expression;
pub use spec::{DomainSpec, MetricSpec, SpecKind};
pub use validate::{validate_metric, ValidationReport, RANK_REL_TOL};

use crate::error::{Error, Result};
use crate::jets::{Kernel, Scalar};

/// Set of admissible base points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    All,
    /// Open ball `|x| < radius` centred at the origin.
    Ball { radius: f64 },
}

impl Domain {
    pub fn radius(&self) -> Option<f64> {
        match self {
            Domain::All => None,
            Domain::Ball { radius } => Some(*radius),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boundary_distance(x) > 0.0
    }

    /// Distance from `x` to the boundary (infinite for `All`, negative outside).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::All => f64::INFINITY,
            Domain::Ball { radius } => radius - x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Domain::All => "all of R^n".to_string(),
            Domain::Ball { radius } => format!("open ball |x| < {radius}"),
        }
    }

    /// The smaller of two domains (both are centred balls or everything).
    pub fn intersect(&self, other: &Domain) -> Domain {
        match (self.radius(), other.radius()) {
            (None, None) => Domain::All,
            (Some(r), None) | (None, Some(r)) => Domain::Ball { radius: r },
            (Some(a), Some(b)) => Domain::Ball { radius: a.min(b) },
        }
    }
}

/// A Finsler function `F(x, y)` given by an expression graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricKernel {
    dim: usize,
    expr: Expr,
    domain: Domain,
    label: String,
}

impl MetricKernel {
    pub fn new(dim: usize, expr: Expr, domain: Domain, label: impl Into<String>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Input(format!("dimension must be at least 2, got {dim}")));
        }
        if let Domain::Ball { radius } = domain {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::Input(format!("ball radius must be positive, got {radius}")));
            }
        }
        Ok(MetricKernel {
            dim,
            expr,
            domain,
            label: label.into(),
        })
    }

    /// Kernel from expression text, defined on all of `R^n`.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let expr = parse_expression(text, dim)?;
        MetricKernel::new(dim, expr, Domain::All, text)
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// `c · F`
    pub fn scaled(&self, c: f64) -> MetricKernel {
        MetricKernel {
            dim: self.dim,
            expr: Expr::mul(Expr::Num(c), self.expr.clone()),
            domain: self.domain,
            label: format!("{c} * {}", self.label),
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl Kernel for MetricKernel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "base point {x:?} lies outside the domain ({}) of metric '{}'",
                self.domain.describe(),
                self.label
            )))
        }
    }

    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        self.expr.eval(x, y)
    }
}

/// Base density `σ(x) > 0` of a vertically invariant volume form.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeDensity {
    dim: usize,
    expr: Expr,
}

impl VolumeDensity {
    /// The coordinate volume `σ ≡ 1`.
    pub fn unit(dim: usize) -> Self {
        VolumeDensity {
            dim,
            expr: Expr::Num(1.0),
        }
    }

    /// Density from an expression in `x` only.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let expr = parse_expression(text, dim)?;
        if expr.uses_fiber() {
            return Err(Error::Input(format!(
                "volume density '{text}' must not depend on the fiber coordinates"
            )));
        }
        Ok(VolumeDensity { dim, expr })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// `σ(x)`, evaluated over any scalar type.
    pub fn evaluate<S: Scalar>(&self, x: &[S]) -> Result<S> {
        self.expr.eval(x, x)
    }
}
