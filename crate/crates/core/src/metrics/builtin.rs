use std::str::FromStr;

use serde::Deserialize;

use super::expr::{Expr, VecArg};
use super::{parse_expression, Domain, MetricKernel};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::Sampler;

/// Seed and sample count for the parameter checks run at construction.
const PARAM_CHECK_SEED: u64 = 0x5eed;
const PARAM_CHECK_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinName {
    Euclidean,
    Riemannian,
    Randers,
    Funk,
    Klein,
}

impl FromStr for BuiltinName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(BuiltinName::Euclidean),
            "riemannian" => Ok(BuiltinName::Riemannian),
            "randers" => Ok(BuiltinName::Randers),
            "funk" => Ok(BuiltinName::Funk),
            "klein" => Ok(BuiltinName::Klein),
            other => Err(Error::Param(format!(
                "unknown builtin metric '{other}' (expected euclidean, riemannian, randers, funk or klein)"
            ))),
        }
    }
}

impl BuiltinName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BuiltinName::Euclidean => "euclidean",
            BuiltinName::Riemannian => "riemannian",
            BuiltinName::Randers => "randers",
            BuiltinName::Funk => "funk",
            BuiltinName::Klein => "klein",
        }
    }
}

/// Family parameters. `a` is the symmetric matrix `a_ij(x)` of a Riemannian
/// metric (identity when absent); `b` is the one-form `β_i(x)` of a Randers
/// metric `F = sqrt(a(y, y)) + β(y)`. Entries are expressions in `x`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricParams {
    #[serde(default)]
    pub a: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub b: Option<Vec<String>>,
}

/// Constructs one of the built-in metric families in dimension `dim`.
pub fn builtin_metric(name: BuiltinName, dim: usize, params: &MetricParams) -> Result<MetricKernel> {
    if dim < 2 {
        return Err(Error::Param(format!("dimension must be at least 2, got {dim}")));
    }
    let uses_a = matches!(name, BuiltinName::Riemannian | BuiltinName::Randers);
    if params.a.is_some() && !uses_a {
        return Err(Error::Param(format!("metric '{}' takes no matrix parameter 'a'", name.as_str())));
    }
    if params.b.is_some() && name != BuiltinName::Randers {
        return Err(Error::Param(format!("metric '{}' takes no one-form parameter 'b'", name.as_str())));
    }
    let ball = Domain::Ball { radius: 1.0 };
    match name {
        BuiltinName::Euclidean => MetricKernel::new(dim, Expr::sqrt(Expr::Norm2(VecArg::Y)), Domain::All, "euclidean"),
        BuiltinName::Funk => {
            // ⟨x,y⟩/a + sqrt(|y|²/a + ⟨x,y⟩²/a²),  a = 1 - |x|²
            let a = || Expr::sub(Expr::Num(1.0), Expr::Norm2(VecArg::X));
            let b = || Expr::Dot(VecArg::X, VecArg::Y);
            let radicand = Expr::add(
                Expr::div(Expr::Norm2(VecArg::Y), a()),
                Expr::div(Expr::powi(b(), 2), Expr::powi(a(), 2)),
            );
            let f = Expr::add(Expr::div(b(), a()), Expr::sqrt(radicand));
            MetricKernel::new(dim, f, ball, "funk")
        }
        BuiltinName::Klein => {
            let a = || Expr::sub(Expr::Num(1.0), Expr::Norm2(VecArg::X));
            let b = Expr::Dot(VecArg::X, VecArg::Y);
            let radicand = Expr::add(
                Expr::div(Expr::Norm2(VecArg::Y), a()),
                Expr::div(Expr::powi(b, 2), Expr::powi(a(), 2)),
            );
            MetricKernel::new(dim, Expr::sqrt(radicand), ball, "klein")
        }
        BuiltinName::Riemannian => {
            let a = parse_matrix(params.a.as_ref(), dim)?;
            let kernel = MetricKernel::new(dim, Expr::sqrt(quadratic_form(&a, dim)), Domain::All, "riemannian")?;
            check_riemannian(&a, dim, kernel.domain())?;
            Ok(kernel)
        }
        BuiltinName::Randers => {
            let a = parse_matrix(params.a.as_ref(), dim)?;
            let b = parse_oneform(params.b.as_ref(), dim)?;
            let beta = Expr::sum((0..dim).map(|i| Expr::mul(b[i].clone(), Expr::Y(i))));
            let f = Expr::add(Expr::sqrt(quadratic_form(&a, dim)), beta);
            let kernel = MetricKernel::new(dim, f, Domain::All, "randers")?;
            check_riemannian(&a, dim, kernel.domain())?;
            check_randers(&a, &b, dim, kernel.domain())?;
            Ok(kernel)
        }
    }
}

fn parse_base_expr(text: &str, dim: usize, what: &str) -> Result<Expr> {
    let e = parse_expression(text, dim)?;
    if e.uses_fiber() {
        return Err(Error::Param(format!("{what} '{text}' must depend on x only")));
    }
    Ok(e)
}

fn parse_matrix(a: Option<&Vec<Vec<String>>>, dim: usize) -> Result<Vec<Expr>> {
    let Some(rows) = a else {
        return Ok((0..dim * dim)
            .map(|k| Expr::Num(if k / dim == k % dim { 1.0 } else { 0.0 }))
            .collect());
    };
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Param(format!("matrix parameter 'a' must be {dim}×{dim}")));
    }
    rows.iter()
        .enumerate()
        .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, t)| (i, j, t)))
        .map(|(i, j, t)| parse_base_expr(t, dim, &format!("a[{i}][{j}]")))
        .collect()
}

fn parse_oneform(b: Option<&Vec<String>>, dim: usize) -> Result<Vec<Expr>> {
    let b = b.ok_or_else(|| Error::Param("randers metric needs a one-form parameter 'b'".into()))?;
    if b.len() != dim {
        return Err(Error::Param(format!("one-form parameter 'b' must have {dim} entries")));
    }
    b.iter()
        .enumerate()
        .map(|(i, t)| parse_base_expr(t, dim, &format!("b[{i}]")))
        .collect()
}

/// `Σ_i a_ii y_i² + 2 Σ_{i<j} a_ij y_i y_j`, skipping literal zeros.
fn quadratic_form(a: &[Expr], dim: usize) -> Expr {
    let mut terms = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            let coeff = &a[i * dim + j];
            if *coeff == Expr::Num(0.0) {
                continue;
            }
            let yy = if i == j {
                Expr::powi(Expr::Y(i), 2)
            } else {
                Expr::mul(Expr::Num(2.0), Expr::mul(Expr::Y(i), Expr::Y(j)))
            };
            terms.push(if *coeff == Expr::Num(1.0) { yy } else { Expr::mul(coeff.clone(), yy) });
        }
    }
    Expr::sum(terms)
}

fn eval_base(e: &Expr, x: &[f64]) -> Result<f64> {
    e.eval(x, x)
}

fn check_riemannian(a: &[Expr], dim: usize, domain: Domain) -> Result<()> {
    let mut sampler = Sampler::new(PARAM_CHECK_SEED);
    for _ in 0..PARAM_CHECK_SAMPLES {
        let x = sampler.base_point(&domain, dim);
        let m: Vec<f64> = a.iter().map(|e| eval_base(e, &x)).collect::<Result<_>>()?;
        for i in 0..dim {
            for j in 0..i {
                let (u, v) = (m[i * dim + j], m[j * dim + i]);
                if (u - v).abs() > 1e-12 * (1.0 + u.abs().max(v.abs())) {
                    return Err(Error::Param(format!("matrix 'a' is not symmetric at x = {x:?}")));
                }
            }
        }
        if !linalg::is_positive_definite(&m, dim) {
            return Err(Error::Param(format!("matrix 'a' is not positive definite at x = {x:?}")));
        }
    }
    Ok(())
}

fn check_randers(a: &[Expr], b: &[Expr], dim: usize, domain: Domain) -> Result<()> {
    let mut sampler = Sampler::new(PARAM_CHECK_SEED);
    for _ in 0..PARAM_CHECK_SAMPLES {
        let x = sampler.base_point(&domain, dim);
        let m: Vec<f64> = a.iter().map(|e| eval_base(e, &x)).collect::<Result<_>>()?;
        let beta: Vec<f64> = b.iter().map(|e| eval_base(e, &x)).collect::<Result<_>>()?;
        let inv = linalg::inverse(&m, dim)
            .ok_or_else(|| Error::Param(format!("matrix 'a' is singular at x = {x:?}")))?;
        let norm2: f64 = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| inv[i * dim + j] * beta[i] * beta[j])
            .sum();
        if norm2.sqrt() >= 1.0 {
            return Err(Error::Param(format!(
                "randers one-form has |β|_a = {} ≥ 1 at x = {x:?}",
                norm2.sqrt()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{FiberPoint, Kernel};

    fn at(x: &[f64], y: &[f64]) -> FiberPoint {
        FiberPoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_and_klein_at_origin() {
        let e = builtin_metric(BuiltinName::Euclidean, 2, &MetricParams::default()).unwrap();
        assert_eq!(e.value(&at(&[0.0, 0.0], &[3.0, 4.0])).unwrap(), 5.0);
        let k = builtin_metric(BuiltinName::Klein, 2, &MetricParams::default()).unwrap();
        assert_eq!(k.value(&at(&[0.0, 0.0], &[1.0, 0.0])).unwrap(), 1.0);
    }

    #[test]
    fn funk_radial_value() {
        // Along the radius: F((r,0),(1,0)) = (r + 1)/(1 - r²) = 1/(1 - r).
        let f = builtin_metric(BuiltinName::Funk, 2, &MetricParams::default()).unwrap();
        let v = f.value(&at(&[0.5, 0.0], &[1.0, 0.0])).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn funk_matches_expression_language() {
        let text = "(dot(x,y) + sqrt(norm2(y)*(1-norm2(x)) + dot(x,y)^2))/(1-norm2(x))";
        let dsl = MetricKernel::parse(text, 3).unwrap().with_domain(Domain::Ball { radius: 1.0 });
        let builtin = builtin_metric(BuiltinName::Funk, 3, &MetricParams::default()).unwrap();
        let mut s = Sampler::new(7);
        for _ in 0..50 {
            let p = s.fiber_point(&builtin.domain(), 3);
            let (a, b) = (dsl.value(&p).unwrap(), builtin.value(&p).unwrap());
            assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn randers_with_long_one_form_is_rejected() {
        let params = MetricParams {
            a: None,
            b: Some(vec!["1.5".into(), "0".into()]),
        };
        assert!(matches!(builtin_metric(BuiltinName::Randers, 2, &params), Err(Error::Param(_))));
    }

    #[test]
    fn riemannian_rejects_indefinite_matrix() {
        let params = MetricParams {
            a: Some(vec![vec!["1".into(), "0".into()], vec!["0".into(), "-1".into()]]),
            b: None,
        };
        assert!(matches!(builtin_metric(BuiltinName::Riemannian, 2, &params), Err(Error::Param(_))));
        let asym = MetricParams {
            a: Some(vec![vec!["1".into(), "x1".into()], vec!["0".into(), "1".into()]]),
            b: None,
        };
        assert!(matches!(builtin_metric(BuiltinName::Riemannian, 2, &asym), Err(Error::Param(_))));
    }

    #[test]
    fn params_are_checked_against_family() {
        let params = MetricParams {
            a: None,
            b: Some(vec!["0.1".into(), "0".into()]),
        };
        assert!(builtin_metric(BuiltinName::Funk, 2, &params).is_err());
        assert!(builtin_metric(BuiltinName::Randers, 2, &MetricParams::default()).is_err());
    }
}
