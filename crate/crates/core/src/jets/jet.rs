use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::layout::{Layout, Limits};
use crate::error::{Error, Result};

/// A truncated multivariate Taylor polynomial in the `2n` variables
/// `(x, y)` around a fixed fiber point.
///
/// Coefficients are Taylor coefficients (the partial derivative divided by
/// the multi-index factorial). Each jet remembers the exponent region on
/// which its coefficients are exact; products and derivatives shrink that
/// region, and coefficients outside it are kept at zero.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    limits: Limits,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("value", &self.coeffs[0])
            .field("limits", &self.limits)
            .finish()
    }
}

impl Jet {
    /// Exact constant.
    pub fn constant(layout: &Arc<Layout>, c: f64) -> Jet {
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = c;
        Jet {
            layout: layout.clone(),
            limits: Limits::from_orders(layout.orders()),
            coeffs,
        }
    }

    /// The coordinate function of variable `v` (base `x` for `v < n`, fiber
    /// `y` otherwise) expanded around `value`.
    pub fn variable(layout: &Arc<Layout>, v: usize, value: f64) -> Jet {
        let mut jet = Jet::constant(layout, value);
        if let Some(i) = layout.var_index(v) {
            jet.coeffs[i] = 1.0;
        }
        jet
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// Value at the expansion point.
    pub fn value(&self) -> f64 {
        debug_assert!(!self.limits.is_empty(), "reading a jet with no exact coefficients");
        self.coeffs[0]
    }

    /// True when at least the value is exact.
    pub fn is_exact(&self) -> bool {
        !self.limits.is_empty()
    }

    /// Highest `(x, y, total)` orders known exactly, or `None` when the jet
    /// has been differentiated past its budget.
    pub fn exact_orders(&self) -> Option<(u8, u8, u8)> {
        let l = self.limits;
        if l.is_empty() {
            None
        } else {
            Some((l.x as u8, l.y as u8, l.total.min(l.x + l.y) as u8))
        }
    }

    /// Taylor coefficient for the exponent vector `exp` (length `2n`).
    pub fn coefficient(&self, exp: &[u8]) -> Option<f64> {
        let i = self.layout.index_of(exp)?;
        self.layout.admitted(i, &self.limits).then(|| self.coeffs[i])
    }

    /// Partial derivative `∂^exp` at the expansion point.
    pub fn partial(&self, exp: &[u8]) -> Option<f64> {
        let fact: f64 = exp.iter().map(|&e| factorial(e)).product();
        self.coefficient(exp).map(|c| c * fact)
    }

    fn with(&self, limits: Limits, coeffs: Vec<f64>) -> Jet {
        Jet {
            layout: self.layout.clone(),
            limits,
            coeffs,
        }
    }

    fn masked(mut self) -> Jet {
        for i in 0..self.coeffs.len() {
            if !self.layout.admitted(i, &self.limits) {
                self.coeffs[i] = 0.0;
            }
        }
        self
    }

    fn check_layout(&self, other: &Jet) {
        assert!(
            Arc::ptr_eq(&self.layout, &other.layout),
            "jets from different layouts cannot be combined"
        );
    }

    pub fn scale(&self, c: f64) -> Jet {
        self.with(self.limits, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Jet) -> Jet {
        self.check_layout(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + c * b)
            .collect();
        self.with(self.limits.meet(other.limits), coeffs).masked()
    }

    pub fn mul_jet(&self, other: &Jet) -> Jet {
        self.check_layout(other);
        let limits = self.limits.meet(other.limits);
        let table = self.layout.product_table(limits);
        let mut out = vec![0.0; self.coeffs.len()];
        for (i, pairs) in table.iter() {
            let a = self.coeffs[*i as usize];
            if a == 0.0 {
                continue;
            }
            for &(j, k) in pairs {
                out[k as usize] += a * other.coeffs[j as usize];
            }
        }
        self.with(limits, out)
    }

    /// Derivative with respect to variable `v` (`x^v` for `v < n`, else
    /// `y^{v-n}`).
    pub fn diff(&self, v: usize) -> Jet {
        let n = self.layout.dim();
        let mut limits = self.limits;
        if v < n {
            limits.x -= 1;
        } else {
            limits.y -= 1;
        }
        limits.total -= 1;
        let mut out = vec![0.0; self.coeffs.len()];
        if !limits.is_empty() {
            for &(src, dst, factor) in self.layout.deriv_table(v) {
                out[dst as usize] = factor * self.coeffs[src as usize];
            }
        }
        self.with(limits, out).masked()
    }

    /// `∂/∂x^k`
    pub fn dx(&self, k: usize) -> Jet {
        self.diff(k)
    }

    /// `∂/∂y^k`
    pub fn dy(&self, k: usize) -> Jet {
        self.diff(self.layout.dim() + k)
    }

    /// Applies a univariate function given its Taylor coefficients
    /// `c_k = f^{(k)}(a_0)/k!` at the constant term, by Horner evaluation
    /// of `Σ c_k (a - a_0)^k`.
    fn compose(&self, taylor: &[f64]) -> Jet {
        let mut shifted = self.clone();
        shifted.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.layout, taylor[taylor.len() - 1]);
        acc.limits = self.limits;
        for &c in taylor[..taylor.len() - 1].iter().rev() {
            acc = acc.mul_jet(&shifted).add_const(c);
        }
        acc
    }

    fn degree(&self) -> usize {
        self.exact_orders().map(|(_, _, t)| t as usize).unwrap_or(0)
    }

    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0 == 0.0 || !a0.is_finite() {
            return Err(Error::Domain(format!("division by a jet with constant term {a0}")));
        }
        let d = self.degree();
        let inv = 1.0 / a0;
        let taylor: Vec<f64> = (0..=d).map(|k| (-inv).powi(k as i32) * inv).collect();
        Ok(self.compose(&taylor))
    }

    pub fn div_jet(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul_jet(&other.recip()?))
    }

    /// Real power `a^r`; requires a positive constant term.
    pub fn powf(&self, r: f64) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(Error::Domain(format!(
                "real power {r} of a non-positive truncation constant {a0}"
            )));
        }
        let d = self.degree();
        let mut taylor = Vec::with_capacity(d + 1);
        let mut binom = 1.0;
        for k in 0..=d {
            taylor.push(binom * a0.powf(r - k as f64));
            binom *= (r - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.compose(&taylor))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(Error::Domain(format!("sqrt of a non-positive truncation constant {a0}")));
        }
        self.powf(0.5)
    }

    pub fn exp(&self) -> Jet {
        let d = self.degree();
        let e = self.coeffs[0].exp();
        let mut taylor = Vec::with_capacity(d + 1);
        let mut fact = 1.0;
        for k in 0..=d {
            if k > 0 {
                fact *= k as f64;
            }
            taylor.push(e / fact);
        }
        self.compose(&taylor)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(Error::Domain(format!("log of a non-positive truncation constant {a0}")));
        }
        let d = self.degree();
        let mut taylor = vec![a0.ln()];
        for k in 1..=d {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            taylor.push(sign / (k as f64 * a0.powi(k as i32)));
        }
        Ok(self.compose(&taylor))
    }

    /// Integer power by repeated squaring; negative powers go through a
    /// reciprocal.
    pub fn powi(&self, m: i32) -> Result<Jet> {
        let mut base = self.clone();
        let mut e = m.unsigned_abs();
        let mut acc = Jet::constant(&self.layout, 1.0);
        acc.limits = self.limits;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        if m < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }
}

pub(crate) fn factorial(e: u8) -> f64 {
    (1..=e as u32).map(|k| k as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.axpy(-1.0, rhs)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
