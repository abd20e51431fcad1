use qd::Quad;

use super::jet::Jet;
use crate::error::{Error, Result};

/// Arithmetic needed to evaluate a kernel expression, implemented both for
/// plain `f64` and for [`Jet`], so one expression walker serves values,
/// finite differences and truncated Taylor propagation alike.
pub trait Scalar: Clone + Send + Sync {
    /// A constant living in the same context as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn sqrt(&self) -> Result<Self>;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn powi(&self, m: i32) -> Result<Self>;
    fn powf(&self, r: f64) -> Result<Self>;
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Result<Self> {
        if *other == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self / other)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sqrt(&self) -> Result<Self> {
        if !(*self > 0.0) {
            return Err(Error::Domain(format!("sqrt of non-positive value {self}")));
        }
        Ok(f64::sqrt(*self))
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self> {
        if !(*self > 0.0) {
            return Err(Error::Domain(format!("log of non-positive value {self}")));
        }
        Ok(f64::ln(*self))
    }
    fn powi(&self, m: i32) -> Result<Self> {
        if m < 0 && *self == 0.0 {
            return Err(Error::Domain("negative power of zero".into()));
        }
        Ok(f64::powi(*self, m))
    }
    fn powf(&self, r: f64) -> Result<Self> {
        if !(*self > 0.0) {
            return Err(Error::Domain(format!("real power {r} of non-positive value {self}")));
        }
        Ok(f64::powf(*self, r))
    }
    fn value(&self) -> f64 {
        *self
    }
}

impl Scalar for Jet {
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant(self.layout(), c)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Result<Self> {
        self.div_jet(other)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sqrt(&self) -> Result<Self> {
        Jet::sqrt(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Result<Self> {
        Jet::ln(self)
    }
    fn powi(&self, m: i32) -> Result<Self> {
        Jet::powi(self, m)
    }
    fn powf(&self, r: f64) -> Result<Self> {
        Jet::powf(self, r)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
}

/// Double-double values, used by the finite-difference oracle.
impl Scalar for Quad {
    fn constant_like(&self, c: f64) -> Self {
        Quad::from(c)
    }
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn sub(&self, other: &Self) -> Self {
        *self - *other
    }
    fn mul(&self, other: &Self) -> Self {
        *self * *other
    }
    fn div(&self, other: &Self) -> Result<Self> {
        if other.0 == 0.0 {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(*self / *other)
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn sqrt(&self) -> Result<Self> {
        if !(self.0 > 0.0) {
            return Err(Error::Domain(format!("sqrt of non-positive value {}", self.0)));
        }
        Ok(Quad::sqrt(*self))
    }
    fn exp(&self) -> Self {
        Quad::exp(*self)
    }
    fn ln(&self) -> Result<Self> {
        if !(self.0 > 0.0) {
            return Err(Error::Domain(format!("log of non-positive value {}", self.0)));
        }
        Ok(Quad::ln(*self))
    }
    fn powi(&self, m: i32) -> Result<Self> {
        if m < 0 && self.0 == 0.0 {
            return Err(Error::Domain("negative power of zero".into()));
        }
        let mut acc = Quad::from(1.0);
        for _ in 0..m.unsigned_abs() {
            acc = acc * *self;
        }
        Ok(if m < 0 { Quad::from(1.0) / acc } else { acc })
    }
    fn powf(&self, r: f64) -> Result<Self> {
        if !(self.0 > 0.0) {
            return Err(Error::Domain(format!("real power {r} of non-positive value {}", self.0)));
        }
        Ok((Quad::ln(*self) * Quad::from(r)).exp())
    }
    fn value(&self) -> f64 {
        self.0 + self.1
    }
}
