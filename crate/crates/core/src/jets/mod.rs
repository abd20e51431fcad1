//! Mixed partial derivatives of scalar kernels on the slit tangent bundle.
//!
//! Kernels are evaluated once over [`Jet`]s, truncated multivariate Taylor
//! polynomials in all `2n` coordinates, which yields every mixed partial up
//! to the configured [`Orders`] exactly up to round-off. [`fd`] holds an
//! independent finite-difference oracle used to cross-check the engine.

mod fd;
mod jet;
mod layout;
mod scalar;

use std::sync::Arc;

pub use fd::{default_fd_step, fd_derivative, fd_derivative_with, FdEstimate, MAX_FD_ORDER};
pub use jet::Jet;
pub use layout::{Layout, Orders, MAX_DIM, MAX_TOTAL_ORDER};
pub use scalar::Scalar;

use crate::error::{Error, Result};

/// A point `(x, y)` of the slit tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FiberPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Input(format!(
                "base and fiber coordinates differ in length ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::Input(format!("dimension must be at least 2, got {}", x.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Input("coordinates must be finite".into()));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::Domain("fiber coordinate y lies on the zero section".into()));
        }
        Ok(FiberPoint { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Euclidean norm of the concatenated coordinates.
    pub fn norm(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn y_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Same base point with the fiber coordinate multiplied by `t`.
    pub fn scaled(&self, t: f64) -> FiberPoint {
        FiberPoint {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * t).collect(),
        }
    }
}

/// A scalar function `K(x, y)` that can be evaluated over any [`Scalar`].
pub trait Kernel: Sync {
    fn dim(&self) -> usize;

    /// `Ok(())` when the base point lies in the kernel's domain.
    fn check_domain(&self, x: &[f64]) -> Result<()>;

    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S>;

    /// Plain value at `p`, with domain and dimension checks.
    fn value(&self, p: &FiberPoint) -> Result<f64> {
        check_point(self, p)?;
        self.evaluate(&p.x, &p.y)
    }
}

impl<K: Kernel> Kernel for &K {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn check_domain(&self, x: &[f64]) -> Result<()> {
        (**self).check_domain(x)
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        (**self).evaluate(x, y)
    }
}

/// The square of another kernel.
#[derive(Debug, Clone, Copy)]
pub struct Squared<K>(pub K);

impl<K: Kernel> Kernel for Squared<K> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn check_domain(&self, x: &[f64]) -> Result<()> {
        self.0.check_domain(x)
    }
    fn evaluate<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        let v = self.0.evaluate(x, y)?;
        Ok(v.mul(&v))
    }
}

fn check_point<K: Kernel + ?Sized>(kernel: &K, p: &FiberPoint) -> Result<()> {
    if p.dim() != kernel.dim() {
        return Err(Error::Input(format!(
            "point has dimension {} but kernel has dimension {}",
            p.dim(),
            kernel.dim()
        )));
    }
    kernel.check_domain(&p.x)
}

/// Coordinate jets `(x, y)` of `p` in `layout`.
pub fn coordinate_jets(layout: &Arc<Layout>, p: &FiberPoint) -> (Vec<Jet>, Vec<Jet>) {
    let n = p.dim();
    let x = (0..n).map(|k| Jet::variable(layout, k, p.x[k])).collect();
    let y = (0..n).map(|k| Jet::variable(layout, n + k, p.y[k])).collect();
    (x, y)
}

/// Jet of `kernel` at `p` in a shared layout.
pub fn kernel_jet<K: Kernel>(kernel: &K, p: &FiberPoint, layout: &Arc<Layout>) -> Result<Jet> {
    check_point(kernel, p)?;
    let (x, y) = coordinate_jets(layout, p);
    kernel.evaluate(&x, &y)
}

/// All mixed partials `∂^α_x ∂^β_y K(p)` within a truncation budget.
#[derive(Debug, Clone)]
pub struct JetTable {
    jet: Jet,
}

impl JetTable {
    pub fn dim(&self) -> usize {
        self.jet.layout().dim()
    }

    pub fn orders(&self) -> Orders {
        self.jet.layout().orders()
    }

    pub fn value(&self) -> f64 {
        self.jet.value()
    }

    /// `∂^α_x ∂^β_y` given multi-indices as exponent counts.
    pub fn partial(&self, alpha: &[u8], beta: &[u8]) -> Result<f64> {
        let n = self.dim();
        if alpha.len() != n || beta.len() != n {
            return Err(Error::Input(format!("multi-indices must have length {n}")));
        }
        let exp: Vec<u8> = alpha.iter().chain(beta).copied().collect();
        self.jet.partial(&exp).ok_or_else(|| {
            Error::Capability(format!(
                "derivative (α={alpha:?}, β={beta:?}) lies outside the table orders {:?}",
                self.orders()
            ))
        })
    }

    /// `∂/∂x^{i1} ∂/∂x^{i2} … ∂/∂y^{j1} …` given lists of coordinate indices;
    /// the order of the indices is irrelevant.
    pub fn partial_indices(&self, xs: &[usize], ys: &[usize]) -> Result<f64> {
        let n = self.dim();
        let mut alpha = vec![0u8; n];
        let mut beta = vec![0u8; n];
        for &i in xs {
            *alpha.get_mut(i).ok_or_else(|| Error::Input(format!("x index {i} out of range")))? += 1;
        }
        for &j in ys {
            *beta.get_mut(j).ok_or_else(|| Error::Input(format!("y index {j} out of range")))? += 1;
        }
        self.partial(&alpha, &beta)
    }

    pub fn jet(&self) -> &Jet {
        &self.jet
    }
}

/// Evaluates every mixed partial of `kernel` at `p` up to `orders`.
pub fn eval_jet<K: Kernel>(kernel: &K, p: &FiberPoint, orders: Orders) -> Result<JetTable> {
    let layout = Layout::shared(kernel.dim(), orders)?;
    Ok(JetTable {
        jet: kernel_jet(kernel, p, &layout)?,
    })
}

/// Relative homogeneity defect `|K(x, s y) - s^d K(x, y)| / |K(x, y)|`.
pub fn check_homogeneity<K: Kernel>(kernel: &K, p: &FiberPoint, degree: f64, scale: f64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::Input(format!("scale must be positive, got {scale}")));
    }
    let base = kernel.value(p)?;
    let scaled = kernel.value(&p.scaled(scale))?;
    Ok((scaled - scale.powf(degree) * base).abs() / base.abs())
}
