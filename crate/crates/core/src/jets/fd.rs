//! Central finite differences with one Richardson level, sampled in
//! double-double arithmetic.
//!
//! This is the independent oracle for the jet engine. For a multi-index of
//! order `m_v` in variable `v`, the stencil is the tensor product of the
//! centred differences `δ^m f = Σ_k (-1)^k C(m,k) f(p + (m/2 - k) h e_v)`,
//! whose error expansion is even in `h`. One extrapolation
//! `(4 D(h/2) - D(h)) / 3` removes the `h²` term; the reported error
//! estimate is `|D(h/2) - D(h)| / 3`, the size of the removed term.

use qd::Quad;

use super::{FiberPoint, Kernel};
use crate::error::{Error, Result};

/// Highest total order the oracle accepts.
pub const MAX_FD_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEstimate {
    pub value: f64,
    pub error_estimate: f64,
}

/// Step size used by the oracle for a derivative of total order `order`.
///
/// Kernels are sampled in double-double arithmetic, so round-off (of
/// size `1e-32 / h^m`) stays negligible down to small steps and one base
/// step `5e-4 (1 + ‖p‖)` serves every supported order.
pub fn default_fd_step(p: &FiberPoint, order: usize) -> f64 {
    debug_assert!(order <= MAX_FD_ORDER);
    5e-4 * (1.0 + p.norm())
}

/// Finite-difference estimate of `∂^α_x ∂^β_y K` at `p`, with the kernel
/// evaluated in double-double precision.
pub fn fd_derivative<K: Kernel>(
    kernel: &K,
    p: &FiberPoint,
    alpha: &[u8],
    beta: &[u8],
    step: f64,
) -> Result<FdEstimate> {
    if p.dim() != kernel.dim() {
        return Err(Error::Input(format!(
            "point has dimension {} but kernel has dimension {}",
            p.dim(),
            kernel.dim()
        )));
    }
    richardson(
        |x, y| {
            let plain: Vec<f64> = x.iter().map(|v| v.0 + v.1).collect();
            kernel.check_domain(&plain)?;
            kernel.evaluate(x, y)
        },
        p,
        alpha,
        beta,
        step,
    )
}

/// Same stencil as [`fd_derivative`] for an arbitrary `f64` function of a
/// fiber point.
pub fn fd_derivative_with<F>(f: F, p: &FiberPoint, alpha: &[u8], beta: &[u8], step: f64) -> Result<FdEstimate>
where
    F: Fn(&FiberPoint) -> Result<f64>,
{
    richardson(
        |x, y| {
            let plain = |v: &[Quad]| v.iter().map(|c| c.0 + c.1).collect();
            f(&FiberPoint {
                x: plain(x),
                y: plain(y),
            })
            .map(Quad::from)
        },
        p,
        alpha,
        beta,
        step,
    )
}

fn richardson<F>(f: F, p: &FiberPoint, alpha: &[u8], beta: &[u8], step: f64) -> Result<FdEstimate>
where
    F: Fn(&[Quad], &[Quad]) -> Result<Quad>,
{
    let n = p.dim();
    if alpha.len() != n || beta.len() != n {
        return Err(Error::Input(format!("multi-indices must have length {n}")));
    }
    let order: usize = alpha.iter().chain(beta).map(|&e| e as usize).sum();
    if order > MAX_FD_ORDER {
        return Err(Error::Capability(format!(
            "finite-difference oracle supports order ≤ {MAX_FD_ORDER}, got {order}"
        )));
    }
    if !(step > 0.0) {
        return Err(Error::Input(format!("step must be positive, got {step}")));
    }
    let orders: Vec<u8> = alpha.iter().chain(beta).copied().collect();
    let coarse = central(&f, p, &orders, step)?;
    let fine = central(&f, p, &orders, step / 2.0)?;
    let value = (fine * Quad::from(4.0) - coarse) / Quad::from(3.0);
    Ok(FdEstimate {
        value: value.0 + value.1,
        error_estimate: (fine - coarse).0.abs() / 3.0,
    })
}

fn binomial(m: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn central<F>(f: &F, p: &FiberPoint, orders: &[u8], h: f64) -> Result<Quad>
where
    F: Fn(&[Quad], &[Quad]) -> Result<Quad>,
{
    let n = p.dim();
    let active: Vec<(usize, u8)> = orders
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(v, &m)| (v, m))
        .collect();
    let total: i32 = active.iter().map(|&(_, m)| m as i32).sum();
    let mut sum = Quad::from(0.0);
    let mut ks = vec![0u8; active.len()];
    loop {
        let mut x: Vec<Quad> = p.x.iter().map(|&v| Quad::from(v)).collect();
        let mut y: Vec<Quad> = p.y.iter().map(|&v| Quad::from(v)).collect();
        let mut weight = 1.0;
        for (&(v, m), &k) in active.iter().zip(&ks) {
            let offset = Quad::from(h) * Quad::from(m as f64 / 2.0 - k as f64);
            if v < n {
                x[v] += offset;
            } else {
                y[v - n] += offset;
            }
            weight *= if k % 2 == 0 { 1.0 } else { -1.0 } * binomial(m, k);
        }
        sum += f(&x, &y)? * Quad::from(weight);

        // odometer over the stencil
        let mut carry = true;
        for (slot, &(_, m)) in ks.iter_mut().zip(&active) {
            if *slot < m {
                *slot += 1;
                carry = false;
                break;
            }
            *slot = 0;
        }
        if carry {
            break;
        }
    }
    Ok(sum / (0..total).fold(Quad::from(1.0), |acc, _| acc * Quad::from(h)))
}
