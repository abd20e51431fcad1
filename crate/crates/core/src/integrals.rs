//! First integrals and identity checks built on the curvature pipeline.

use serde::Serialize;

use crate::curvature::{mean_berwald_jets, FinslerJets};
use crate::error::{Error, Result};
use crate::jets::{FiberPoint, Jet, Kernel, Orders};
use crate::linalg;
use crate::metrics::VolumeDensity;

/// `E` values need the third y-derivatives of the spray.
pub const LAMBDA_ORDERS: Orders = Orders::new(1, 5, 5);
pub const PROJECTIVE_ORDERS: Orders = Orders::new(1, 3, 3);
pub const ALPHA_ORDERS: Orders = Orders::new(1, 4, 4);
/// One y-order beyond [`LAMBDA_ORDERS`], for `∂f/∂y`.
pub const SCALAR_GRADIENT_ORDERS: Orders = Orders::new(1, 6, 6);
pub const BORDERED_ORDERS: Orders = Orders::new(0, 2, 2);

/// Default relative residual below which `E` counts as a multiple of the
/// angular metric.
pub const SCALAR_TOL: f64 = 1e-5;

/// Both routes to the projective factor of a pair `(F, F̃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectiveFactor {
    /// `(Ñ^i_i - N^i_i)/(n+1)`
    pub trace: f64,
    /// `G(F̃)/(2F̃)`
    pub log: f64,
}

/// Least-squares fit `2E ≈ f ∂²F/∂y∂y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarFit {
    pub f: f64,
    /// `‖2E - f F_yy‖ / ‖F_yy‖` (Frobenius norms).
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BorderedChecks {
    pub rund_residual: f64,
    pub gg_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaForm {
    /// `dx^i` components, `∂S/∂y^i - δτ/δx^i`.
    pub horizontal: Vec<f64>,
    /// `δy^i` components, `-I_i`.
    pub vertical: Vec<f64>,
    pub i_g_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralValues {
    pub lambda: f64,
    #[serde(rename = "I0")]
    pub i0: Option<f64>,
    #[serde(rename = "P")]
    pub projective: Option<ProjectiveFactor>,
    /// Scalar mean Berwald curvature, when the fit residual is within tolerance.
    pub f: Option<f64>,
    /// Residual of the least-squares fit, reported either way.
    pub f_residual: f64,
    pub rapcsak: Option<Vec<f64>>,
}

/// Determinant of `[[a, b], [bᵀ, 0]]` with `a` row-major `n × n`.
pub fn bordered_det(a: &[f64], b: &[f64], n: usize) -> f64 {
    let m = n + 1;
    let mut out = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            out[i * m + j] = a[i * n + j];
        }
        out[i * m + n] = b[i];
        out[n * m + i] = b[i];
    }
    linalg::det_lu(&out, m)
}

fn values(jets: &[Jet]) -> Vec<f64> {
    jets.iter().map(Jet::value).collect()
}

fn gradient_y(f: &Jet, n: usize) -> Vec<f64> {
    (0..n).map(|i| f.dy(i).value()).collect()
}

fn hessian_y(f: &Jet, n: usize) -> Vec<f64> {
    (0..n * n).map(|ij| f.dy(ij / n).dy(ij % n).value()).collect()
}

/// `λ = -1/det g · |2F E, F_y; F_yᵀ, 0|` at `p`.
pub fn lambda_integral<K: Kernel>(kernel: &K, p: &FiberPoint) -> Result<f64> {
    let fj = FinslerJets::new(kernel, p, LAMBDA_ORDERS)?;
    lambda_from(&fj)
}

pub(crate) fn lambda_from(fj: &FinslerJets) -> Result<f64> {
    let n = fj.dim();
    let f = fj.f().value();
    let e = values(&mean_berwald_jets(fj)?);
    let block: Vec<f64> = e.iter().map(|v| 2.0 * f * v).collect();
    // written as a difference so that a vanishing determinant gives +0
    Ok(0.0 - bordered_det(&block, &gradient_y(fj.f(), n), n) / fj.det_g().value())
}

/// Painlevé integral `I₀ = (F̃/F)(det g / det g̃)^{1/(n+1)}`. The value is
/// a first integral only when the two metrics are projectively related.
pub fn painleve_i0<K: Kernel, L: Kernel>(kernel: &K, kernel_t: &L, p: &FiberPoint) -> Result<f64> {
    check_pair(kernel, kernel_t)?;
    let a = FinslerJets::new(kernel, p, BORDERED_ORDERS)?;
    let b = FinslerJets::new(kernel_t, p, BORDERED_ORDERS)?;
    let (d, dt) = (a.det_g().value(), b.det_g().value());
    if d.signum() != dt.signum() {
        return Err(Error::DeterminantSign(format!(
            "det g = {d:e} and det g̃ = {dt:e} have opposite signs"
        )));
    }
    let n = a.dim() as f64;
    Ok(b.f().value() / a.f().value() * (d / dt).powf(1.0 / (n + 1.0)))
}

/// Projective factor of `(F, F̃)` by the connection trace and by
/// `G(F̃)/(2F̃)`. The two agree when the metrics are projectively related.
pub fn projective_factor<K: Kernel, L: Kernel>(kernel: &K, kernel_t: &L, p: &FiberPoint) -> Result<ProjectiveFactor> {
    check_pair(kernel, kernel_t)?;
    let a = FinslerJets::new(kernel, p, PROJECTIVE_ORDERS)?;
    let b = FinslerJets::new(kernel_t, p, PROJECTIVE_ORDERS)?;
    let n = a.dim();
    let trace = |fj: &FinslerJets| -> Result<f64> {
        let conn = fj.connection()?;
        Ok((0..n).map(|i| conn[i * n + i].value()).sum())
    };
    let ft = a.other(kernel_t)?;
    Ok(ProjectiveFactor {
        trace: (trace(&b)? - trace(&a)?) / (n as f64 + 1.0),
        log: a.spray_apply(&ft)?.value() / (2.0 * ft.value()),
    })
}

/// Components `G(∂F̃/∂y^i) - ∂F̃/∂x^i`, with `G` the spray of `F`. They all
/// vanish exactly when `F̃` is projectively related to `F`.
pub fn rapcsak_residual<K: Kernel, L: Kernel>(kernel: &K, kernel_t: &L, p: &FiberPoint) -> Result<Vec<f64>> {
    check_pair(kernel, kernel_t)?;
    let fj = FinslerJets::new(kernel, p, PROJECTIVE_ORDERS)?;
    let ft = fj.other(kernel_t)?;
    (0..fj.dim())
        .map(|i| Ok(fj.spray_apply(&ft.dy(i))?.value() - ft.dx(i).value()))
        .collect()
}

fn check_pair<K: Kernel, L: Kernel>(a: &K, b: &L) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Input(format!(
            "paired metrics differ in dimension ({} vs {})",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Fits `2E ≈ f F_yy` at `p` whatever the residual.
pub fn fit_scalar_mean_berwald<K: Kernel>(kernel: &K, p: &FiberPoint) -> Result<ScalarFit> {
    let fj = FinslerJets::new(kernel, p, LAMBDA_ORDERS)?;
    fit_from(&fj)
}

pub(crate) fn fit_from(fj: &FinslerJets) -> Result<ScalarFit> {
    let n = fj.dim();
    let e = values(&mean_berwald_jets(fj)?);
    let fyy = hessian_y(fj.f(), n);
    let norm2: f64 = fyy.iter().map(|v| v * v).sum();
    if !(norm2 > 0.0) {
        return Err(Error::SingularMetric("angular metric vanishes".into()));
    }
    let f = 2.0 * e.iter().zip(&fyy).map(|(a, b)| a * b).sum::<f64>() / norm2;
    let defect: f64 = e.iter().zip(&fyy).map(|(a, b)| (2.0 * a - f * b).powi(2)).sum();
    Ok(ScalarFit {
        f,
        residual: (defect / norm2).sqrt(),
    })
}

/// The scalar mean Berwald curvature at `p`, or `None` when `E` is not a
/// multiple of the angular metric within the relative tolerance `tol`.
pub fn scalar_mean_berwald<K: Kernel>(kernel: &K, p: &FiberPoint, tol: f64) -> Result<Option<ScalarFit>> {
    let fit = fit_scalar_mean_berwald(kernel, p)?;
    Ok((fit.residual <= tol).then_some(fit))
}

/// Jet of the least-squares `f`. Its vertical derivatives are exact when
/// `fj` was built with [`SCALAR_GRADIENT_ORDERS`].
pub(crate) fn scalar_jet(fj: &FinslerJets) -> Result<Jet> {
    let n = fj.dim();
    let e = mean_berwald_jets(fj)?;
    let f_y: Vec<Jet> = (0..n).map(|i| fj.f().dy(i)).collect();
    let mut num: Option<Jet> = None;
    let mut den: Option<Jet> = None;
    for i in 0..n {
        for j in 0..n {
            let h = f_y[i].dy(j);
            let a = &e[i * n + j] * &h;
            let b = &h * &h;
            num = Some(match num {
                Some(acc) => &acc + &a,
                None => a,
            });
            den = Some(match den {
                Some(acc) => &acc + &b,
                None => b,
            });
        }
    }
    Ok(num.unwrap().div_jet(&den.unwrap())?.scale(2.0))
}

/// `∂f/∂y^i` of the least-squares scalar at `p`.
pub fn scalar_gradient_y<K: Kernel>(kernel: &K, p: &FiberPoint) -> Result<Vec<f64>> {
    let fj = FinslerJets::new(kernel, p, SCALAR_GRADIENT_ORDERS)?;
    let f = scalar_jet(&fj)?;
    Ok(gradient_y(&f, fj.dim()))
}

/// Relative residuals of the bordered-determinant expressions of `det g`:
/// the angular form `-F^{n-1} |F_yy, F_y; F_yᵀ, 0|` and the generalised form
/// `-(F^{n+1}/F̃²) |F_yy, F̃_y; F̃_yᵀ, 0|` with `F̃ = aux` (or `F`).
pub fn bordered_det_checks<K: Kernel>(kernel: &K, aux: Option<&K>, p: &FiberPoint) -> Result<BorderedChecks> {
    let fj = FinslerJets::new(kernel, p, BORDERED_ORDERS)?;
    let n = fj.dim();
    let f = fj.f().value();
    let det = fj.det_g().value();
    let fyy = hessian_y(fj.f(), n);
    let rund = -f.powi(n as i32 - 1) * bordered_det(&fyy, &gradient_y(fj.f(), n), n);
    let ft = match aux {
        Some(k) => {
            check_pair(kernel, k)?;
            fj.other(k)?
        }
        None => fj.f().clone(),
    };
    let ftv = ft.value();
    if ftv == 0.0 {
        return Err(Error::Domain("auxiliary function vanishes at the point".into()));
    }
    let gg = -f.powi(n as i32 + 1) / (ftv * ftv) * bordered_det(&fyy, &gradient_y(&ft, n), n);
    Ok(BorderedChecks {
        rund_residual: (det - rund).abs() / det.abs(),
        gg_residual: (det - gg).abs() / det.abs(),
    })
}

/// Components of `α = ∇I_k dx^k - I_k δy^k` at `p` and its contraction with
/// the spray.
pub fn alpha_form<K: Kernel>(kernel: &K, sigma: &VolumeDensity, p: &FiberPoint) -> Result<AlphaForm> {
    let fj = FinslerJets::new(kernel, p, ALPHA_ORDERS)?;
    alpha_from(&fj, sigma)
}

pub(crate) fn alpha_from(fj: &FinslerJets, sigma: &VolumeDensity) -> Result<AlphaForm> {
    let n = fj.dim();
    let tau = fj.tau(sigma)?;
    let s = fj.spray_apply(&tau)?;
    let horizontal: Vec<f64> = (0..n)
        .map(|i| Ok(s.dy(i).value() - fj.delta_x(i, &tau)?.value()))
        .collect::<Result<_>>()?;
    let y = values(fj.y());
    Ok(AlphaForm {
        i_g_alpha: horizontal.iter().zip(&y).map(|(a, b)| a * b).sum(),
        vertical: (0..n).map(|i| -tau.dy(i).value()).collect(),
        horizontal,
    })
}

/// `∇I_i = G(I_i) - I_m N^m_i`, the dynamical covariant derivative of the
/// mean Cartan torsion, computed from `I = ∂τ/∂y` independently of `S`.
pub fn mean_cartan_derivative<K: Kernel>(kernel: &K, sigma: &VolumeDensity, p: &FiberPoint) -> Result<Vec<f64>> {
    let fj = FinslerJets::new(kernel, p, ALPHA_ORDERS)?;
    let n = fj.dim();
    let tau = fj.tau(sigma)?;
    let conn = fj.connection()?;
    let cartan: Vec<Jet> = (0..n).map(|i| tau.dy(i)).collect();
    (0..n)
        .map(|i| {
            let mut v = fj.spray_apply(&cartan[i])?.value();
            for m in 0..n {
                v -= cartan[m].value() * conn[m * n + i].value();
            }
            Ok(v)
        })
        .collect()
}

/// `λ`, and when possible `f`, plus the pair quantities against `aux`.
pub fn integral_values<K: Kernel, L: Kernel>(
    kernel: &K,
    aux: Option<&L>,
    p: &FiberPoint,
    tol: f64,
) -> Result<IntegralValues> {
    let fj = FinslerJets::new(kernel, p, LAMBDA_ORDERS)?;
    let fit = fit_from(&fj)?;
    let (i0, projective, rapcsak) = match aux {
        Some(k) => (
            Some(painleve_i0(kernel, k, p)?),
            Some(projective_factor(kernel, k, p)?),
            Some(rapcsak_residual(kernel, k, p)?),
        ),
        None => (None, None, None),
    };
    Ok(IntegralValues {
        lambda: lambda_from(&fj)?,
        i0,
        projective,
        f: (fit.residual <= tol).then_some(fit.f),
        f_residual: fit.residual,
        rapcsak,
    })
}
