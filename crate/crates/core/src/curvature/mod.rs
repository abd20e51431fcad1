//! Pointwise metric data, spray, and the non-Riemannian curvatures.

mod pipeline;

pub use pipeline::{FinslerJets, SINGULAR_TOL};

use serde::Serialize;

use crate::error::Result;
use crate::jets::{FiberPoint, Jet, Kernel, Orders};
use crate::linalg;
use crate::metrics::VolumeDensity;

pub type Vector = Vec<f64>;
pub type Matrix = Vec<Vec<f64>>;
pub type Tensor3 = Vec<Vec<Vec<f64>>>;
pub type Tensor4 = Vec<Vec<Vec<Vec<f64>>>>;

/// Budget for metric data: third vertical derivatives of `F²`.
pub const METRIC_ORDERS: Orders = Orders::new(0, 3, 3);
/// Budget for spray and connection values.
pub const SPRAY_ORDERS: Orders = Orders::new(1, 3, 3);
/// Budget for the full curvature pack. `R^i_jkl` is the deepest quantity:
/// one y-derivative of `δN`, which itself costs two x-orders and four
/// y-orders of `F²`.
pub const CURVATURE_ORDERS: Orders = Orders::new(2, 5, 5);

/// Absolute floor used by [`rank_e`]: singular values below it are zero
/// whatever the largest one is.
pub const RANK_ABS_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricJet {
    #[serde(rename = "F")]
    pub f: f64,
    pub g: Matrix,
    pub g_inv: Matrix,
    pub det_g: f64,
    pub h: Matrix,
    pub y_low: Vector,
    #[serde(rename = "C")]
    pub cartan: Tensor3,
    #[serde(rename = "I")]
    pub mean_cartan: Vector,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprayData {
    #[serde(rename = "G")]
    pub g: Vector,
    /// `N[i][j] = ∂G^i/∂y^j`
    #[serde(rename = "N")]
    pub n: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvaturePack {
    #[serde(rename = "G")]
    pub spray: Vector,
    #[serde(rename = "N")]
    pub connection: Matrix,
    /// `B[i][j][k][l] = B^i_jkl`
    #[serde(rename = "B")]
    pub berwald: Tensor4,
    #[serde(rename = "E")]
    pub mean_berwald: Matrix,
    /// `R2[i][j][k] = R^i_jk`
    #[serde(rename = "R2")]
    pub r2: Tensor3,
    /// `R3[i][j][k][l] = ∂R^i_kl/∂y^j`
    #[serde(rename = "R3")]
    pub r3: Tensor4,
    pub chi: Vector,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "E_alt")]
    pub mean_berwald_alt: Matrix,
    pub chi_alt: Vector,
}

pub(crate) fn matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
}

fn values(jets: &[Jet], n: usize) -> Matrix {
    matrix(n, |i, j| jets[i * n + j].value())
}

/// `g`, `g⁻¹`, `h`, Cartan torsion and distortion at `p`.
pub fn metric_jet<K: Kernel>(kernel: &K, sigma: &VolumeDensity, p: &FiberPoint) -> Result<MetricJet> {
    let fj = FinslerJets::new(kernel, p, METRIC_ORDERS)?;
    metric_jet_from(&fj, sigma)
}

pub(crate) fn metric_jet_from(fj: &FinslerJets, sigma: &VolumeDensity) -> Result<MetricJet> {
    let n = fj.dim();
    let f = fj.f().value();
    let g = values(fj.g(), n);
    let g_inv = values(fj.g_inv(), n);
    let y: Vec<f64> = fj.y().iter().map(Jet::value).collect();
    let h = matrix(n, |i, j| f * fj.f().dy(i).dy(j).value());
    let y_low = (0..n).map(|i| (0..n).map(|k| g[i][k] * y[k]).sum()).collect();
    let cartan: Tensor3 = (0..n)
        .map(|i| matrix(n, |j, k| 0.5 * fj.g()[i * n + j].dy(k).value()))
        .collect();
    let mean_cartan = (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += g_inv[i][j] * cartan[i][j][k];
                }
            }
            acc
        })
        .collect();
    Ok(MetricJet {
        f,
        g,
        g_inv,
        det_g: fj.det_g().value(),
        h,
        y_low,
        cartan,
        mean_cartan,
        tau: fj.tau(sigma)?.value(),
    })
}

/// Spray coefficients and nonlinear connection at `p`.
pub fn spray<K: Kernel>(kernel: &K, p: &FiberPoint) -> Result<SprayData> {
    let fj = FinslerJets::new(kernel, p, SPRAY_ORDERS)?;
    let n = fj.dim();
    Ok(SprayData {
        g: fj.spray()?.iter().map(Jet::value).collect(),
        n: values(fj.connection()?, n),
    })
}

/// All curvature quantities at `p`, each non-Riemannian one by two routes
/// where available (`E`/`E_alt`, `chi`/`chi_alt`).
pub fn curvature_pack<K: Kernel>(kernel: &K, sigma: &VolumeDensity, p: &FiberPoint) -> Result<CurvaturePack> {
    let fj = FinslerJets::new(kernel, p, CURVATURE_ORDERS)?;
    curvature_pack_from(&fj, sigma)
}

pub(crate) fn berwald(fj: &FinslerJets) -> Result<Tensor4> {
    let n = fj.dim();
    let conn = fj.connection()?;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = &conn[i * n + j];
                    (0..n)
                        .map(|k| {
                            let dk = d.dy(k);
                            (0..n).map(|l| dk.dy(l).value()).collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect())
}

pub(crate) fn mean_berwald(b: &Tensor4) -> Matrix {
    let n = b.len();
    matrix(n, |j, k| 0.5 * (0..n).map(|i| b[i][i][j][k]).sum::<f64>())
}

/// Jets of `E_jk = ½ ∂³G^i/∂y^i∂y^j∂y^k`, row-major.
pub(crate) fn mean_berwald_jets(fj: &FinslerJets) -> Result<Vec<Jet>> {
    let n = fj.dim();
    let spray = fj.spray()?;
    let mut trace = spray[0].dy(0);
    for i in 1..n {
        trace = &trace + &spray[i].dy(i);
    }
    Ok((0..n * n).map(|jk| trace.dy(jk / n).dy(jk % n).scale(0.5)).collect())
}

pub(crate) fn curvature_pack_from(fj: &FinslerJets, sigma: &VolumeDensity) -> Result<CurvaturePack> {
    let n = fj.dim();
    let conn = fj.connection()?;
    let b = berwald(fj)?;
    let e = mean_berwald(&b);

    // δ_k N^i_j, stored at [(i*n + j)*n + k]
    let mut delta_n = Vec::with_capacity(n * n * n);
    for ij in 0..n * n {
        for k in 0..n {
            delta_n.push(fj.delta_x(k, &conn[ij])?);
        }
    }
    let r2_jets: Vec<Jet> = (0..n * n * n)
        .map(|idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            &delta_n[(i * n + j) * n + k] - &delta_n[(i * n + k) * n + j]
        })
        .collect();
    let r2: Tensor3 = (0..n)
        .map(|i| matrix(n, |j, k| r2_jets[(i * n + j) * n + k].value()))
        .collect();
    let r3: Tensor4 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| matrix(n, |k, l| r2_jets[(i * n + k) * n + l].dy(j).value()))
                .collect()
        })
        .collect();
    let y: Vec<f64> = fj.y().iter().map(Jet::value).collect();
    // With R2 ordered as δ_k N^i_j − δ_j N^i_k, the Riemann tensor in the
    // trace formula is −R3, so χ_j = ½ R3^i_ijk y^k.
    let chi = (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for i in 0..n {
                for k in 0..n {
                    acc += r3[i][i][j][k] * y[k];
                }
            }
            0.5 * acc
        })
        .collect();

    let s = fj.s_function(sigma)?;
    let s_y: Vec<Jet> = (0..n).map(|i| s.dy(i)).collect();
    let e_alt = matrix(n, |j, k| 0.5 * s_y[j].dy(k).value());
    let chi_alt = (0..n)
        .map(|i| Ok(0.5 * (fj.spray_apply(&s_y[i])?.value() - s.dx(i).value())))
        .collect::<Result<_>>()?;

    Ok(CurvaturePack {
        spray: fj.spray()?.iter().map(Jet::value).collect(),
        connection: values(conn, n),
        berwald: b,
        mean_berwald: e,
        r2,
        r3,
        chi,
        s: s.value(),
        mean_berwald_alt: e_alt,
        chi_alt,
    })
}

/// Number of singular values of the symmetric matrix `e` above
/// `tol × largest` (and above [`RANK_ABS_FLOOR`]); 0 when `e` vanishes.
pub fn rank_e(e: &Matrix, tol: f64) -> usize {
    let n = e.len();
    let flat: Vec<f64> = e.iter().flatten().copied().collect();
    linalg::symmetric_rank(&flat, n, tol, RANK_ABS_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::eval_jet;
    use crate::metrics::{builtin_metric, BuiltinName, MetricKernel, MetricParams};

    fn builtin(name: BuiltinName, dim: usize) -> MetricKernel {
        builtin_metric(name, dim, &MetricParams::default()).unwrap()
    }

    fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
        it.into_iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn euclidean_metric_data() {
        let k = builtin(BuiltinName::Euclidean, 2);
        let p = FiberPoint::new(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap();
        let m = metric_jet(&k, &VolumeDensity::unit(2), &p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.g[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        assert!((m.det_g - 1.0).abs() < 1e-15);
        assert!(m.tau.abs() < 1e-15);
        assert!(max_abs(m.cartan.iter().flatten().flatten()) < 1e-15);
        let c = curvature_pack(&k, &VolumeDensity::unit(2), &p).unwrap();
        assert!(max_abs(c.berwald.iter().flatten().flatten().flatten()) < 1e-14);
        assert!(max_abs(&c.chi) < 1e-14);
        assert!(c.s.abs() < 1e-14);
        assert_eq!(rank_e(&c.mean_berwald, 1e-8), 0);
    }

    #[test]
    fn funk_spray_is_half_f_y() {
        let k = builtin(BuiltinName::Funk, 2);
        let p = FiberPoint::new(vec![0.3, 0.1], vec![1.0, 0.5]).unwrap();
        let s = spray(&k, &p).unwrap();
        let f = k.value(&p).unwrap();
        for i in 0..2 {
            let expect = 0.5 * f * p.y[i];
            assert!((s.g[i] - expect).abs() <= 1e-8 * expect.abs());
        }
    }

    #[test]
    fn funk_mean_berwald_and_chi() {
        for n in [2, 3] {
            let k = builtin(BuiltinName::Funk, n);
            let mut x = vec![0.0; n];
            x[0] = 0.2;
            x[1] = -0.1;
            let mut y = vec![0.5; n];
            y[0] = 1.0;
            let p = FiberPoint::new(x, y).unwrap();
            let c = curvature_pack(&k, &VolumeDensity::unit(n), &p).unwrap();
            let t = eval_jet(&k, &p, Orders::new(0, 2, 2)).unwrap();
            let coef = (n as f64 + 1.0) / 4.0;
            for j in 0..n {
                for l in 0..n {
                    let fyy = t.partial_indices(&[], &[j, l]).unwrap();
                    assert!((c.mean_berwald[j][l] - coef * fyy).abs() < 1e-7);
                    assert!((c.mean_berwald_alt[j][l] - c.mean_berwald[j][l]).abs() < 1e-7);
                }
            }
            assert!(max_abs(&c.chi) < 1e-7, "{:?}", c.chi);
            assert!(max_abs(&c.chi_alt) < 1e-7, "{:?}", c.chi_alt);
            assert_eq!(rank_e(&c.mean_berwald, 1e-8), n - 1);
        }
    }
}
