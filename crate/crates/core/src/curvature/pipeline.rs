use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{coordinate_jets, kernel_jet, FiberPoint, Jet, Kernel, Layout, Orders};
use crate::linalg;
use crate::metrics::VolumeDensity;

/// Relative threshold for `|det g| < SINGULAR_TOL · ‖g‖ⁿ`.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Metric and spray data of one kernel as jets around a fiber point.
///
/// Every quantity is a [`Jet`] in the same layout, so further derivatives
/// (vertical, horizontal or along the spray) are exact up to the budget
/// chosen at construction. Row-major `n × n` storage throughout; `N[i*n+j]`
/// is `N^i_j = ∂G^i/∂y^j`.
#[derive(Debug, Clone)]
pub struct FinslerJets {
    n: usize,
    layout: Arc<Layout>,
    x: Vec<Jet>,
    y: Vec<Jet>,
    f: Jet,
    f2: Jet,
    g: Vec<Jet>,
    g_inv: Vec<Jet>,
    det_g: Jet,
    spray: Option<(Vec<Jet>, Vec<Jet>)>,
}

impl FinslerJets {
    /// Builds the jets of `F`, `F²`, `g`, `g⁻¹` and `det g`, and of the spray
    /// `G^i` and connection `N^i_j` whenever the budget has an x-order.
    pub fn new<K: Kernel>(kernel: &K, p: &FiberPoint, orders: Orders) -> Result<Self> {
        let n = kernel.dim();
        let layout = Layout::shared(n, orders)?;
        let f = kernel_jet(kernel, p, &layout)?;
        let (x, y) = coordinate_jets(&layout, p);
        let f2 = &f * &f;
        let f2_y: Vec<Jet> = (0..n).map(|i| f2.dy(i)).collect();
        let mut g = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                g.push(f2_y[i].dy(j).scale(0.5));
            }
        }
        let values: Vec<f64> = g.iter().map(Jet::value).collect();
        let norm = linalg::frobenius(&values);
        let (g_inv, det_g) = invert(&g, n)?;
        let det = det_g.value();
        if !(det.abs() >= SINGULAR_TOL * norm.powi(n as i32)) {
            return Err(Error::SingularMetric(format!(
                "|det g| = {:e} at x = {:?}, y = {:?}",
                det.abs(),
                p.x,
                p.y
            )));
        }
        let mut jets = FinslerJets {
            n,
            layout,
            x,
            y,
            f,
            f2,
            g,
            g_inv,
            det_g,
            spray: None,
        };
        if orders.max_x >= 1 {
            jets.spray = Some(jets.build_spray(&f2_y));
        }
        Ok(jets)
    }

    fn build_spray(&self, f2_y: &[Jet]) -> (Vec<Jet>, Vec<Jet>) {
        let n = self.n;
        // w_l = y^k ∂²F²/∂x^k∂y^l - ∂F²/∂x^l
        let w: Vec<Jet> = (0..n)
            .map(|l| {
                let mut acc = self.f2.dx(l).scale(-1.0);
                for k in 0..n {
                    acc = &acc + &(&self.y[k] * &f2_y[l].dx(k));
                }
                acc
            })
            .collect();
        let spray: Vec<Jet> = (0..n)
            .map(|i| {
                let mut acc = &self.g_inv[i * n] * &w[0];
                for l in 1..n {
                    acc = &acc + &(&self.g_inv[i * n + l] * &w[l]);
                }
                acc.scale(0.25)
            })
            .collect();
        let conn = (0..n * n).map(|ij| spray[ij / n].dy(ij % n)).collect();
        (spray, conn)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// Coordinate jets `x^k`.
    pub fn x(&self) -> &[Jet] {
        &self.x
    }

    /// Coordinate jets `y^k`.
    pub fn y(&self) -> &[Jet] {
        &self.y
    }

    pub fn f(&self) -> &Jet {
        &self.f
    }

    pub fn f_squared(&self) -> &Jet {
        &self.f2
    }

    pub fn g(&self) -> &[Jet] {
        &self.g
    }

    pub fn g_inv(&self) -> &[Jet] {
        &self.g_inv
    }

    pub fn det_g(&self) -> &Jet {
        &self.det_g
    }

    fn spray_parts(&self) -> Result<&(Vec<Jet>, Vec<Jet>)> {
        self.spray
            .as_ref()
            .ok_or_else(|| Error::Capability("spray jets need an x-order of at least 1".into()))
    }

    /// Spray coefficients `G^i`.
    pub fn spray(&self) -> Result<&[Jet]> {
        Ok(&self.spray_parts()?.0)
    }

    /// Connection coefficients `N^i_j`, row-major.
    pub fn connection(&self) -> Result<&[Jet]> {
        Ok(&self.spray_parts()?.1)
    }

    /// Jet of another kernel in this layout (e.g. a second metric `F̃`).
    pub fn other<K: Kernel>(&self, kernel: &K) -> Result<Jet> {
        let p = FiberPoint {
            x: self.x.iter().map(Jet::value).collect(),
            y: self.y.iter().map(Jet::value).collect(),
        };
        kernel_jet(kernel, &p, &self.layout)
    }

    /// `G(φ) = y^k ∂φ/∂x^k - 2 G^k ∂φ/∂y^k`
    pub fn spray_apply(&self, phi: &Jet) -> Result<Jet> {
        let spray = self.spray()?;
        let mut acc = &self.y[0] * &phi.dx(0);
        for k in 0..self.n {
            if k > 0 {
                acc = &acc + &(&self.y[k] * &phi.dx(k));
            }
            acc = acc.axpy(-2.0, &(&spray[k] * &phi.dy(k)));
        }
        Ok(acc)
    }

    /// `δφ/δx^k = ∂φ/∂x^k - N^m_k ∂φ/∂y^m`
    pub fn delta_x(&self, k: usize, phi: &Jet) -> Result<Jet> {
        let conn = self.connection()?;
        let n = self.n;
        let mut acc = phi.dx(k);
        for m in 0..n {
            acc = &acc - &(&conn[m * n + k] * &phi.dy(m));
        }
        Ok(acc)
    }

    /// Jet of `σ(x)`.
    pub fn density(&self, sigma: &VolumeDensity) -> Result<Jet> {
        if sigma.dim() != self.n {
            return Err(Error::Input(format!(
                "volume density has dimension {} but metric has dimension {}",
                sigma.dim(),
                self.n
            )));
        }
        let s = sigma.evaluate(&self.x)?;
        if !(s.value() > 0.0) {
            return Err(Error::Domain(format!("volume density is {} (must be positive)", s.value())));
        }
        Ok(s)
    }

    /// Distortion `τ = ½ ln(|det g| / σ)`.
    pub fn tau(&self, sigma: &VolumeDensity) -> Result<Jet> {
        let s = self.density(sigma)?;
        let det = if self.det_g.value() < 0.0 {
            self.det_g.scale(-1.0)
        } else {
            self.det_g.clone()
        };
        Ok(det.div_jet(&s)?.ln()?.scale(0.5))
    }

    /// `S = G(τ)`
    pub fn s_function(&self, sigma: &VolumeDensity) -> Result<Jet> {
        self.spray_apply(&self.tau(sigma)?)
    }
}

/// Inverse and determinant of a matrix of jets by Gauss–Jordan elimination,
/// pivoting on the constant terms.
pub(crate) fn invert(a: &[Jet], n: usize) -> Result<(Vec<Jet>, Jet)> {
    let layout = a[0].layout().clone();
    let mut m = a.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| Jet::constant(&layout, if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    let mut det = Jet::constant(&layout, 1.0);
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&r, &s| m[r * n + c].value().abs().total_cmp(&m[s * n + c].value().abs()))
            .unwrap();
        if m[piv * n + c].value() == 0.0 {
            return Err(Error::SingularMetric("metric tensor has a zero pivot".into()));
        }
        if piv != c {
            for j in 0..n {
                m.swap(piv * n + j, c * n + j);
                inv.swap(piv * n + j, c * n + j);
            }
            det = det.scale(-1.0);
        }
        let p = m[c * n + c].clone();
        det = &det * &p;
        let r = p.recip()?;
        for j in c..n {
            m[c * n + j] = &m[c * n + j] * &r;
        }
        for j in 0..n {
            inv[c * n + j] = &inv[c * n + j] * &r;
        }
        for row in 0..n {
            if row == c {
                continue;
            }
            let factor = m[row * n + c].clone();
            for j in c..n {
                m[row * n + j] = &m[row * n + j] - &(&factor * &m[c * n + j]);
            }
            for j in 0..n {
                inv[row * n + j] = &inv[row * n + j] - &(&factor * &inv[c * n + j]);
            }
        }
    }
    Ok((inv, det))
}
