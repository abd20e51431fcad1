mod common;

use common::*;
use finsler::curvature::{curvature_pack, metric_jet, rank_e, spray, CurvaturePack};
use finsler::jets::{default_fd_step, eval_jet, fd_derivative_with, FiberPoint, Kernel, Orders, Squared};
use finsler::metrics::{BuiltinName, MetricKernel, VolumeDensity};

fn pack(k: &MetricKernel, p: &FiberPoint) -> CurvaturePack {
    curvature_pack(k, &VolumeDensity::unit(k.dim()), p).unwrap()
}

fn flat<'a, T: IntoIterator<Item = &'a f64>>(v: T) -> Vec<f64> {
    v.into_iter().copied().collect()
}

/// `‖a - t^d b‖ ≤ tol · ‖b‖ t^d`, with a floor for quantities that vanish.
fn homogeneous(a: &[f64], b: &[f64], t: f64, d: i32, tol: f64) -> bool {
    let s = t.powi(d);
    let gap = norm(&a.iter().zip(b).map(|(u, v)| u - s * v).collect::<Vec<_>>());
    gap <= tol * (norm(b) * s).max(1e-6)
}

#[test]
fn homogeneity_degrees() {
    for n in [2, 3] {
        for (name, k) in all_builtins(n) {
            let sigma = VolumeDensity::unit(n);
            for p in points(&k, 10) {
                let q = p.scaled(2.0);
                let (m1, m2) = (metric_jet(&k, &sigma, &p).unwrap(), metric_jet(&k, &sigma, &q).unwrap());
                let (c1, c2) = (pack(&k, &p), pack(&k, &q));
                let checks = [
                    ("F", vec![m2.f], vec![m1.f], 1),
                    ("g", flat(m2.g.iter().flatten()), flat(m1.g.iter().flatten()), 0),
                    ("G", c2.spray.clone(), c1.spray.clone(), 2),
                    ("N", flat(c2.connection.iter().flatten()), flat(c1.connection.iter().flatten()), 1),
                    ("E", flat(c2.mean_berwald.iter().flatten()), flat(c1.mean_berwald.iter().flatten()), -1),
                    ("chi", c2.chi.clone(), c1.chi.clone(), 1),
                    ("chi_alt", c2.chi_alt.clone(), c1.chi_alt.clone(), 1),
                    ("E_alt", flat(c2.mean_berwald_alt.iter().flatten()), flat(c1.mean_berwald_alt.iter().flatten()), -1),
                    ("S", vec![c2.s], vec![c1.s], 1),
                ];
                for (what, a, b, d) in checks {
                    assert!(homogeneous(&a, &b, 2.0, d, 1e-9), "{name}{n} {what}: {a:?} vs {b:?}");
                }
            }
        }
    }
}

#[test]
fn contractions_with_y_vanish() {
    for n in [2, 3, 4] {
        for (name, k) in all_builtins(n) {
            let sigma = VolumeDensity::unit(n);
            for p in points(&k, 10) {
                let m = metric_jet(&k, &sigma, &p).unwrap();
                let c = pack(&k, &p);
                let scale = p.y_norm();
                for i in 0..n {
                    let hy: f64 = (0..n).map(|j| m.h[i][j] * p.y[j]).sum();
                    let ey: f64 = (0..n).map(|j| c.mean_berwald[i][j] * p.y[j]).sum();
                    assert!(hy.abs() <= 1e-10 * scale * (1.0 + max_abs(m.h.iter().flatten())), "{name}{n} h·y");
                    assert!(ey.abs() <= 1e-10 * scale * (1.0 + max_abs(c.mean_berwald.iter().flatten())), "{name}{n} E·y");
                    for j in 0..n {
                        let cy: f64 = (0..n).map(|l| m.cartan[i][j][l] * p.y[l]).sum();
                        assert!(cy.abs() <= 1e-10 * scale * (1.0 + max_abs(m.cartan.iter().flatten().flatten())), "{name}{n} C·y");
                    }
                    let ny: f64 = (0..n).map(|j| c.connection[i][j] * p.y[j]).sum();
                    assert!((ny - 2.0 * c.spray[i]).abs() <= 1e-10 * (1.0 + c.spray[i].abs()), "{name}{n} N·y");
                }
            }
        }
    }
}

#[test]
fn metric_tensor_splits_into_angular_and_radial_parts() {
    for (name, k) in all_builtins(3) {
        for p in points(&k, 20) {
            let m = metric_jet(&k, &VolumeDensity::unit(3), &p).unwrap();
            let t = eval_jet(&k, &p, Orders::new(0, 1, 1)).unwrap();
            let fy: Vec<f64> = (0..3).map(|i| t.partial_indices(&[], &[i]).unwrap()).collect();
            for i in 0..3 {
                assert!((m.y_low[i] - m.f * fy[i]).abs() <= 1e-10 * (1.0 + m.f), "{name} y_i");
                for j in 0..3 {
                    let split = m.h[i][j] + fy[i] * fy[j];
                    assert!((m.g[i][j] - split).abs() <= 1e-10 * (1.0 + m.g[i][j].abs()), "{name} g[{i}][{j}]");
                }
            }
        }
    }
}

#[test]
fn mean_cartan_is_the_fiber_gradient_of_tau() {
    let sigma = VolumeDensity::parse("exp(x1) + x2^2", 3).unwrap();
    for (name, k) in all_builtins(3) {
        for p in points(&k, 10) {
            let m = metric_jet(&k, &sigma, &p).unwrap();
            for i in 0..3 {
                let mut beta = [0u8; 3];
                beta[i] = 1;
                let tau = |q: &FiberPoint| metric_jet(&k, &sigma, q).map(|m| m.tau);
                let fd = fd_derivative_with(tau, &p, &[0; 3], &beta, default_fd_step(&p, 1)).unwrap().value;
                assert!((m.mean_cartan[i] - fd).abs() <= 1e-7 * (1.0 + fd.abs()), "{name} I_{i}: {} vs {fd}", m.mean_cartan[i]);
            }
        }
    }
}

#[test]
fn spray_satisfies_its_defining_equation() {
    // 2 g_il G^l = ½ (y^k ∂²F²/∂x^k∂y^i − ∂F²/∂x^i), from jets of F² alone.
    for n in [2, 3] {
        for (name, k) in all_builtins(n) {
            for p in points(&k, 20) {
                let s = spray(&k, &p).unwrap();
                let m = metric_jet(&k, &VolumeDensity::unit(n), &p).unwrap();
                let t = eval_jet(&Squared(&k), &p, Orders::new(1, 1, 2)).unwrap();
                for i in 0..n {
                    let lhs: f64 = 2.0 * (0..n).map(|l| m.g[i][l] * s.g[l]).sum::<f64>();
                    let rhs = 0.5
                        * ((0..n).map(|kk| p.y[kk] * t.partial_indices(&[kk], &[i]).unwrap()).sum::<f64>()
                            - t.partial_indices(&[i], &[]).unwrap());
                    assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "{name}{n}: {lhs} vs {rhs}");
                }
            }
        }
    }
}

#[test]
fn euclidean_vanishes() {
    let k = builtin(BuiltinName::Euclidean, 2);
    let c = pack(&k, &FiberPoint::new(vec![0.0, 0.0], vec![3.0, 4.0]).unwrap());
    assert!(max_abs(c.berwald.iter().flatten().flatten().flatten()) == 0.0);
    assert!(max_abs(c.mean_berwald.iter().flatten()) == 0.0);
    assert!(max_abs(c.r2.iter().flatten().flatten()) == 0.0);
    assert!(max_abs(&c.chi) == 0.0);
    assert_eq!(c.s, 0.0);
}

#[test]
fn riemannian_quantities_vanish() {
    for n in [2, 3] {
        for k in [riemannian(n), builtin(BuiltinName::Klein, n)] {
            for p in points(&k, 20) {
                let m = metric_jet(&k, &VolumeDensity::unit(n), &p).unwrap();
                let c = pack(&k, &p);
                assert!(max_abs(m.cartan.iter().flatten().flatten()) <= 1e-8);
                assert!(max_abs(c.berwald.iter().flatten().flatten().flatten()) <= 1e-8);
                assert!(max_abs(c.mean_berwald.iter().flatten()) <= 1e-8);
                assert!(max_abs(&c.chi) <= 1e-8);
                assert_eq!(rank_e(&c.mean_berwald, 1e-8), 0);
            }
        }
    }
}

#[test]
fn funk_mean_berwald_against_spray_oracle() {
    // For Funk, G^i = ½ F y^i, so Σ_i ∂³(F y^i)/∂y^i∂y^j∂y^k gives 4E_jk.
    for n in [2, 3] {
        let k = builtin(BuiltinName::Funk, n);
        for p in points(&k, 20) {
            let t = eval_jet(&k, &p, Orders::new(0, 3, 3)).unwrap();
            let d = |ys: &[usize]| t.partial_indices(&[], ys).unwrap();
            let c = pack(&k, &p);
            for j in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += d(&[i, j, l]) * p.y[i] + d(&[j, l]);
                        if i == j {
                            acc += d(&[i, l]);
                        }
                        if i == l {
                            acc += d(&[i, j]);
                        }
                    }
                    let oracle = acc / 4.0;
                    assert!((c.mean_berwald[j][l] - oracle).abs() <= 1e-7 * (1.0 + oracle.abs()));
                    let scalar = (n as f64 + 1.0) / 4.0 * d(&[j, l]);
                    assert!((c.mean_berwald[j][l] - scalar).abs() <= 1e-7 * (1.0 + scalar.abs()));
                }
            }
            let scale = p.y_norm().powi(2) * (1.0 + max_abs(c.spray.iter()));
            assert!(norm(&c.chi) <= 1e-7 * scale, "{:?}", c.chi);
            assert_eq!(rank_e(&c.mean_berwald, 1e-8), n - 1);
        }
    }
}

#[test]
fn chi_agrees_with_the_jacobi_endomorphism_route() {
    // χ_k = −⅙ (2 ∂R^m_k/∂y^m + ∂R^m_m/∂y^k), with R^i_k = R^i_jk y^j,
    // the y-derivatives taken by central differences of curvature packs.
    for k in [randers(2), randers(3)] {
        let n = k.dim();
        for p in points(&k, 5) {
            let jacobi = |y: &[f64]| -> Vec<Vec<f64>> {
                let c = pack(&k, &FiberPoint::new(p.x.clone(), y.to_vec()).unwrap());
                (0..n).map(|i| (0..n).map(|kk| (0..n).map(|j| c.r2[i][j][kk] * y[j]).sum()).collect()).collect()
            };
            let h = 1e-5;
            let d: Vec<Vec<Vec<f64>>> = (0..n)
                .map(|m| {
                    let (mut yp, mut ym) = (p.y.clone(), p.y.clone());
                    yp[m] += h;
                    ym[m] -= h;
                    let (a, b) = (jacobi(&yp), jacobi(&ym));
                    (0..n).map(|i| (0..n).map(|kk| (a[i][kk] - b[i][kk]) / (2.0 * h)).collect()).collect()
                })
                .collect();
            let c = pack(&k, &p);
            for kk in 0..n {
                let t1: f64 = (0..n).map(|m| d[m][m][kk]).sum();
                let t2: f64 = (0..n).map(|m| d[kk][m][m]).sum();
                let oracle = -(2.0 * t1 + t2) / 6.0;
                assert!((c.chi[kk] - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()), "{} vs {oracle}", c.chi[kk]);
                assert!((c.chi_alt[kk] - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()));
            }
            assert!(norm(&c.chi) > 1e-4, "generic Randers should have χ ≠ 0");
        }
    }
}
