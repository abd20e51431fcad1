#![allow(dead_code)]

use finsler::jets::{FiberPoint, Kernel};
use finsler::metrics::{builtin_metric, BuiltinName, MetricKernel, MetricParams};
use finsler::sampling::Sampler;

pub const SEED: u64 = 7;

pub fn builtin(name: BuiltinName, n: usize) -> MetricKernel {
    builtin_metric(name, n, &MetricParams::default()).unwrap()
}

/// Riemannian metric with a non-constant, non-diagonal matrix.
pub fn riemannian(n: usize) -> MetricKernel {
    builtin_metric(BuiltinName::Riemannian, n, &riemannian_params(n)).unwrap()
}

pub fn riemannian_params(n: usize) -> MetricParams {
    let a = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| match (i, j) {
                    _ if i == j => format!("1 + 0.3*x1^2 + 0.2*x{i}^2"),
                    (1, 2) | (2, 1) => "0.1*x1*x2".to_string(),
                    _ => "0".to_string(),
                })
                .collect()
        })
        .collect();
    MetricParams { a: Some(a), b: None }
}

/// Randers metric with a bounded, non-closed one-form.
pub fn randers(n: usize) -> MetricKernel {
    let r = format!("(1 + {})", (1..=n).map(|i| format!("x{i}^2")).collect::<Vec<_>>().join(" + "));
    let b = (1..=n)
        .map(|i| match i {
            1 => format!("0.1 + 0.3*x2/sqrt{r}"),
            2 => format!("-0.2*x1/sqrt{r}"),
            _ => format!("0.05*x{}^2/{r}", i - 1),
        })
        .collect();
    builtin_metric(BuiltinName::Randers, n, &MetricParams { a: None, b: Some(b) }).unwrap()
}

pub fn all_builtins(n: usize) -> Vec<(&'static str, MetricKernel)> {
    vec![
        ("euclidean", builtin(BuiltinName::Euclidean, n)),
        ("riemannian", riemannian(n)),
        ("randers", randers(n)),
        ("funk", builtin(BuiltinName::Funk, n)),
        ("klein", builtin(BuiltinName::Klein, n)),
    ]
}

pub fn points(kernel: &MetricKernel, count: usize) -> Vec<FiberPoint> {
    Sampler::new(SEED).fiber_points(&kernel.domain(), kernel.dim(), count)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn max_abs<'a>(v: impl IntoIterator<Item = &'a f64>) -> f64 {
    v.into_iter().fold(0.0, |m, a| m.max(a.abs()))
}

/// Every multi-index pair `(α, β)` of total order `1..=max`.
pub fn multi_indices(n: usize, max: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let mut out = Vec::new();
    let mut exp = vec![0u8; 2 * n];
    fn rec(exp: &mut Vec<u8>, v: usize, left: usize, out: &mut Vec<Vec<u8>>) {
        if v == exp.len() {
            out.push(exp.clone());
            return;
        }
        for e in 0..=left {
            exp[v] = e as u8;
            rec(exp, v + 1, left - e, out);
        }
        exp[v] = 0;
    }
    let mut all = Vec::new();
    rec(&mut exp, 0, max, &mut all);
    for e in all {
        if e.iter().any(|&k| k > 0) {
            out.push((e[..n].to_vec(), e[n..].to_vec()));
        }
    }
    out
}

pub fn value<K: Kernel>(k: &K, p: &FiberPoint) -> f64 {
    k.value(p).unwrap()
}
