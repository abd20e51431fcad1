use rayon::prelude::*;
use serde::Serialize;

use super::MetricKernel;
use crate::jets::{check_homogeneity, eval_jet, FiberPoint, Kernel, Orders};
use crate::linalg;
use crate::sampling::Sampler;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-8;

const HOMOGENEITY_SCALES: [f64; 2] = [0.5, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Largest relative 1-homogeneity defect over samples and test scales.
    pub homogeneity_residual: f64,
    pub min_abs_det_g: f64,
    /// Modal rank of the angular metric `h_ij` over samples.
    pub angular_rank: usize,
    /// Samples where F fails to evaluate, is not positive, or `g` is not
    /// positive definite.
    pub positivity_violations: usize,
    pub samples_used: usize,
}

struct Sample {
    homogeneity: f64,
    abs_det_g: f64,
    rank: usize,
    violation: bool,
}

fn inspect(kernel: &MetricKernel, p: &FiberPoint) -> Sample {
    let n = kernel.dim();
    let bad = Sample {
        homogeneity: f64::INFINITY,
        abs_det_g: 0.0,
        rank: 0,
        violation: true,
    };
    let Ok(t) = eval_jet(kernel, p, Orders::new(0, 2, 2)) else {
        return bad;
    };
    let f = t.value();
    let grad: Vec<f64> = (0..n).map(|i| t.partial_indices(&[], &[i]).unwrap()).collect();
    let mut g = vec![0.0; n * n];
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let fij = t.partial_indices(&[], &[i, j]).unwrap();
            h[i * n + j] = f * fij;
            g[i * n + j] = f * fij + grad[i] * grad[j];
        }
    }
    let homogeneity = HOMOGENEITY_SCALES
        .iter()
        .map(|&s| check_homogeneity(kernel, p, 1.0, s).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    Sample {
        homogeneity,
        abs_det_g: linalg::det_lu(&g, n).abs(),
        rank: linalg::symmetric_rank(&h, n, RANK_REL_TOL, 0.0),
        violation: !(f > 0.0 && f.is_finite()) || !linalg::is_positive_definite(&g, n),
    }
}

/// Samples `sample_count` seeded points of the validation box and checks
/// homogeneity, non-degeneracy of `g` and the rank of the angular metric.
/// Defects are reported, never raised.
pub fn validate_metric(kernel: &MetricKernel, sample_count: usize, seed: u64) -> ValidationReport {
    let points = Sampler::new(seed).fiber_points(&kernel.domain(), kernel.dim(), sample_count);
    let samples: Vec<Sample> = points.par_iter().map(|p| inspect(kernel, p)).collect();
    let ranks: Vec<usize> = samples.iter().map(|s| s.rank).collect();
    ValidationReport {
        homogeneity_residual: samples.iter().map(|s| s.homogeneity).fold(0.0, f64::max),
        min_abs_det_g: samples.iter().map(|s| s.abs_det_g).fold(f64::INFINITY, f64::min),
        angular_rank: linalg::mode(&ranks).unwrap_or(0),
        positivity_violations: samples.iter().filter(|s| s.violation).count(),
        samples_used: samples.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{builtin_metric, BuiltinName, MetricParams};

    fn builtin(name: BuiltinName, dim: usize) -> MetricKernel {
        builtin_metric(name, dim, &MetricParams::default()).unwrap()
    }

    #[test]
    fn euclidean_dim3() {
        let r = validate_metric(&builtin(BuiltinName::Euclidean, 3), 100, 1);
        assert_eq!(r.angular_rank, 2);
        assert!((r.min_abs_det_g - 1.0).abs() < 1e-12);
        assert_eq!(r.positivity_violations, 0);
        assert_eq!(r.samples_used, 100);
    }

    #[test]
    fn funk_dim2() {
        let r = validate_metric(&builtin(BuiltinName::Funk, 2), 100, 2);
        assert_eq!(r.angular_rank, 1);
        assert_eq!(r.positivity_violations, 0);
        assert!(r.homogeneity_residual <= 1e-12);
    }

    #[test]
    fn linear_kernel_is_flagged() {
        let k = MetricKernel::parse("y1", 2).unwrap();
        let r = validate_metric(&k, 50, 3);
        assert!(r.min_abs_det_g < 1e-12);
        assert!(r.positivity_violations > 0);
        assert_eq!(r.angular_rank, 0);
    }
}
