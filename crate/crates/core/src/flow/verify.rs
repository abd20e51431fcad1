use rayon::prelude::*;
use serde::Serialize;

use super::{integrate_geodesic, track_first_integrals, Controller, DriftReport, FlowStatus, Quantity};
use crate::curvature::{curvature_pack_from, rank_e, FinslerJets, CURVATURE_ORDERS};
use crate::error::Result;
use crate::integrals::{fit_from, lambda_from, scalar_jet, SCALAR_GRADIENT_ORDERS, SCALAR_TOL};
use crate::jets::{FiberPoint, Kernel};
use crate::linalg;
use crate::metrics::{MetricKernel, VolumeDensity};
use crate::sampling::{Sampler, BALL_FRACTION, BOX_FRACTION, MIN_Y_NORM, Y_BOX};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// `‖χ‖ ≤ chi · (1 + ‖y‖²)` at every sample.
    pub chi: f64,
    /// Relative singular-value threshold for the rank of `E`.
    pub rank: f64,
    pub drift: f64,
    /// Relative residual of `2E ≈ f F_yy`.
    pub scalar_residual: f64,
    /// Also bounds `‖∂f/∂y‖` and the spread of `f` over the samples.
    pub constancy: f64,
    pub t_end: f64,
    pub controller: Controller,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            chi: 1e-6,
            rank: 1e-8,
            drift: 1e-6,
            scalar_residual: SCALAR_TOL,
            constancy: 1e-6,
            t_end: 3.0,
            controller: Controller::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HypothesesFail,
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisResults {
    /// Largest `‖χ‖` over the samples.
    pub chi_max_norm: f64,
    /// Largest `‖χ‖ / (1 + ‖y‖²)`, the quantity compared with the tolerance.
    pub chi_max_scaled: f64,
    pub rank_e_modal: usize,
    /// Samples where `rank E = n - 1`.
    pub rank_e_full: usize,
    pub scalar_residual: Option<f64>,
    pub chi_ok: bool,
    pub rank_ok: Option<bool>,
    pub scalar_ok: Option<bool>,
}

/// The sampled region the verdict applies to. Verdicts are local to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub domain: String,
    pub x_half_width: f64,
    pub x_max_norm: Option<f64>,
    pub y_box: f64,
    pub y_min_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremVerdict {
    pub theorem: u8,
    pub metric: String,
    pub dim: usize,
    pub hypothesis_results: HypothesisResults,
    pub integral_drift: DriftReport,
    pub verdict: Verdict,
    pub samples: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub region: Region,
    /// Range of the tracked integral over the samples.
    pub integral_range: Option<(f64, f64)>,
    /// Largest `‖∂f/∂y‖` over the samples (theorem 2, `n > 2`).
    pub f_gradient_max: Option<f64>,
    /// `max f - min f` over the samples (theorem 2, `n > 2`).
    pub f_spread: Option<f64>,
    pub f_constant: Option<bool>,
    pub domain_exits: usize,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
}

struct SampleData {
    chi_norm: f64,
    chi_scaled: f64,
    rank: usize,
    lambda: f64,
    fit_f: f64,
    fit_residual: f64,
}

fn inspect(kernel: &MetricKernel, sigma: &VolumeDensity, p: &FiberPoint, tol: &Tolerances) -> Result<SampleData> {
    let fj = FinslerJets::new(kernel, p, CURVATURE_ORDERS)?;
    let pack = curvature_pack_from(&fj, sigma)?;
    let chi_norm = pack.chi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let fit = fit_from(&fj)?;
    Ok(SampleData {
        chi_norm,
        chi_scaled: chi_norm / (1.0 + p.y_norm().powi(2)),
        rank: rank_e(&pack.mean_berwald, tol.rank),
        lambda: lambda_from(&fj)?,
        fit_f: fit.f,
        fit_residual: fit.residual,
    })
}

fn region(kernel: &MetricKernel) -> Region {
    let domain = kernel.domain();
    let radius = domain.radius().unwrap_or(1.0);
    Region {
        domain: domain.describe(),
        x_half_width: BOX_FRACTION * radius,
        x_max_norm: domain.radius().map(|r| BALL_FRACTION * r),
        y_box: Y_BOX,
        y_min_norm: MIN_Y_NORM,
    }
}

/// Seeded sample points, then initial conditions normalised to `F = 1`.
fn draw(kernel: &MetricKernel, samples: usize, trajectories: usize, seed: u64) -> Result<(Vec<FiberPoint>, Vec<FiberPoint>)> {
    let mut sampler = Sampler::new(seed);
    let n = kernel.dim();
    let points = sampler.fiber_points(&kernel.domain(), n, samples);
    let starts = sampler
        .fiber_points(&kernel.domain(), n, trajectories)
        .into_iter()
        .map(|p| {
            let f = kernel.value(&p)?;
            Ok(p.scaled(1.0 / f))
        })
        .collect::<Result<_>>()?;
    Ok((points, starts))
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

fn drift_along(
    kernel: &MetricKernel,
    starts: &[FiberPoint],
    q: Quantity,
    tol: &Tolerances,
) -> Result<(DriftReport, usize)> {
    let reports: Vec<(DriftReport, bool)> = starts
        .par_iter()
        .map(|p| {
            let mut traj = integrate_geodesic(kernel, &p.x, &p.y, tol.t_end, tol.controller)?;
            let r = track_first_integrals(kernel, None, &mut traj, &[q])?;
            Ok((r, traj.status == FlowStatus::DomainExit))
        })
        .collect::<Result<_>>()?;
    let mut merged = DriftReport::default();
    for (i, (r, _)) in reports.iter().enumerate() {
        merged.merge(r, i);
    }
    Ok((merged, reports.iter().filter(|(_, exit)| *exit).count()))
}

/// Checks `χ = 0` and `rank E = n - 1` at `sample_count` seeded points and,
/// when both hold, the drift of `λ` along `trajectory_count` geodesics.
pub fn verify_theorem1(
    kernel: &MetricKernel,
    sigma: &VolumeDensity,
    sample_count: usize,
    trajectory_count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<TheoremVerdict> {
    let n = kernel.dim();
    let (points, starts) = draw(kernel, sample_count, trajectory_count, seed)?;
    let data: Vec<SampleData> = points
        .par_iter()
        .map(|p| inspect(kernel, sigma, p, tol))
        .collect::<Result<_>>()?;
    let chi_ok = data.iter().all(|d| d.chi_scaled <= tol.chi);
    let ranks: Vec<usize> = data.iter().map(|d| d.rank).collect();
    let rank_e_full = ranks.iter().filter(|&&r| r == n - 1).count();
    let rank_ok = rank_e_full == data.len();
    let mut notes = Vec::new();
    let lambda_range = range(data.iter().map(|d| d.lambda));
    if let Some((lo, hi)) = lambda_range {
        if hi - lo <= tol.drift * lo.abs().max(1.0) {
            notes.push(format!("lambda is constant over the samples: {lo}"));
        }
    }
    let hypotheses = HypothesisResults {
        chi_max_norm: data.iter().map(|d| d.chi_norm).fold(0.0, f64::max),
        chi_max_scaled: data.iter().map(|d| d.chi_scaled).fold(0.0, f64::max),
        rank_e_modal: linalg::mode(&ranks).unwrap_or(0),
        rank_e_full,
        scalar_residual: None,
        chi_ok,
        rank_ok: Some(rank_ok),
        scalar_ok: None,
    };
    let (drift, exits, verdict) = if chi_ok && rank_ok {
        let (drift, exits) = drift_along(kernel, &starts, Quantity::Lambda, tol)?;
        let v = if drift.max_drift() <= tol.drift { Verdict::Pass } else { Verdict::Fail };
        (drift, exits, v)
    } else {
        if !chi_ok {
            notes.push("chi-curvature does not vanish on the samples".into());
        }
        if !rank_ok {
            notes.push(format!("mean Berwald curvature has rank {} at {} of {} samples (need {})",
                hypotheses.rank_e_modal, data.len() - rank_e_full, data.len(), n - 1));
        }
        (DriftReport::default(), 0, Verdict::HypothesesFail)
    };
    Ok(TheoremVerdict {
        theorem: 1,
        metric: kernel.label().to_string(),
        dim: n,
        hypothesis_results: hypotheses,
        integral_drift: drift,
        verdict,
        samples: sample_count,
        trajectories: trajectory_count,
        seed,
        region: region(kernel),
        integral_range: lambda_range,
        f_gradient_max: None,
        f_spread: None,
        f_constant: None,
        domain_exits: exits,
        tolerances: *tol,
        notes,
    })
}

/// Checks `χ = 0` and scalar mean Berwald curvature at the samples and, when
/// both hold, the drift of `f` along geodesics; for `n > 2` also that `f`
/// is constant on fibres and over the sampled region.
pub fn verify_theorem2(
    kernel: &MetricKernel,
    sigma: &VolumeDensity,
    sample_count: usize,
    trajectory_count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<TheoremVerdict> {
    let n = kernel.dim();
    let (points, starts) = draw(kernel, sample_count, trajectory_count, seed)?;
    let data: Vec<SampleData> = points
        .par_iter()
        .map(|p| inspect(kernel, sigma, p, tol))
        .collect::<Result<_>>()?;
    let chi_ok = data.iter().all(|d| d.chi_scaled <= tol.chi);
    let scalar_residual = data.iter().map(|d| d.fit_residual).fold(0.0, f64::max);
    let scalar_ok = scalar_residual <= tol.scalar_residual;
    let ranks: Vec<usize> = data.iter().map(|d| d.rank).collect();
    let f_range = range(data.iter().map(|d| d.fit_f));
    let mut notes = Vec::new();
    let hypotheses = HypothesisResults {
        chi_max_norm: data.iter().map(|d| d.chi_norm).fold(0.0, f64::max),
        chi_max_scaled: data.iter().map(|d| d.chi_scaled).fold(0.0, f64::max),
        rank_e_modal: linalg::mode(&ranks).unwrap_or(0),
        rank_e_full: ranks.iter().filter(|&&r| r == n - 1).count(),
        scalar_residual: Some(scalar_residual),
        chi_ok,
        rank_ok: None,
        scalar_ok: Some(scalar_ok),
    };
    if hypotheses.rank_e_modal == 0 {
        notes.push("degenerate case: E vanishes, so f = 0 with decomposition residual 0".into());
    }
    let mut f_gradient_max = None;
    let mut f_spread = None;
    let mut f_constant = None;
    let (drift, exits, verdict) = if chi_ok && scalar_ok {
        let (drift, exits) = drift_along(kernel, &starts, Quantity::ScalarF, tol)?;
        let mut pass = drift.max_drift() <= tol.drift;
        if n > 2 {
            let grads: Vec<f64> = points
                .par_iter()
                .map(|p| {
                    let fj = FinslerJets::new(kernel, p, SCALAR_GRADIENT_ORDERS)?;
                    let f = scalar_jet(&fj)?;
                    Ok((0..n).map(|i| f.dy(i).value().powi(2)).sum::<f64>().sqrt())
                })
                .collect::<Result<_>>()?;
            let g = grads.iter().copied().fold(0.0, f64::max);
            let spread = f_range.map(|(lo, hi)| hi - lo).unwrap_or(0.0);
            let constant = g <= tol.constancy && spread <= tol.constancy;
            pass &= constant;
            f_gradient_max = Some(g);
            f_spread = Some(spread);
            f_constant = Some(constant);
        } else {
            notes.push("constancy of f is only asserted for n > 2; skipped".into());
        }
        (drift, exits, if pass { Verdict::Pass } else { Verdict::Fail })
    } else {
        if !chi_ok {
            notes.push("chi-curvature does not vanish on the samples".into());
        }
        if !scalar_ok {
            notes.push(format!("E is not a multiple of the angular metric (residual {scalar_residual:e})"));
        }
        (DriftReport::default(), 0, Verdict::HypothesesFail)
    };
    Ok(TheoremVerdict {
        theorem: 2,
        metric: kernel.label().to_string(),
        dim: n,
        hypothesis_results: hypotheses,
        integral_drift: drift,
        verdict,
        samples: sample_count,
        trajectories: trajectory_count,
        seed,
        region: region(kernel),
        integral_range: f_range,
        f_gradient_max,
        f_spread,
        f_constant,
        domain_exits: exits,
        tolerances: *tol,
        notes,
    })
}
