//! Geodesic flow `ẋ = y, ẏ = -2G(x, y)`, first-integral tracking, and the
//! theorem verdicts.

mod ode;
mod verify;

pub use verify::{verify_theorem1, verify_theorem2, HypothesisResults, Region, Tolerances, TheoremVerdict, Verdict};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::FinslerJets;
use crate::error::{Error, Result};
use crate::integrals::{fit_from, lambda_from, painleve_i0, LAMBDA_ORDERS};
use crate::jets::{FiberPoint, Kernel, Orders};
use crate::metrics::MetricKernel;

/// Budget for the spray values on the right-hand side.
pub const FLOW_ORDERS: Orders = Orders::new(1, 2, 2);
/// Integration stops once the base point is this close to the domain
/// boundary.
pub const BOUNDARY_MARGIN: f64 = 1e-3;
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Controller {
    FixedRk4 { dt: f64 },
    Adaptive { rtol: f64, atol: f64 },
}

impl Default for Controller {
    fn default() -> Self {
        Controller::Adaptive { rtol: 1e-10, atol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Completed,
    /// Stopped early because the base point came within
    /// [`BOUNDARY_MARGIN`] of the domain boundary.
    DomainExit,
}

/// Samples of a geodesic. Times are monotone in the direction of
/// integration (decreasing for negative `t_end`).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FiberPoint>,
    pub tracked: BTreeMap<String, Vec<f64>>,
    pub status: FlowStatus,
}

impl Trajectory {
    pub fn last(&self) -> &FiberPoint {
        self.states.last().expect("trajectories hold at least the initial state")
    }
}

/// `(ẋ, ẏ)` at the packed state `u = (x, y)`.
pub fn geodesic_rhs(kernel: &MetricKernel, u: &[f64]) -> Result<Vec<f64>> {
    let n = u.len() / 2;
    let p = FiberPoint::new(u[..n].to_vec(), u[n..].to_vec())?;
    let fj = FinslerJets::new(kernel, &p, FLOW_ORDERS)?;
    let mut out = u[n..].to_vec();
    out.extend(fj.spray()?.iter().map(|g| -2.0 * g.value()));
    Ok(out)
}

/// Integrates the geodesic through `(x0, y0)` up to time `t_end` (which may
/// be negative). Failures return `Err`; see [`integrate_geodesic_partial`]
/// to keep the states computed before a failure.
pub fn integrate_geodesic(
    kernel: &MetricKernel,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    controller: Controller,
) -> Result<Trajectory> {
    match integrate_geodesic_partial(kernel, x0, y0, t_end, controller)? {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`integrate_geodesic`], but a failure after the start returns the
/// states reached so far alongside the error.
pub fn integrate_geodesic_partial(
    kernel: &MetricKernel,
    x0: &[f64],
    y0: &[f64],
    t_end: f64,
    controller: Controller,
) -> Result<(Trajectory, Option<Error>)> {
    let start = FiberPoint::new(x0.to_vec(), y0.to_vec())?;
    if start.dim() != kernel.dim() {
        return Err(Error::Input(format!(
            "start state has dimension {} but metric has dimension {}",
            start.dim(),
            kernel.dim()
        )));
    }
    if !t_end.is_finite() {
        return Err(Error::Input("end time must be finite".into()));
    }
    kernel.check_domain(x0)?;
    let rhs = |u: &[f64]| geodesic_rhs(kernel, u);
    // validates the start (singular metric, etc.)
    rhs(&pack(&start))?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![start],
        tracked: BTreeMap::new(),
        status: FlowStatus::Completed,
    };
    let failure = match controller {
        Controller::FixedRk4 { dt } => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Input(format!("step size must be positive, got {dt}")));
            }
            run_fixed(kernel, &rhs, &mut traj, t_end, dt)
        }
        Controller::Adaptive { rtol, atol } => {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(Error::Input("tolerances must be positive".into()));
            }
            run_adaptive(kernel, &rhs, &mut traj, t_end, rtol, atol)
        }
    };
    Ok((traj, failure.err()))
}

fn pack(p: &FiberPoint) -> Vec<f64> {
    p.x.iter().chain(&p.y).copied().collect()
}

fn unpack(u: &[f64]) -> FiberPoint {
    let n = u.len() / 2;
    FiberPoint {
        x: u[..n].to_vec(),
        y: u[n..].to_vec(),
    }
}

/// Records an accepted state; returns false once the boundary margin is hit.
fn accept(kernel: &MetricKernel, traj: &mut Trajectory, t: f64, u: Vec<f64>) -> bool {
    let p = unpack(&u);
    let near = kernel.domain().boundary_distance(&p.x) < BOUNDARY_MARGIN;
    traj.times.push(t);
    traj.states.push(p);
    if near {
        traj.status = FlowStatus::DomainExit;
    }
    !near
}

fn run_fixed(
    kernel: &MetricKernel,
    rhs: &impl Fn(&[f64]) -> Result<Vec<f64>>,
    traj: &mut Trajectory,
    t_end: f64,
    dt: f64,
) -> Result<()> {
    let steps = (t_end.abs() / dt).ceil() as usize;
    if steps > MAX_STEPS {
        return Err(Error::Input(format!("{steps} fixed steps exceed the limit of {MAX_STEPS}")));
    }
    let mut u = pack(&traj.states[0]);
    for s in 1..=steps {
        let t_prev = traj.times[traj.times.len() - 1];
        let t = if s == steps { t_end } else { t_end.signum() * dt * s as f64 };
        u = match ode::rk4_step(rhs, &u, t - t_prev) {
            Ok(v) => v,
            Err(Error::Domain(_)) => {
                traj.status = FlowStatus::DomainExit;
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        if !accept(kernel, traj, t, u.clone()) {
            return Ok(());
        }
    }
    Ok(())
}

fn run_adaptive(
    kernel: &MetricKernel,
    rhs: &impl Fn(&[f64]) -> Result<Vec<f64>>,
    traj: &mut Trajectory,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<()> {
    if t_end == 0.0 {
        return Ok(());
    }
    let dir = t_end.signum();
    let mut u = pack(&traj.states[0]);
    let mut t = 0.0;
    let mut h = dir * (1e-2 * t_end.abs()).min(1e-2);
    let mut steps = 0;
    while dir * (t_end - t) > 0.0 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::StepFailure(format!("more than {MAX_STEPS} steps at t = {t}")));
        }
        let min_step = 1e-14 * t.abs().max(1.0);
        if (t_end - t).abs() < min_step {
            *traj.times.last_mut().unwrap() = t_end;
            break;
        }
        if dir * (t + h - t_end) > 0.0 {
            h = t_end - t;
        }
        if h.abs() < min_step {
            return Err(Error::StepFailure(format!("step size underflow at t = {t}")));
        }
        match ode::dp45_step(rhs, &u, h, rtol, atol) {
            Ok((next, err)) if err <= 1.0 => {
                let t_next = if (t + h - t_end).abs() <= 1e-15 * t_end.abs() { t_end } else { t + h };
                t = t_next;
                u = next;
                if !accept(kernel, traj, t, u.clone()) {
                    return Ok(());
                }
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= grow;
            }
            Ok((_, err)) => {
                h *= if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            }
            Err(Error::Domain(_)) => {
                // a trial stage left the domain: retry with a shorter step
                h *= 0.25;
                if h.abs() < min_step {
                    traj.status = FlowStatus::DomainExit;
                    return Ok(());
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Quantities that can be tracked along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Quantity {
    #[serde(rename = "F")]
    F,
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "I0")]
    I0,
    /// Least-squares scalar mean Berwald curvature.
    #[serde(rename = "f")]
    ScalarF,
}

impl Quantity {
    pub fn name(&self) -> &'static str {
        match self {
            Quantity::F => "F",
            Quantity::Lambda => "lambda",
            Quantity::I0 => "I0",
            Quantity::ScalarF => "f",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" => Ok(Quantity::F),
            "lambda" => Ok(Quantity::Lambda),
            "I0" => Ok(Quantity::I0),
            "f" => Ok(Quantity::ScalarF),
            other => Err(Error::Input(format!(
                "unknown quantity '{other}' (expected F, lambda, I0 or f)"
            ))),
        }
    }
}

/// Drift of one quantity: `max_t |v(t) - v(0)| / max(1, |v(0)|)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantityDrift {
    pub quantity: Quantity,
    pub initial: f64,
    pub max_drift: f64,
    /// Time of the largest drift.
    pub at_time: f64,
    /// Trajectory index, when the report merges several trajectories.
    pub trajectory: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DriftReport {
    pub quantities: Vec<QuantityDrift>,
}

impl DriftReport {
    pub fn get(&self, q: Quantity) -> Option<&QuantityDrift> {
        self.quantities.iter().find(|d| d.quantity == q)
    }

    pub fn max_drift(&self) -> f64 {
        self.quantities.iter().map(|d| d.max_drift).fold(0.0, f64::max)
    }

    /// Keeps, per quantity, the worse of `self` and `other`; `other`'s
    /// entries are relabelled with trajectory index `index`.
    pub fn merge(&mut self, other: &DriftReport, index: usize) {
        for d in &other.quantities {
            let d = QuantityDrift {
                trajectory: index,
                ..d.clone()
            };
            match self.quantities.iter_mut().find(|e| e.quantity == d.quantity) {
                Some(e) if e.max_drift >= d.max_drift => {}
                Some(e) => *e = d,
                None => self.quantities.push(d),
            }
        }
    }

    /// One-line summary, e.g. `drift: F=1.2e-12 (t=3) lambda=4.0e-9 (t=1.5)`.
    pub fn summary(&self) -> String {
        let parts: Vec<String> = self
            .quantities
            .iter()
            .map(|d| format!("{}={:.3e} (t={})", d.quantity, d.max_drift, d.at_time))
            .collect();
        format!("drift: {}", parts.join(" "))
    }
}

/// Value of `q` at `p`; `I0` pairs the kernel with `aux`.
pub fn quantity_value(kernel: &MetricKernel, aux: Option<&MetricKernel>, q: Quantity, p: &FiberPoint) -> Result<f64> {
    match q {
        Quantity::F => kernel.value(p),
        Quantity::Lambda => lambda_from(&FinslerJets::new(kernel, p, LAMBDA_ORDERS)?),
        Quantity::ScalarF => Ok(fit_from(&FinslerJets::new(kernel, p, LAMBDA_ORDERS)?)?.f),
        Quantity::I0 => {
            let aux = aux.ok_or_else(|| Error::Input("tracking I0 needs an auxiliary metric".into()))?;
            painleve_i0(kernel, aux, p)
        }
    }
}

/// Evaluates each requested quantity at every state, stores the series in
/// `traj.tracked`, and reports their drift.
pub fn track_first_integrals(
    kernel: &MetricKernel,
    aux: Option<&MetricKernel>,
    traj: &mut Trajectory,
    which: &[Quantity],
) -> Result<DriftReport> {
    if which.contains(&Quantity::I0) && aux.is_none() {
        return Err(Error::Input("tracking I0 needs an auxiliary metric".into()));
    }
    let mut report = DriftReport::default();
    for &q in which {
        if report.get(q).is_some() {
            continue;
        }
        let series: Vec<f64> = traj
            .states
            .par_iter()
            .map(|p| quantity_value(kernel, aux, q, p))
            .collect::<Result<_>>()?;
        let v0 = series[0];
        let scale = v0.abs().max(1.0);
        let (idx, max_drift) = series
            .iter()
            .map(|v| (v - v0).abs() / scale)
            .enumerate()
            .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
        report.quantities.push(QuantityDrift {
            quantity: q,
            initial: v0,
            max_drift,
            at_time: traj.times[idx],
            trajectory: 0,
        });
        traj.tracked.insert(q.name().to_string(), series);
    }
    Ok(report)
}
