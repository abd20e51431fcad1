use std::io::Write;

use serde::Serialize;

use finsler::curvature::{curvature_pack, metric_jet, CurvaturePack, MetricJet};
use finsler::flow::{
    integrate_geodesic_partial, track_first_integrals, verify_theorem1, verify_theorem2, Controller, FlowStatus,
    Quantity, Tolerances, Verdict,
};
use finsler::integrals::{
    alpha_form, bordered_det_checks, integral_values, projective_factor, rapcsak_residual, AlphaForm,
    BorderedChecks, IntegralValues,
};
use finsler::jets::{FiberPoint, Kernel};
use finsler::sampling::Sampler;

use crate::input::{load_aux, load_metric, output, parse_vector, write_failed, write_json};
use crate::{AnalyzeArgs, Cli, CliError, Command, ControllerArg, GeodesicArgs, PairArgs, Status, TheoremArg, VerifyArgs};

pub fn run(cli: &Cli) -> Result<Status, CliError> {
    match &cli.command {
        Command::Analyze(args) => analyze(cli, args),
        Command::Verify(args) => verify(cli, args),
        Command::Geodesic(args) => geodesic(cli, args),
        Command::PairCheck(args) => pair_check(cli, args),
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    metric: String,
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(flatten)]
    metric_jet: MetricJet,
    #[serde(flatten)]
    curvature: CurvaturePack,
    #[serde(flatten)]
    integrals: IntegralValues,
    alpha: AlphaForm,
    bordered: BorderedChecks,
}

fn analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<Status, CliError> {
    let (kernel, volume) = load_metric(cli)?;
    let n = kernel.dim();
    let p = FiberPoint::new(parse_vector(&args.x, "x", n)?, parse_vector(&args.y, "y", n)?)?;
    kernel.check_domain(&p.x)?;
    let aux = args.aux.as_deref().map(|a| load_aux(a, &kernel)).transpose()?;
    let report = AnalyzeReport {
        metric: kernel.label().to_string(),
        dim: n,
        metric_jet: metric_jet(&kernel, &volume, &p)?,
        curvature: curvature_pack(&kernel, &volume, &p)?,
        integrals: integral_values(&kernel, aux.as_ref(), &p, args.scalar_tol)?,
        alpha: alpha_form(&kernel, &volume, &p)?,
        bordered: bordered_det_checks(&kernel, aux.as_ref(), &p)?,
        x: p.x,
        y: p.y,
    };
    write_json(cli, &report)?;
    Ok(Status::Pass)
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<Status, CliError> {
    let (kernel, volume) = load_metric(cli)?;
    if args.samples == 0 {
        return Err(CliError::input("--samples must be at least 1"));
    }
    let tol = Tolerances {
        chi: cli.tol,
        rank: args.rank_tol,
        drift: cli.tol,
        scalar_residual: args.scalar_tol,
        constancy: cli.tol,
        t_end: args.t_end,
        ..Tolerances::default()
    };
    let verdict = match args.theorem {
        TheoremArg::One => verify_theorem1(&kernel, &volume, args.samples, args.trajectories, cli.seed, &tol)?,
        TheoremArg::Two => verify_theorem2(&kernel, &volume, args.samples, args.trajectories, cli.seed, &tol)?,
    };
    write_json(cli, &verdict)?;
    Ok(match verdict.verdict {
        Verdict::Pass => Status::Pass,
        Verdict::Fail => Status::Fail,
        Verdict::HypothesesFail => Status::Hypotheses,
    })
}

fn geodesic(cli: &Cli, args: &GeodesicArgs) -> Result<Status, CliError> {
    let (kernel, _) = load_metric(cli)?;
    let n = kernel.dim();
    let x0 = parse_vector(&args.x0, "x0", n)?;
    let y0 = parse_vector(&args.y0, "y0", n)?;
    let track: Vec<Quantity> = args
        .track
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()?;
    let aux = args.aux.as_deref().map(|a| load_aux(a, &kernel)).transpose()?;
    if track.contains(&Quantity::I0) && aux.is_none() {
        return Err(CliError::input("tracking I0 needs --aux"));
    }
    let controller = match args.controller {
        ControllerArg::Adaptive => Controller::Adaptive {
            rtol: args.rtol,
            atol: args.atol,
        },
        ControllerArg::Rk4 => Controller::FixedRk4 { dt: args.dt },
    };
    let (mut traj, failure) = integrate_geodesic_partial(&kernel, &x0, &y0, args.t, controller)?;
    let drift = track_first_integrals(&kernel, aux.as_ref(), &mut traj, &track);

    let mut out = output(cli)?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("y{i}")));
    header.extend(track.iter().map(|q| q.name().to_string()));
    writeln!(out, "{}", header.join(",")).map_err(write_failed)?;
    let columns: Vec<&Vec<f64>> = match &drift {
        Ok(_) => track.iter().map(|q| &traj.tracked[q.name()]).collect(),
        Err(_) => Vec::new(),
    };
    for (i, (t, p)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![fmt(*t)];
        row.extend(p.x.iter().chain(&p.y).map(|v| fmt(*v)));
        row.extend(columns.iter().map(|c| fmt(c[i])));
        writeln!(out, "{}", row.join(",")).map_err(write_failed)?;
    }
    if traj.status == FlowStatus::DomainExit {
        writeln!(
            out,
            "# domain exit at t = {} (within {} of the boundary of the {})",
            fmt(*traj.times.last().unwrap()),
            finsler::flow::BOUNDARY_MARGIN,
            kernel.domain().describe()
        )
        .map_err(write_failed)?;
    }
    let error = failure.map(CliError::from).or(drift.as_ref().err().cloned().map(CliError::from));
    if let Some(e) = &error {
        writeln!(out, "# truncated: {}", e.message.replace('\n', " ")).map_err(write_failed)?;
    }
    out.flush().map_err(write_failed)?;
    drop(out);
    if let Some(e) = error {
        return Err(e);
    }
    let drift = drift?;
    if !drift.quantities.is_empty() {
        eprintln!("{}", drift.summary());
    }
    Ok(Status::Pass)
}

/// 17 significant digits.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct PairReport {
    metric_a: String,
    metric_b: String,
    dim: usize,
    samples: usize,
    seed: u64,
    tol: f64,
    rapcsak_max: f64,
    #[serde(rename = "P_trace_vs_log_max_gap")]
    p_gap_max: f64,
    projectively_related: bool,
}

fn pair_check(cli: &Cli, args: &PairArgs) -> Result<Status, CliError> {
    let (kernel, _) = load_metric(cli)?;
    let aux = load_aux(&args.aux, &kernel)?;
    if args.samples == 0 {
        return Err(CliError::input("--samples must be at least 1"));
    }
    let domain = kernel.domain().intersect(&aux.domain());
    let points = Sampler::new(cli.seed).fiber_points(&domain, kernel.dim(), args.samples);
    let mut rapcsak_max: f64 = 0.0;
    let mut gap_max: f64 = 0.0;
    for p in &points {
        let r = rapcsak_residual(&kernel, &aux, p)?;
        rapcsak_max = r.iter().fold(rapcsak_max, |m, v| m.max(v.abs()));
        let pf = projective_factor(&kernel, &aux, p)?;
        gap_max = gap_max.max((pf.trace - pf.log).abs());
    }
    let report = PairReport {
        metric_a: kernel.label().to_string(),
        metric_b: aux.label().to_string(),
        dim: kernel.dim(),
        samples: args.samples,
        seed: cli.seed,
        tol: cli.tol,
        rapcsak_max,
        p_gap_max: gap_max,
        projectively_related: rapcsak_max <= cli.tol && gap_max <= cli.tol,
    };
    write_json(cli, &report)?;
    Ok(Status::Pass)
}
