//! `finsler`: curvature reports, theorem verdicts and geodesics for Finsler
//! metrics given as JSON specs.

mod commands;
mod input;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use finsler::Error;

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Fail = 1,
    Input = 2,
    Numerical = 3,
    Hypotheses = 4,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            status: Status::Input,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::SingularMetric(_) | Error::DeterminantSign(_) | Error::StepFailure(_) => Status::Numerical,
            Error::Domain(_)
            | Error::Capability(_)
            | Error::Parse { .. }
            | Error::Arity { .. }
            | Error::Param(_)
            | Error::Input(_) => Status::Input,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "finsler", version, about = "Curvature, first integrals and geodesics of Finsler metrics")]
pub struct Cli {
    /// Metric spec: a path to a JSON file or inline JSON.
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Verdict tolerance (chi, drift and constancy for `verify`; residuals
    /// for `pair-check`).
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Output path (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Volume density σ(x) as an expression in x; overrides the spec's.
    #[arg(long, global = true)]
    pub volume: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metric data, curvature and integrals at one point, as JSON.
    Analyze(AnalyzeArgs),
    /// Check the hypotheses and conclusion of a theorem on sampled points.
    Verify(VerifyArgs),
    /// Integrate a geodesic and write it as CSV.
    Geodesic(GeodesicArgs),
    /// Test whether two metrics are projectively related.
    PairCheck(PairArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Base point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Fiber vector, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    /// Second metric for I0, P and the Rapcsák residual.
    #[arg(long)]
    pub aux: Option<String>,
    /// Relative residual under which E counts as scalar.
    #[arg(long, default_value_t = finsler::integrals::SCALAR_TOL)]
    pub scalar_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub theorem: TheoremArg,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 10)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 3.0)]
    pub t_end: f64,
    /// Relative singular-value threshold for rank E.
    #[arg(long, default_value_t = 1e-8)]
    pub rank_tol: f64,
    #[arg(long, default_value_t = finsler::integrals::SCALAR_TOL)]
    pub scalar_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerArg {
    Adaptive,
    Rk4,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: String,
    /// End time (negative integrates backwards).
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = ControllerArg::Adaptive)]
    pub controller: ControllerArg,
    /// Step size for rk4.
    #[arg(long, default_value_t = 1e-2)]
    pub dt: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    /// Quantities to track: any of F, lambda, I0, f (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub track: Vec<String>,
    /// Second metric, needed for I0.
    #[arg(long)]
    pub aux: Option<String>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// The second metric.
    #[arg(long)]
    pub aux: String,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            let message = e.message.replace('\n', " ");
            eprintln!("error[{}]: {message}", e.status as u8);
            ExitCode::from(e.status as u8)
        }
    }
}
