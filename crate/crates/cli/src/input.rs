use std::fs::File;
use std::io::{self, BufWriter, Write};

use finsler::jets::Kernel;
use finsler::metrics::{MetricKernel, MetricSpec, VolumeDensity};

use crate::{Cli, CliError};

/// Reads a spec given inline (starting with `{`) or as a file path.
pub fn load_spec(arg: &str) -> Result<MetricSpec, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| CliError::input(format!("cannot read metric spec '{arg}': {e}")))?
    };
    Ok(MetricSpec::from_json(&text)?)
}

pub fn load_metric(cli: &Cli) -> Result<(MetricKernel, VolumeDensity), CliError> {
    let arg = cli
        .metric
        .as_deref()
        .ok_or_else(|| CliError::input("missing --metric"))?;
    let (kernel, volume) = load_spec(arg)?.build()?;
    let volume = match &cli.volume {
        Some(text) => VolumeDensity::parse(text, kernel.dim())?,
        None => volume,
    };
    Ok((kernel, volume))
}

/// Loads a second metric and checks that its dimension matches.
pub fn load_aux(arg: &str, kernel: &MetricKernel) -> Result<MetricKernel, CliError> {
    let (aux, _) = load_spec(arg)?.build()?;
    if aux.dim() != kernel.dim() {
        return Err(CliError::input(format!(
            "metrics differ in dimension ({} vs {})",
            kernel.dim(),
            aux.dim()
        )));
    }
    Ok(aux)
}

pub fn parse_vector(text: &str, name: &str, dim: usize) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::input(format!("--{name}: '{}' is not a number", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    if v.len() != dim {
        return Err(CliError::input(format!(
            "--{name} has {} components but the metric has dimension {dim}",
            v.len()
        )));
    }
    Ok(v)
}

pub fn output(cli: &Cli) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cli.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| CliError::input(format!("cannot create '{path}': {e}")))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn write_failed(e: io::Error) -> CliError {
    CliError::input(format!("write failed: {e}"))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(cli: &Cli, value: &T) -> Result<(), CliError> {
    let mut out = output(cli)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    writeln!(out, "{text}").and_then(|_| out.flush()).map_err(write_failed)
}
