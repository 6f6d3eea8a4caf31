//! Command-line flags and their resolution into a recorded run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hcspherical::{parse_lambda_grid, BiinvariantMeasure, Error, FieldTag, Result, SpectralParameter, WeylChamberPoint};
use serde::Serialize;

pub const DEFAULT_GRID: &str = "log:1e-3:10:5@8";

#[derive(Parser, Debug)]
#[command(name = "hcsph", version, about = "Spherical functions, moment functions and random walks on GL_n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Table of phi_{i rho + lambda}(g) over a lambda grid.
    Spherical,
    /// m_1, m_2 and Sigma^2 of a point or a measure, with a definiteness verdict.
    Moments,
    /// Normalized walk statistics compared with N(0, Sigma^2).
    Clt,
    /// Oscillation ratio scan.
    Osc,
    /// Numerical checks of the matrix lemmas.
    Verify,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultArg {
    CorruptUnitary,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Base field: real or complex.
    #[arg(long, global = true)]
    pub field: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Haar draws per integral.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Independent walks (clt) or random instances per check (verify).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Walk lengths, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Measure document: a path, or inline JSON starting with `{`.
    #[arg(long, global = true)]
    pub measure: Option<String>,
    /// Chamber point x (descending), comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub chamber: Option<String>,
    /// `l11,l12;l21,l22` or `log:LO:HI:RADII@DIRECTIONS`.
    #[arg(long = "lambda-grid", global = true, allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; also the Monte-Carlo partition count.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Include every per-trial statistic in the clt output.
    #[arg(long = "emit-statistics", global = true)]
    pub emit_statistics: bool,
    #[arg(long, global = true, hide = true, value_enum)]
    pub fault: Option<FaultArg>,
}

/// Everything a run depends on, echoed into its output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub field: FieldTag,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub trials: Option<usize>,
    pub k: Option<Vec<usize>>,
    pub chamber: Option<Vec<f64>>,
    pub measure: Option<serde_json::Value>,
    pub lambda_grid: Option<String>,
    pub format: Format,
    pub threads: usize,
    pub partitions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
}

pub struct Resolved {
    pub cfg: RunConfig,
    pub chamber: Option<WeylChamberPoint<f64>>,
    pub measure: Option<BiinvariantMeasure<f64>>,
    pub grid: Option<Vec<SpectralParameter<f64>>>,
    pub field_given: bool,
    pub emit_statistics: bool,
}

fn config_error(m: impl Into<String>) -> Error {
    Error::InvalidArgument(m.into())
}

fn parse_chamber(s: &str) -> Result<WeylChamberPoint<f64>> {
    let x = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| config_error(format!("chamber coordinate `{v}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    WeylChamberPoint::new(x)
}

fn read_measure(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).map_err(|e| config_error(format!("cannot read measure `{arg}`: {e}")))
    }
}

fn default_samples(command: Command) -> usize {
    match command {
        Command::Spherical | Command::Osc => 10_000,
        Command::Moments => 100_000,
        Command::Clt => 400_000,
        Command::Verify => 100_000,
    }
}

pub fn resolve(command: Command, c: &Common) -> Result<Resolved> {
    if c.threads == 0 {
        return Err(config_error("--threads must be at least 1"));
    }
    let flag_field = c.field.as_deref().map(str::parse::<FieldTag>).transpose()?;
    let chamber = c.chamber.as_deref().map(parse_chamber).transpose()?;
    let (measure, measure_doc) = match &c.measure {
        Some(arg) => {
            let doc = read_measure(arg)?;
            let value: serde_json::Value = serde_json::from_str(&doc)
                .map_err(|e| Error::SpecError { field: "$".into(), message: e.to_string() })?;
            (Some(BiinvariantMeasure::<f64>::from_json(&doc)?), Some(value))
        }
        None => (None, None),
    };
    let measure_field_given = measure.is_some();
    if chamber.is_some() && measure.is_some() {
        return Err(config_error("give either --chamber or --measure, not both"));
    }
    let implied_n = chamber.as_ref().map(|x| x.n()).or(measure.as_ref().map(|m| m.n));
    let n = match (c.n, implied_n) {
        (Some(a), Some(b)) if a != b => return Err(config_error(format!("--n {a} contradicts the input dimension {b}"))),
        (a, b) => a.or(b),
    };
    let field = match (flag_field, measure.as_ref().map(|m| m.field)) {
        (Some(a), Some(b)) if a != b => return Err(config_error(format!("--field {a} contradicts the measure field {b}"))),
        (a, b) => a.or(b).unwrap_or(FieldTag::Real),
    };
    match command {
        Command::Spherical | Command::Osc if chamber.is_none() => {
            return Err(config_error("this command needs --chamber"));
        }
        Command::Clt if measure.is_none() => return Err(config_error("clt needs --measure")),
        Command::Moments if chamber.is_none() && measure.is_none() => {
            return Err(config_error("moments needs --chamber or --measure"));
        }
        _ => {}
    }
    let n = match (command, n) {
        (Command::Verify, n) => n.unwrap_or(0),
        (_, Some(n)) => n,
        (_, None) => return Err(config_error("dimension unknown")),
    };
    let lambda_grid = match command {
        Command::Spherical | Command::Osc => Some(c.lambda_grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_string())),
        _ => c.lambda_grid.clone(),
    };
    let grid = match (&lambda_grid, command) {
        (Some(spec), Command::Spherical | Command::Osc) => Some(parse_lambda_grid::<f64>(spec, n)?),
        _ => None,
    };
    let k = match command {
        Command::Clt => {
            let k = c.k.clone().unwrap_or_else(|| vec![5, 50, 200]);
            if k.is_empty() || k.windows(2).any(|w| w[0] >= w[1]) || k[0] == 0 {
                return Err(config_error("--k must be a strictly increasing list of positive lengths"));
            }
            Some(k)
        }
        _ => c.k.clone(),
    };
    let trials = match command {
        Command::Clt => Some(c.trials.unwrap_or(5000)),
        Command::Verify => Some(c.trials.unwrap_or(1000)),
        _ => c.trials,
    };
    let cfg = RunConfig {
        command,
        field,
        n,
        seed: c.seed,
        samples: c.samples.unwrap_or_else(|| default_samples(command)),
        trials,
        k,
        chamber: chamber.as_ref().map(|x| x.coords().to_vec()),
        measure: measure_doc,
        lambda_grid,
        format: c.format,
        threads: c.threads,
        partitions: c.threads,
        fault: c.fault.map(|_| "corrupt_unitary".to_string()),
    };
    Ok(Resolved {
        cfg,
        chamber,
        measure,
        grid,
        field_given: flag_field.is_some() || measure_field_given,
        emit_statistics: c.emit_statistics,
    })
}
