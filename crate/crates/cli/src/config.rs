//! Config file schema, value parsing and flag/file merging.
//!
//! A config file is a TOML document with one flat table per subcommand plus
//! `[run]` and `[gamma]`. Every key mirrors a command-line flag; flags win.

use crate::error::CliError;
use clap::{Args, ValueEnum};
use cwdiss_core::microsim::Observable;
use cwdiss_core::GammaSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const THREADS_ENV: &str = "CWDISS_THREADS";

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub run: RunSection,
    pub gamma: Option<GammaSpec>,
    pub phase: PhaseSection,
    pub ode: OdeSection,
    pub simulate: SimulateSection,
    pub mdp: MdpSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSection {
    pub kappa: Option<GridValue>,
    pub beta: Option<GridValue>,
    pub curves: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeSection {
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub init: Option<PairValue>,
    pub tmax: Option<f64>,
    pub dt: Option<f64>,
    pub tol: Option<f64>,
    pub cycles: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub n: Option<u64>,
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub init: Option<PairValue>,
    pub tmax: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdpSection {
    pub regime: Option<RegimeChoice>,
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub path: Option<String>,
    pub x0: Option<f64>,
    pub tmax: Option<f64>,
    pub points: Option<usize>,
    pub tabulate: Option<bool>,
    pub exit: Option<bool>,
    pub n: Option<u64>,
    pub replicas: Option<usize>,
    pub delta: Option<f64>,
    pub horizon: Option<f64>,
    pub observable: Option<ObservableChoice>,
    pub scaling_exponent: Option<f64>,
    pub seed: Option<u64>,
}

/// A grid given either as `"start:stop:count"` or as a single number.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Number(f64),
    Text(String),
}

/// A pair given either as `"a,b"` or as a two-element array.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PairValue {
    Pair([f64; 2]),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GammaChoice {
    Tanh,
    Exp,
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeChoice {
    Subcritical,
    #[value(alias = "critical_line", alias = "critical-line")]
    #[serde(alias = "critical_line")]
    Critical,
    #[value(alias = "tri_critical", alias = "tri-critical")]
    #[serde(alias = "tri_critical")]
    Tricritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableChoice {
    #[value(alias = "abs_m")]
    AbsM,
    #[value(alias = "abs_zeta")]
    AbsZeta,
    Radius,
}

impl From<ObservableChoice> for Observable {
    fn from(c: ObservableChoice) -> Self {
        match c {
            ObservableChoice::AbsM => Observable::AbsM,
            ObservableChoice::AbsZeta => Observable::AbsZeta,
            ObservableChoice::Radius => Observable::Radius,
        }
    }
}

/// Rate-function flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct GammaArgs {
    /// Rate function.
    #[arg(long, value_enum)]
    pub gamma: Option<GammaChoice>,
    /// Taylor coefficients c0,...,c6 of a polynomial rate function.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coefficients: Option<Vec<f64>>,
}

impl GammaArgs {
    /// Flags first, then the `[gamma]` table, then `1 + tanh`.
    pub fn resolve(&self, file: Option<&GammaSpec>) -> Result<GammaSpec, CliError> {
        let file_coefficients = match file {
            Some(GammaSpec::Polynomial { coefficients }) => Some(coefficients.clone()),
            _ => None,
        };
        match (self.gamma, &self.coefficients) {
            (Some(GammaChoice::Tanh), None) => Ok(GammaSpec::Tanh),
            (Some(GammaChoice::Exp), None) => Ok(GammaSpec::Exp),
            (Some(GammaChoice::Tanh | GammaChoice::Exp), Some(_)) => {
                Err(CliError::config("--coefficients only applies to --gamma polynomial"))
            }
            (Some(GammaChoice::Polynomial) | None, Some(c)) => Ok(GammaSpec::Polynomial { coefficients: c.clone() }),
            (Some(GammaChoice::Polynomial), None) => file_coefficients
                .map(|coefficients| GammaSpec::Polynomial { coefficients })
                .ok_or_else(|| CliError::config("--gamma polynomial needs --coefficients")),
            (None, None) => Ok(file.cloned().unwrap_or(GammaSpec::Tanh)),
        }
    }
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Worker count: flag, then file, then the environment, then 0 (all cores).
pub fn threads(flag: Option<usize>, file: Option<usize>) -> Result<usize, CliError> {
    if let Some(t) = flag.or(file) {
        return Ok(t);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("{THREADS_ENV} must be a nonnegative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn parse_number(text: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("{what}: {text:?} is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("{what}: {text:?} is not finite")))
    }
}

/// Parses `start:stop:count` (inclusive, `count ≥ 2`) or a single number.
pub fn parse_grid(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![parse_number(single, what)?]),
        [start, stop, count] => {
            let (lo, hi) = (parse_number(start, what)?, parse_number(stop, what)?);
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| CliError::config(format!("{what}: count {count:?} is not a positive integer")))?;
            match count {
                0 => Err(CliError::config(format!("{what}: count must be positive"))),
                1 if lo == hi => Ok(vec![lo]),
                1 => Err(CliError::config(format!("{what}: a single point needs start = stop"))),
                _ => Ok((0..count)
                    .map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
                    .collect()),
            }
        }
        _ => Err(CliError::config(format!("{what}: expected start:stop:count, got {text:?}"))),
    }
}

pub fn parse_pair(text: &str, what: &str) -> Result<[f64; 2], CliError> {
    match text.split(',').collect::<Vec<_>>().as_slice() {
        [first, second] => Ok([parse_number(first, what)?, parse_number(second, what)?]),
        _ => Err(CliError::config(format!("{what}: expected two comma-separated numbers, got {text:?}"))),
    }
}

pub fn grid(flag: Option<&str>, file: Option<&GridValue>, what: &str) -> Result<Option<Vec<f64>>, CliError> {
    match (flag, file) {
        (Some(text), _) => parse_grid(text, what).map(Some),
        (None, Some(GridValue::Text(text))) => parse_grid(text.as_str(), what).map(Some),
        (None, Some(GridValue::Number(v))) => Ok(Some(vec![*v])),
        (None, None) => Ok(None),
    }
}

pub fn pair(flag: Option<&str>, file: Option<&PairValue>, what: &str) -> Result<Option<[f64; 2]>, CliError> {
    match (flag, file) {
        (Some(text), _) => parse_pair(text, what).map(Some),
        (None, Some(PairValue::Text(text))) => parse_pair(text, what).map(Some),
        (None, Some(PairValue::Pair(p))) => Ok(Some(*p)),
        (None, None) => Ok(None),
    }
}

pub fn required<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::config(format!("missing value for {what}")))
}

pub fn positive(value: f64, what: &str) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::config(format!("{what} must be positive, got {value}")))
    }
}
