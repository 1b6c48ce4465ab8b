//! CSV and JSON output formats shared by the command-line tools.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! inputs always produce byte-identical files.

use crate::macroflow::{CycleResult, Stability};
use crate::microsim::{EnsembleRecord, SimConfig};
use crate::moddev::Regime;
use crate::phases::PhaseCell;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

/// Writes `t,m,zeta` rows.
pub fn write_trajectory_csv(mut out: impl Write, times: &[f64], m: &[f64], zeta: &[f64]) -> io::Result<()> {
    writeln!(out, "t,m,zeta")?;
    for ((t, m), z) in times.iter().zip(m).zip(zeta) {
        writeln!(out, "{t},{m},{z}")?;
    }
    Ok(())
}

/// Writes `replica,sup_obs,hit,first_hit_time`; the time is empty for
/// replicas that never hit.
pub fn write_ensemble_csv(mut out: impl Write, records: &[EnsembleRecord]) -> io::Result<()> {
    writeln!(out, "replica,sup_obs,hit,first_hit_time")?;
    for r in records {
        let time = r.first_hit_time.map(|t| t.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", r.replica, r.sup_obs, r.hit, time)?;
    }
    Ok(())
}

/// Writes `kappa,beta,label,beta_c,sigma_L`.
pub fn write_phase_csv(mut out: impl Write, cells: &[PhaseCell]) -> io::Result<()> {
    writeln!(out, "kappa,beta,label,beta_c,sigma_L")?;
    for c in cells {
        writeln!(out, "{},{},{},{},{}", c.kappa, c.beta, c.label, c.beta_c, c.sigma_l)?;
    }
    Ok(())
}

/// Writes `x,p_or_v,value` rows of a Hamiltonian or Lagrangian table.
pub fn write_tabulation_csv(mut out: impl Write, rows: &[(f64, f64, f64)]) -> io::Result<()> {
    writeln!(out, "x,p_or_v,value")?;
    for (x, p, v) in rows {
        writeln!(out, "{x},{p},{v}")?;
    }
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(mut out: impl Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::other)?;
    writeln!(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub config: SimConfig,
    pub jumps: u64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub beta: f64,
    pub kappa: f64,
    pub radius: f64,
    pub period: f64,
    pub slope: f64,
    pub stability: Stability,
}

impl CycleReport {
    pub fn new(beta: f64, kappa: f64, cycle: &CycleResult) -> Self {
        Self {
            beta,
            kappa,
            radius: cycle.radius_on_section,
            period: cycle.period,
            slope: cycle.floquet_slope,
            stability: cycle.stability,
        }
    }
}

/// Action of a path; `action_value` is `None` when the action is infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionReport {
    pub regime: Regime,
    pub path_file: String,
    pub action_value: Option<f64>,
    pub finite: bool,
}

impl ActionReport {
    pub fn new(regime: Regime, path_file: impl Into<String>, value: f64) -> Self {
        Self {
            regime,
            path_file: path_file.into(),
            action_value: value.is_finite().then_some(value),
            finite: value.is_finite(),
        }
    }
}
