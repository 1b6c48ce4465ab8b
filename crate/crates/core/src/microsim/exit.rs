use super::{check_gamma, check_init, run_path, EnsembleOptions, MicroState, SimConfig, SimError};
use crate::gamma::GammaModel;
use crate::ode::Flow;
use serde::{Deserialize, Serialize};

/// Scalar functional of the state monitored for threshold exits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    AbsM,
    AbsZeta,
    /// Euclidean norm of `(m, ζ)`.
    Radius,
}

impl Observable {
    pub fn eval(self, m: f64, zeta: f64) -> f64 {
        match self {
            Self::AbsM => m.abs(),
            Self::AbsZeta => zeta.abs(),
            Self::Radius => m.hypot(zeta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitQuery {
    pub delta: f64,
    pub observable: Observable,
    /// Moderate-deviation scaling `b_n`.
    pub scaling: f64,
    pub horizon: f64,
}

/// Per-replica outcome. A replica stops at its first hit, so `sup_obs` is
/// the running supremum of `b_n·observable` up to that moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRecord {
    pub replica: usize,
    pub sup_obs: f64,
    pub hit: bool,
    pub first_hit_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    /// `−(b_n²/n)·log p̂`; absent when no replica hit.
    pub rate_hat: Option<f64>,
    pub hits: usize,
    pub replicas: usize,
    pub records: Vec<EnsembleRecord>,
}

impl ExitEstimate {
    pub fn rate(&self) -> Result<f64, SimError> {
        self.rate_hat.ok_or(SimError::ZeroHits)
    }
}

/// Monte Carlo estimate of `P(sup_{t ≤ T} b_n·obs(t) ≥ δ)`.
///
/// Between flips `m` is frozen and `|ζ|` decays, so every observable attains
/// its running supremum either at the start or right after a flip; the
/// supremum is therefore exact without recording the path.
pub fn estimate_exit_probability(
    template: &SimConfig,
    gamma: &GammaModel,
    init: &MicroState,
    options: &EnsembleOptions,
    query: &ExitQuery,
) -> Result<ExitEstimate, SimError> {
    if !(query.delta >= 0.0) {
        return Err(SimError::InvalidConfig("delta must be nonnegative".into()));
    }
    if !(query.scaling > 0.0) {
        return Err(SimError::InvalidConfig("scaling must be positive".into()));
    }
    if !(query.horizon > init.t) {
        return Err(SimError::InvalidConfig("horizon must exceed the initial time".into()));
    }
    let base = SimConfig {
        t_max: query.horizon,
        record_dt: f64::INFINITY,
        ..*template
    };
    if base.n == 0 || !(base.beta > 0.0) || !(base.kappa > 0.0) {
        return Err(SimError::InvalidConfig("n, beta and kappa must be positive".into()));
    }
    check_gamma(gamma, base.kappa)?;
    let ups = check_init(&base, init)?;

    let records = options.map(|r| {
        let cfg = options.replica_config(&base, r);
        let mut sup = query.scaling * query.observable.eval(init.m, init.zeta);
        if sup >= query.delta {
            return EnsembleRecord { replica: r, sup_obs: sup, hit: true, first_hit_time: Some(init.t) };
        }
        let mut hit_time = None;
        run_path(&cfg, gamma, init, ups, |_, _, _| {}, |s| {
            sup = sup.max(query.scaling * query.observable.eval(s.m, s.zeta));
            if sup >= query.delta {
                hit_time = Some(s.t);
                Flow::Stop
            } else {
                Flow::Continue
            }
        });
        EnsembleRecord { replica: r, sup_obs: sup, hit: hit_time.is_some(), first_hit_time: hit_time }
    });

    let replicas = records.len();
    let hits = records.iter().filter(|r| r.hit).count();
    let p_hat = if replicas == 0 { 0.0 } else { hits as f64 / replicas as f64 };
    let stderr = if replicas == 0 { 0.0 } else { (p_hat * (1.0 - p_hat) / replicas as f64).sqrt() };
    let rate_hat = (hits > 0).then(|| -(query.scaling * query.scaling / base.n as f64) * p_hat.ln());
    Ok(ExitEstimate { p_hat, stderr, rate_hat, hits, replicas, records })
}
