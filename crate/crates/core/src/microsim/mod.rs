//! Exact simulation of the finite-n magnetization / potential jump process.
//!
//! Each spin flip moves `m` by `±2/n` and the potential `ζ` by `±2β/n`;
//! between flips `ζ` relaxes exponentially. Flip times are drawn by thinning
//! against a bound that holds on the whole inter-jump interval because `Γ` is
//! increasing and `|ζ|` only shrinks while no flip happens.

mod ensemble;
mod exit;

pub use ensemble::{run_ensemble, EnsembleOptions, StreamMode};
pub use exit::{estimate_exit_probability, EnsembleRecord, ExitEstimate, ExitQuery, Observable};

use crate::gamma::GammaModel;
use crate::ode::Flow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid on which simulation entry points check positivity and monotonicity.
const ADMISSIBILITY_GRID_POINTS: usize = 1001;

/// Relative slack allowed when asserting `λ(t) ≤ λ̄`.
const THINNING_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("rate function is not positive and increasing on [-5, 5]")]
    InadmissibleGamma,
    #[error("invalid initial state: {0}")]
    InvalidInit(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no replica reached the threshold; rate estimate undefined")]
    ZeroHits,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroState {
    pub m: f64,
    pub zeta: f64,
    pub t: f64,
}

impl MicroState {
    pub fn new(m: f64, zeta: f64) -> Self {
        Self { m, zeta, t: 0.0 }
    }

    /// Number of up spins for system size `n`, if `m` sits on the lattice.
    pub fn up_count(&self, n: u64) -> Option<u64> {
        if !(-1.0..=1.0).contains(&self.m) {
            return None;
        }
        let ups = n as f64 * (self.m + 1.0) / 2.0;
        let rounded = ups.round();
        ((ups - rounded).abs() <= 1e-9).then_some(rounded as u64)
    }
}

/// Magnetization of a system of `n` spins with `ups` of them up.
pub fn lattice_m(n: u64, ups: u64) -> f64 {
    -1.0 + 2.0 * ups as f64 / n as f64
}

/// Nearest lattice point to `m` for system size `n`.
pub fn snap_to_lattice(n: u64, m: f64) -> f64 {
    let ups = (n as f64 * (m.clamp(-1.0, 1.0) + 1.0) / 2.0).round() as u64;
    lattice_m(n, ups)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: u64,
    pub beta: f64,
    pub kappa: f64,
    pub t_max: f64,
    pub record_dt: f64,
    pub seed: u64,
    pub replica_index: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidConfig(msg.to_string()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad("beta must be positive");
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return bad("kappa must be positive");
        }
        if !(self.record_dt.is_finite() && self.record_dt > 0.0) {
            return bad("record_dt must be positive");
        }
        if !(self.t_max.is_finite() && self.t_max >= self.record_dt) {
            return bad("t_max must be at least record_dt");
        }
        Ok(())
    }

    /// Generator for this replica: the seed picks the key, the replica index
    /// picks the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.replica_index);
        rng
    }
}

/// A recorded path sampled every `record_dt` (sample-and-hold).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub m: Vec<f64>,
    pub zeta: Vec<f64>,
    pub jumps: u64,
    pub meta: SimConfig,
}

/// Counters gathered during one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpStats {
    pub jumps: u64,
    pub proposals: u64,
    /// Largest change of `β·m − ζ` across a single jump.
    pub max_invariant_step: f64,
    pub final_state: Option<MicroState>,
}

/// Inter-jump evolution of the potential: `ζ₀·e^{−κ·dt}`.
pub fn flow_zeta(zeta0: f64, kappa: f64, dt: f64) -> f64 {
    if dt == 0.0 || zeta0 == 0.0 {
        return zeta0;
    }
    zeta0 * (-kappa * dt).exp()
}

/// `(rate_down, rate_up)` for a flip lowering / raising the magnetization.
pub fn jump_rates(state: &MicroState, config: &SimConfig, gamma: &GammaModel) -> (f64, f64) {
    let n = config.n as f64;
    let down_weight = n * (1.0 + state.m) / 2.0;
    let up_weight = n * (1.0 - state.m) / 2.0;
    let down = if down_weight > 0.0 { down_weight * gamma.eval(-state.zeta) } else { 0.0 };
    let up = if up_weight > 0.0 { up_weight * gamma.eval(state.zeta) } else { 0.0 };
    (down, up)
}

pub(crate) fn check_gamma(gamma: &GammaModel, kappa: f64) -> Result<(), SimError> {
    let half = crate::gamma::POSITIVITY_CHECK_HALF_WIDTH;
    let step = 2.0 * half / (ADMISSIBILITY_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..ADMISSIBILITY_GRID_POINTS).map(|i| -half + i as f64 * step).collect();
    let report = gamma.validate(&grid, kappa).map_err(|_| SimError::InadmissibleGamma)?;
    if report.positive && report.increasing {
        Ok(())
    } else {
        Err(SimError::InadmissibleGamma)
    }
}

pub(crate) fn check_init(config: &SimConfig, init: &MicroState) -> Result<u64, SimError> {
    if !init.zeta.is_finite() || !init.t.is_finite() {
        return Err(SimError::InvalidInit("non-finite state".into()));
    }
    if init.t >= config.t_max {
        return Err(SimError::InvalidInit("initial time must precede t_max".into()));
    }
    init.up_count(config.n).ok_or_else(|| {
        SimError::InvalidInit(format!("m = {} is not on the lattice for n = {}", init.m, config.n))
    })
}

/// Core thinning loop. `sample(t, m, ζ)` is called at every recording time
/// strictly after the start with the pre-jump state; `on_jump` sees the
/// post-jump state and may stop the run. Recording is skipped when
/// `record_dt` is infinite.
pub(crate) fn run_path<S, J>(
    config: &SimConfig,
    gamma: &GammaModel,
    init: &MicroState,
    up_count: u64,
    mut sample: S,
    mut on_jump: J,
) -> JumpStats
where
    S: FnMut(f64, f64, f64),
    J: FnMut(&MicroState) -> Flow,
{
    let n = config.n;
    let nf = n as f64;
    let (beta, kappa) = (config.beta, config.kappa);
    let dzeta = 2.0 * beta / nf;
    let gamma0 = gamma.eval(0.0);
    let mut rng = config.rng();

    let mut ups = up_count;
    let mut m = lattice_m(n, ups);
    let mut zeta = init.zeta;
    let mut t = init.t;
    let mut g_plus = gamma.eval(zeta);
    let mut g_minus = gamma.eval(-zeta);
    let mut next_sample = init.t + config.record_dt;
    let mut stats = JumpStats::default();

    let mut emit_until = |t_from: f64, zeta_from: f64, m: f64, t_to: f64, next_sample: &mut f64| {
        while *next_sample <= t_to {
            sample(*next_sample, m, flow_zeta(zeta_from, kappa, *next_sample - t_from));
            *next_sample += config.record_dt;
        }
    };

    loop {
        let down_weight = nf * (1.0 + m) / 2.0;
        let up_weight = nf * (1.0 - m) / 2.0;
        let bound = down_weight * g_minus.max(gamma0) + up_weight * g_plus.max(gamma0);
        let wait: f64 = rng.sample::<f64, _>(Exp1) / bound;
        let t_cand = t + wait;
        if t_cand > config.t_max {
            emit_until(t, zeta, m, config.t_max, &mut next_sample);
            zeta = flow_zeta(zeta, kappa, config.t_max - t);
            t = config.t_max;
            break;
        }
        emit_until(t, zeta, m, t_cand, &mut next_sample);
        zeta = flow_zeta(zeta, kappa, wait);
        t = t_cand;
        g_plus = gamma.eval(zeta);
        g_minus = gamma.eval(-zeta);
        stats.proposals += 1;

        let rate_down = if down_weight > 0.0 { down_weight * g_minus } else { 0.0 };
        let rate_up = if up_weight > 0.0 { up_weight * g_plus } else { 0.0 };
        assert!(
            rate_down + rate_up <= bound * (1.0 + THINNING_SLACK),
            "thinning bound violated: {} > {bound}",
            rate_down + rate_up
        );
        let u = rng.random::<f64>() * bound;
        let step = if u < rate_down {
            -1i8
        } else if u < rate_down + rate_up {
            1
        } else {
            continue;
        };

        let before = beta * m - zeta;
        if step < 0 {
            ups -= 1;
            zeta -= dzeta;
        } else {
            ups += 1;
            zeta += dzeta;
        }
        m = lattice_m(n, ups);
        g_plus = gamma.eval(zeta);
        g_minus = gamma.eval(-zeta);
        stats.jumps += 1;
        stats.max_invariant_step = stats.max_invariant_step.max((beta * m - zeta - before).abs());
        if on_jump(&MicroState { m, zeta, t }) == Flow::Stop {
            break;
        }
    }
    stats.final_state = Some(MicroState { m, zeta, t });
    stats
}

/// Simulates one replica and records it on the `record_dt` grid.
pub fn simulate(config: &SimConfig, gamma: &GammaModel, init: &MicroState) -> Result<Trajectory, SimError> {
    config.validate()?;
    check_gamma(gamma, config.kappa)?;
    let ups = check_init(config, init)?;
    Ok(simulate_unchecked(config, gamma, init, ups))
}

pub(crate) fn simulate_unchecked(config: &SimConfig, gamma: &GammaModel, init: &MicroState, ups: u64) -> Trajectory {
    let capacity = ((config.t_max - init.t) / config.record_dt) as usize + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut ms = Vec::with_capacity(capacity);
    let mut zetas = Vec::with_capacity(capacity);
    times.push(init.t);
    ms.push(lattice_m(config.n, ups));
    zetas.push(init.zeta);
    let stats = run_path(
        config,
        gamma,
        init,
        ups,
        |t, m, z| {
            times.push(t);
            ms.push(m);
            zetas.push(z);
        },
        |_| Flow::Continue,
    );
    let end = stats.final_state.expect("run_path always reports a final state");
    if config.t_max - times.last().copied().unwrap_or(init.t) > 1e-9 * config.record_dt {
        times.push(config.t_max);
        ms.push(end.m);
        zetas.push(end.zeta);
    }
    Trajectory {
        times,
        m: ms,
        zeta: zetas,
        jumps: stats.jumps,
        meta: *config,
    }
}

/// Runs one replica without recording, reporting jump statistics.
pub fn simulate_stats(config: &SimConfig, gamma: &GammaModel, init: &MicroState) -> Result<JumpStats, SimError> {
    simulate_observed(config, gamma, init, |_| Flow::Continue)
}

/// Runs one replica without recording, calling `on_jump` with the state after
/// every flip.
pub fn simulate_observed(
    config: &SimConfig,
    gamma: &GammaModel,
    init: &MicroState,
    on_jump: impl FnMut(&MicroState) -> Flow,
) -> Result<JumpStats, SimError> {
    config.validate()?;
    check_gamma(gamma, config.kappa)?;
    let ups = check_init(config, init)?;
    let quiet = SimConfig {
        record_dt: f64::INFINITY,
        ..*config
    };
    Ok(run_path(&quiet, gamma, init, ups, |_, _, _| {}, on_jump))
}
