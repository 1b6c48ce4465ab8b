//! Infinite-volume dynamics of `(m, ζ)`, its Liénard form, and periodic
//! orbit detection through a Poincaré return map.

mod lienard;
mod poincare;

pub use lienard::{
    from_lienard, integrate_lienard, lienard_damping, lienard_field, lienard_integral, lienard_integral_inverse,
    lyapunov_function, to_lienard, LienardState,
};
pub use poincare::{
    default_radius_grid, find_cycles, return_map, CycleResult, CycleSearch, ReturnOptions, ReturnPoint, Stability,
};

use crate::gamma::GammaModel;
use crate::ode::{integrate_grid, uniform_grid, OdeError, OdeOptions};
use crate::quad::QuadError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack allowed on `|m| ≤ 1` along integrated paths.
const INVARIANT_SLACK: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MacroError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("Newton inversion did not converge for xi = {0}")]
    NewtonNoConvergence(f64),
    #[error("no return to the section from radius {radius} within t = {t_cap}")]
    NoReturn { radius: f64, t_cap: f64 },
    #[error("radius must lie in (0, 1], got {0}")]
    InvalidRadius(f64),
    #[error("trajectory left the invariant strip |m| <= 1 (m = {0})")]
    LeftInvariantRegion(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroState {
    pub m: f64,
    pub zeta: f64,
}

impl MacroState {
    pub fn new(m: f64, zeta: f64) -> Self {
        Self { m, zeta }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroTrajectory {
    pub times: Vec<f64>,
    pub m: Vec<f64>,
    pub zeta: Vec<f64>,
}

impl MacroTrajectory {
    pub fn last(&self) -> MacroState {
        MacroState::new(*self.m.last().unwrap(), *self.zeta.last().unwrap())
    }
}

/// `(ṁ, ζ̇)` of the limiting dynamics.
pub fn vector_field(state: MacroState, beta: f64, kappa: f64, gamma: &GammaModel) -> (f64, f64) {
    let gp = gamma.eval(state.zeta);
    let gm = gamma.eval(-state.zeta);
    let dm = gp - gm - state.m * (gp + gm);
    (dm, beta * dm - kappa * state.zeta)
}

pub(crate) fn field_array(beta: f64, kappa: f64, gamma: &GammaModel) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_, y| {
        let (dm, dz) = vector_field(MacroState::new(y[0], y[1]), beta, kappa, gamma);
        [dm, dz]
    }
}

/// Integrates from `init` over `[0, t_max]`, sampled every `dt_out`.
pub fn integrate(
    init: MacroState,
    beta: f64,
    kappa: f64,
    gamma: &GammaModel,
    t_max: f64,
    dt_out: f64,
    tol: f64,
) -> Result<MacroTrajectory, MacroError> {
    let grid = uniform_grid(0.0, t_max, dt_out);
    integrate_on(init, beta, kappa, gamma, &grid, tol)
}

/// Integrates from `init` at `grid[0]` and samples at every grid time.
pub fn integrate_on(
    init: MacroState,
    beta: f64,
    kappa: f64,
    gamma: &GammaModel,
    grid: &[f64],
    tol: f64,
) -> Result<MacroTrajectory, MacroError> {
    let ys = integrate_grid(field_array(beta, kappa, gamma), [init.m, init.zeta], grid, &OdeOptions::with_tol(tol))?;
    let inside = init.m.abs() <= 1.0;
    if inside {
        if let Some(bad) = ys.iter().find(|y| y[0].abs() > 1.0 + INVARIANT_SLACK) {
            return Err(MacroError::LeftInvariantRegion(bad[0]));
        }
    }
    Ok(MacroTrajectory {
        times: grid.to_vec(),
        m: ys.iter().map(|y| y[0]).collect(),
        zeta: ys.iter().map(|y| y[1]).collect(),
    })
}
