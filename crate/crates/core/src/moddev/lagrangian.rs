//! Lagrangians, their numeric Legendre duals, action functionals and the
//! characteristics of the limiting Hamiltonian.

use super::{averaged_hamiltonian, subcritical_hamiltonian, LinearConstraint, ModDevError, Regime, RegimeSpec};
use crate::ode::{integrate_grid, uniform_grid, OdeOptions};
use crate::quad::trapezoid_uniform;
use serde::{Deserialize, Serialize};

/// Below this speed a path sitting at `x = 0` counts as resting.
const ZERO_VELOCITY_TOL: f64 = 1e-9;
/// Relative tolerance on `v_y = β·v_x − κ·y`.
const CONSTRAINT_TOL: f64 = 1e-9;
/// Largest half-width tried when bracketing the maximizing momentum.
const MAX_BRACKET: f64 = 1e15;
const GOLDEN_ITERATIONS: usize = 300;
/// Tolerance of the characteristic integration.
const FLOW_TOL: f64 = 1e-12;

fn planar(spec: &RegimeSpec, state: &[f64], velocity: &[f64]) -> Result<LinearConstraint, ModDevError> {
    match (spec.constraint, state.len(), velocity.len()) {
        (Some(c), 2, 2) => Ok(c),
        _ => Err(ModDevError::RegimeMismatch("subcritical regime takes (x, y) states".into())),
    }
}

fn radial(spec: &RegimeSpec, state: &[f64], velocity: &[f64]) -> Result<(f64, f64), ModDevError> {
    spec.radial()?;
    match (state, velocity) {
        ([x], [v]) => Ok((*x, *v)),
        _ => Err(ModDevError::RegimeMismatch("critical regimes take a scalar state".into())),
    }
}

fn constraint_holds(c: &LinearConstraint, y: f64, vx: f64, vy: f64) -> bool {
    let scale = 1.0f64.max(vy.abs()).max((c.beta * vx).abs()).max((c.kappa * y).abs());
    c.violation(y, vx, vy).abs() <= CONSTRAINT_TOL * scale
}

/// Cost of moving with `velocity` at `state`; `+∞` outside the finite-cost
/// set.
pub fn lagrangian(spec: &RegimeSpec, state: &[f64], velocity: &[f64]) -> Result<f64, ModDevError> {
    if spec.regime == Regime::Subcritical {
        let c = planar(spec, state, velocity)?;
        let (x, y, vx, vy) = (state[0], state[1], velocity[0], velocity[1]);
        if !constraint_holds(&c, y, vx, vy) {
            return Ok(f64::INFINITY);
        }
        return Ok((vx - c.drift(x, y)).powi(2) / (8.0 * c.gamma0));
    }
    let (x, v) = radial(spec, state, velocity)?;
    if x > 0.0 {
        Ok((v + spec.drift * x.powi(spec.power)).powi(2) / (4.0 * spec.diffusion * x))
    } else if x == 0.0 && v.abs() <= ZERO_VELOCITY_TOL {
        Ok(0.0)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Maximizes a concave function of one variable by golden-section search on
/// a bracket that doubles until it contains the maximizer.
fn maximize_concave(objective: impl Fn(f64) -> f64) -> Result<f64, ModDevError> {
    let center = objective(0.0);
    let mut half = 1.0;
    while !(objective(half) < center && objective(-half) < center) {
        half *= 2.0;
        if half > MAX_BRACKET {
            return Err(ModDevError::UnboundedSup);
        }
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (-half, half);
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (objective(a), objective(b));
    for _ in 0..GOLDEN_ITERATIONS {
        if hi - lo <= f64::EPSILON * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = objective(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = objective(a);
        }
    }
    Ok(fa.max(fb).max(center))
}

/// `sup_p [p·v − H(x, p)]` computed numerically. An infinite supremum is
/// reported as [`ModDevError::UnboundedSup`].
pub fn legendre_dual(spec: &RegimeSpec, state: &[f64], velocity: &[f64]) -> Result<f64, ModDevError> {
    if spec.regime == Regime::Subcritical {
        let c = planar(spec, state, velocity)?;
        let (x, y, vx, vy) = (state[0], state[1], velocity[0], velocity[1]);
        if !constraint_holds(&c, y, vx, vy) {
            return Err(ModDevError::UnboundedSup);
        }
        // Along (−β, 1) in momentum space the objective changes only through
        // the constraint violation, so p_y = 0 loses nothing.
        return maximize_concave(|px| px * vx - subcritical_hamiltonian(&c, [x, y], [px, 0.0]));
    }
    let (x, v) = radial(spec, state, velocity)?;
    if x < 0.0 {
        return Err(ModDevError::RegimeMismatch("critical regimes live on x >= 0".into()));
    }
    if x == 0.0 {
        return if v == 0.0 { Ok(0.0) } else { Err(ModDevError::UnboundedSup) };
    }
    maximize_concave(|p| p * v - averaged_hamiltonian(x, p, spec))
}

/// Path sampled on a uniform time grid; each state is a scalar or an
/// `(x, y)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
}

impl SampledPath {
    pub fn radial(dt: f64, xs: &[f64]) -> Self {
        Self {
            dt,
            states: xs.iter().map(|&x| vec![x]).collect(),
        }
    }

    pub fn planar(dt: f64, xs: &[f64], ys: &[f64]) -> Self {
        Self {
            dt,
            states: xs.iter().zip(ys).map(|(&x, &y)| vec![x, y]).collect(),
        }
    }

    /// Samples `f` at `count` evenly spaced times on `[0, t_max]`.
    pub fn from_fn(t_max: f64, count: usize, f: impl Fn(f64) -> Vec<f64>) -> Self {
        let dt = t_max / (count - 1) as f64;
        Self {
            dt,
            states: (0..count).map(|i| f(i as f64 * dt)).collect(),
        }
    }

    /// Velocities by central differences, second-order one-sided at the ends.
    pub fn velocities(&self) -> Vec<Vec<f64>> {
        let s = &self.states;
        let n = s.len();
        let h = self.dt;
        (0..n)
            .map(|i| {
                (0..s[i].len())
                    .map(|d| {
                        if i == 0 {
                            (-3.0 * s[0][d] + 4.0 * s[1][d] - s[2][d]) / (2.0 * h)
                        } else if i == n - 1 {
                            (3.0 * s[n - 1][d] - 4.0 * s[n - 2][d] + s[n - 3][d]) / (2.0 * h)
                        } else {
                            (s[i + 1][d] - s[i - 1][d]) / (2.0 * h)
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// `I₀(γ(0)) + ∫ ℒ(γ, γ̇) dt` by the trapezoid rule; `+∞` as soon as one node
/// has infinite cost.
pub fn action(spec: &RegimeSpec, path: &SampledPath, initial_cost: impl Fn(&[f64]) -> f64) -> Result<f64, ModDevError> {
    if path.states.len() < 3 {
        return Err(ModDevError::TooFewPoints(path.states.len()));
    }
    let velocities = path.velocities();
    let mut costs = Vec::with_capacity(path.states.len());
    for (state, velocity) in path.states.iter().zip(&velocities) {
        let cost = lagrangian(spec, state, velocity)?;
        if cost.is_infinite() {
            return Ok(f64::INFINITY);
        }
        costs.push(cost);
    }
    Ok(initial_cost(&path.states[0]) + trapezoid_uniform(&costs, path.dt))
}

/// Characteristic of the limiting Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianPath {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl HamiltonianPath {
    pub fn energies(&self, spec: &RegimeSpec) -> Vec<f64> {
        self.x.iter().zip(&self.p).map(|(&x, &p)| averaged_hamiltonian(x, p, spec)).collect()
    }
}

/// Integrates `ẋ = ∂_p H`, `ṗ = −∂_x H` from `(x0, p0)` and samples every
/// `dt_out`.
pub fn hamiltonian_flow(
    spec: &RegimeSpec,
    x0: f64,
    p0: f64,
    t_max: f64,
    dt_out: f64,
) -> Result<HamiltonianPath, ModDevError> {
    spec.radial()?;
    if x0 < 0.0 {
        return Err(ModDevError::RegimeMismatch("critical regimes live on x >= 0".into()));
    }
    let (drift, diffusion, power) = (spec.drift, spec.diffusion, spec.power);
    let field = |_: f64, y: &[f64; 2]| {
        let [x, p] = *y;
        [
            -drift * x.powi(power) + 2.0 * diffusion * x * p,
            power as f64 * drift * x.powi(power - 1) * p - diffusion * p * p,
        ]
    };
    let grid = uniform_grid(0.0, t_max, dt_out);
    let ys = integrate_grid(field, [x0, p0], &grid, &OdeOptions::with_tol(FLOW_TOL))?;
    Ok(HamiltonianPath {
        times: grid,
        x: ys.iter().map(|y| y[0]).collect(),
        p: ys.iter().map(|y| y[1]).collect(),
    })
}

/// `∫ (p·ẋ − H) dt` along a characteristic, with `ẋ = ∂_p H` evaluated
/// exactly. This is the action of the projected path.
pub fn flow_action(spec: &RegimeSpec, path: &HamiltonianPath) -> f64 {
    let integrand: Vec<f64> = path
        .x
        .iter()
        .zip(&path.p)
        .map(|(&x, &p)| {
            let velocity = -spec.drift * x.powi(spec.power) + 2.0 * spec.diffusion * x * p;
            p * velocity - averaged_hamiltonian(x, p, spec)
        })
        .collect();
    let dt = if path.times.len() > 1 { path.times[1] - path.times[0] } else { 0.0 };
    trapezoid_uniform(&integrand, dt)
}

/// Largest value of `H(x, Υ'(x))` on the grid for `Υ(x) = log(1 + x)`.
pub fn containment_check(spec: &RegimeSpec, x_grid: &[f64]) -> Result<f64, ModDevError> {
    spec.radial()?;
    Ok(x_grid
        .iter()
        .map(|&x| averaged_hamiltonian(x, 1.0 / (1.0 + x), spec))
        .fold(f64::NEG_INFINITY, f64::max))
}
