//! Liénard coordinates `(ζ − βm, ∫₀^ζ du / (Γ(u) + Γ(−u)))`.

use super::{MacroError, MacroState};
use crate::gamma::{GammaKind, GammaModel};
use crate::ode::{integrate_grid, OdeOptions};
use crate::quad;
use serde::{Deserialize, Serialize};
use std::cell::Cell;

const QUAD_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-14;
/// Largest `|ζ|` the inverse searches before giving up.
const INVERSE_SEARCH_LIMIT: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LienardState {
    /// `ζ − β·m`.
    pub shift: f64,
    /// Reparametrized potential `∫₀^ζ du / (Γ(u) + Γ(−u))`.
    pub xi: f64,
}

/// `∫₀^ζ du / (Γ(u) + Γ(−u))`.
pub fn lienard_integral(zeta: f64, gamma: &GammaModel) -> Result<f64, MacroError> {
    match gamma.kind() {
        // Γ(u) + Γ(−u) = 2.
        GammaKind::TanhPlusOne => Ok(zeta / 2.0),
        // ∫ du / (2 cosh u) = atan(sinh u) / 2.
        GammaKind::Exp => Ok(zeta.sinh().atan() / 2.0),
        GammaKind::Custom => Ok(quad::integrate(|u| 1.0 / gamma.even_part(u), 0.0, zeta, QUAD_TOL)?),
    }
}

/// Inverse of [`lienard_integral`] by Newton's method safeguarded with
/// bisection.
pub fn lienard_integral_inverse(xi: f64, gamma: &GammaModel) -> Result<f64, MacroError> {
    match gamma.kind() {
        GammaKind::TanhPlusOne => return Ok(2.0 * xi),
        GammaKind::Exp => {
            let limit = std::f64::consts::FRAC_PI_4;
            if xi.abs() >= limit {
                return Err(MacroError::NewtonNoConvergence(xi));
            }
            return Ok((2.0 * xi).tan().asinh());
        }
        GammaKind::Custom => {}
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    let sign = xi.signum();
    let target = xi.abs();
    // The integrand is even, so the search runs on the positive half-line.
    let value_at = |from: f64, value_from: f64, to: f64| -> Result<f64, MacroError> {
        Ok(value_from + quad::integrate(|u| 1.0 / gamma.even_part(u), from, to, QUAD_TOL)?)
    };

    let (mut lo, mut value_lo) = (0.0, 0.0);
    let mut hi = target * gamma.even_part(0.0);
    let mut value_hi = value_at(0.0, 0.0, hi)?;
    while value_hi < target {
        if hi > INVERSE_SEARCH_LIMIT {
            return Err(MacroError::NewtonNoConvergence(xi));
        }
        lo = hi;
        value_lo = value_hi;
        hi *= 2.0;
        value_hi = value_at(lo, value_lo, hi)?;
    }

    let mut z = hi;
    let mut value = value_hi;
    for _ in 0..NEWTON_MAX_ITER {
        let residual = value - target;
        if residual.abs() <= NEWTON_TOL {
            return Ok(sign * z);
        }
        if residual > 0.0 {
            hi = z;
            value_hi = value;
        } else {
            lo = z;
            value_lo = value;
        }
        let newton = z - residual * gamma.even_part(z);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - z).abs() <= 1e-15 * z.abs().max(1.0) {
            return Ok(sign * next);
        }
        // Integrate from the nearer known endpoint.
        value = if (next - lo).abs() < (hi - next).abs() {
            value_at(lo, value_lo, next)?
        } else {
            value_at(hi, value_hi, next)?
        };
        z = next;
    }
    Err(MacroError::NewtonNoConvergence(xi))
}

/// Damping function `((Γ(u)+Γ(−u)+κ)·u − β·(Γ(u)−Γ(−u))) / (Γ(u)+Γ(−u))`.
pub fn lienard_damping(u: f64, beta: f64, kappa: f64, gamma: &GammaModel) -> f64 {
    let even = gamma.even_part(u);
    ((even + kappa) * u - beta * gamma.odd_part(u)) / even
}

pub fn to_lienard(state: MacroState, beta: f64, gamma: &GammaModel) -> Result<LienardState, MacroError> {
    Ok(LienardState {
        shift: state.zeta - beta * state.m,
        xi: lienard_integral(state.zeta, gamma)?,
    })
}

pub fn from_lienard(state: LienardState, beta: f64, gamma: &GammaModel) -> Result<MacroState, MacroError> {
    let zeta = lienard_integral_inverse(state.xi, gamma)?;
    Ok(MacroState::new((zeta - state.shift) / beta, zeta))
}

/// Liénard vector field `(−κ·ζ, shift − damping(ζ))` with `ζ = I⁻¹(ξ)`.
pub fn lienard_field(state: LienardState, beta: f64, kappa: f64, gamma: &GammaModel) -> Result<(f64, f64), MacroError> {
    let zeta = lienard_integral_inverse(state.xi, gamma)?;
    Ok((-kappa * zeta, state.shift - lienard_damping(zeta, beta, kappa, gamma)))
}

/// Integrates the Liénard system and samples it at every time in `grid`.
pub fn integrate_lienard(
    init: LienardState,
    beta: f64,
    kappa: f64,
    gamma: &GammaModel,
    grid: &[f64],
    tol: f64,
) -> Result<Vec<LienardState>, MacroError> {
    let failure = Cell::new(None);
    let field = |_: f64, y: &[f64; 2]| match lienard_field(LienardState { shift: y[0], xi: y[1] }, beta, kappa, gamma) {
        Ok((a, b)) => [a, b],
        Err(e) => {
            failure.set(Some(e));
            [f64::NAN, f64::NAN]
        }
    };
    let result = integrate_grid(field, [init.shift, init.xi], grid, &OdeOptions::with_tol(tol));
    if let Some(e) = failure.take() {
        if result.is_err() {
            return Err(e);
        }
    }
    Ok(result?
        .into_iter()
        .map(|y| LienardState { shift: y[0], xi: y[1] })
        .collect())
}

/// Lyapunov function `shift²/2 + κ·∫₀^ξ I⁻¹(u) du`, evaluated through the
/// substitution `u = I(z)` as `κ·∫₀^ζ z / (Γ(z)+Γ(−z)) dz`.
///
/// Its time derivative along the flow is `−κ·ζ·damping(ζ)`.
pub fn lyapunov_function(state: LienardState, kappa: f64, gamma: &GammaModel) -> Result<f64, MacroError> {
    let zeta = lienard_integral_inverse(state.xi, gamma)?;
    let potential = quad::integrate(|z| z / gamma.even_part(z), 0.0, zeta, QUAD_TOL)?;
    Ok(0.5 * state.shift * state.shift + kappa * potential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macroflow::integrate_on;
    use crate::ode::uniform_grid;

    fn exp_copy() -> GammaModel {
        GammaModel::custom("exp-copy", |_, u| u.exp())
    }

    #[test]
    fn integral_at_zero() {
        for g in [GammaModel::exp(), GammaModel::tanh_plus_one(), exp_copy()] {
            assert_eq!(lienard_integral(0.0, &g).unwrap(), 0.0);
            assert_eq!(lienard_integral_inverse(0.0, &g).unwrap(), 0.0);
        }
    }

    #[test]
    fn tanh_integral_is_linear() {
        let g = GammaModel::tanh_plus_one();
        for z in [-3.0, -0.2, 0.7, 4.0] {
            assert_eq!(lienard_integral(z, &g).unwrap(), z / 2.0);
        }
    }

    #[test]
    fn round_trip_exp() {
        for g in [GammaModel::exp(), exp_copy()] {
            for z in [-2.0, -0.5, 0.3, 1.7] {
                let xi = lienard_integral(z, &g).unwrap();
                let back = lienard_integral_inverse(xi, &g).unwrap();
                assert!((back - z).abs() < 1e-9, "{} {z} {back}", g.name());
            }
        }
    }

    #[test]
    fn generic_quadrature_matches_closed_form() {
        for z in [-2.5, -0.1, 0.9, 3.0] {
            let a = lienard_integral(z, &GammaModel::exp()).unwrap();
            let b = lienard_integral(z, &exp_copy()).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_outside_range_fails() {
        assert!(lienard_integral_inverse(0.8, &GammaModel::exp()).is_err());
        assert!(lienard_integral_inverse(0.8, &exp_copy()).is_err());
    }

    #[test]
    fn damping_examples() {
        let tanh = GammaModel::tanh_plus_one();
        assert_eq!(lienard_damping(0.0, 2.0, 1.0, &tanh), 0.0);
        for u in [-1.5, 0.3, 2.0] {
            let expect = ((2.0 + 1.0) * u - 2.0 * 2.0 * f64::tanh(u)) / 2.0;
            assert!((lienard_damping(u, 2.0, 1.0, &tanh) - expect).abs() < 1e-14);
        }
        // β above (κ + 2Γ(0)) / (2Γ'(0)) = 2 makes the damping negative near 0.
        let exp = GammaModel::exp();
        assert!(lienard_damping(0.01, 2.1, 2.0, &exp) < 0.0);
    }

    #[test]
    fn state_round_trip() {
        let g = exp_copy();
        for (m, z) in [(0.3, -0.4), (-0.9, 1.2), (0.0, 0.0)] {
            let l = to_lienard(MacroState::new(m, z), 3.0, &g).unwrap();
            let back = from_lienard(l, 3.0, &g).unwrap();
            assert!((back.m - m).abs() < 1e-9 && (back.zeta - z).abs() < 1e-9);
        }
    }

    #[test]
    fn lienard_flow_matches_original_flow() {
        let grid = uniform_grid(0.0, 10.0, 0.05);
        for (g, beta, kappa) in [(GammaModel::exp(), 4.5, 6.0), (GammaModel::tanh_plus_one(), 2.0, 1.0), (exp_copy(), 1.5, 2.0)] {
            let init = MacroState::new(0.4, -0.3);
            let direct = integrate_on(init, beta, kappa, &g, &grid, 1e-11).unwrap();
            let lien = integrate_lienard(to_lienard(init, beta, &g).unwrap(), beta, kappa, &g, &grid, 1e-11).unwrap();
            for i in 0..grid.len() {
                let expect = to_lienard(MacroState::new(direct.m[i], direct.zeta[i]), beta, &g).unwrap();
                assert!((expect.shift - lien[i].shift).abs() < 1e-6, "{}", g.name());
                assert!((expect.xi - lien[i].xi).abs() < 1e-6, "{}", g.name());
            }
        }
    }

    #[test]
    fn origin_fixed_in_lienard_form() {
        let g = GammaModel::exp();
        let out = integrate_lienard(LienardState { shift: 0.0, xi: 0.0 }, 3.0, 2.0, &g, &[0.0, 5.0], 1e-10).unwrap();
        assert_eq!(out[1], LienardState { shift: 0.0, xi: 0.0 });
    }

    #[test]
    fn lyapunov_decreases_subcritical() {
        let g = GammaModel::tanh_plus_one();
        let (beta, kappa) = (1.2, 1.0);
        let grid = uniform_grid(0.0, 20.0, 0.02);
        let init = to_lienard(MacroState::new(0.8, 0.5), beta, &g).unwrap();
        let path = integrate_lienard(init, beta, kappa, &g, &grid, 1e-11).unwrap();
        let w: Vec<f64> = path.iter().map(|s| lyapunov_function(*s, kappa, &g).unwrap()).collect();
        for pair in w.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9);
        }
        assert!(w.last().unwrap() < &(0.01 * w[0]));
    }
}
