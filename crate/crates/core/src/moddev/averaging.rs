//! Pre-averaged Hamiltonians in polar coordinates and the perturbation
//! functions that remove their angular dependence.
//!
//! Angular integrals of `cos^i θ · sin^j θ` are evaluated exactly through the
//! Fourier expansion of the product.

use super::{check_tri_critical, KConstants, ModDevError};
use crate::gamma::GammaModel;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Step of the central difference used for `∂_θ` in the residual checks.
const ANGLE_STEP: f64 = 1e-5;

/// Order of the expansion in `b_n`: second on the critical line, fourth at
/// the tri-critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpansionOrder {
    Second,
    Fourth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbationOrder {
    Zeroth,
    First,
    Second,
}

/// A radial test function through its value and first two derivatives at
/// one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialJet {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// `cos^i θ · sin^j θ`.
fn trig_moment(i: u32, j: u32, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c.powi(i as i32) * s.powi(j as i32)
}

/// Fourier coefficients `c_k`, `k = −(i+j)..=(i+j)`, of `cos^i θ · sin^j θ`.
fn fourier_coefficients(i: u32, j: u32) -> Vec<Complex64> {
    let degree = (i + j) as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * degree + 1];
    coeffs[degree] = Complex64::new(1.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let half_over_i = Complex64::new(0.0, -0.5);
    let mut multiply = |factor_minus: Complex64, factor: Complex64| {
        // Multiplies by factor·(e^{iθ} + factor_minus·e^{−iθ}).
        let old = coeffs.clone();
        for (k, slot) in coeffs.iter_mut().enumerate() {
            let up = if k > 0 { old[k - 1] } else { Complex64::new(0.0, 0.0) };
            let down = old.get(k + 1).copied().unwrap_or_default();
            *slot = factor * (up + factor_minus * down);
        }
    };
    for _ in 0..i {
        multiply(Complex64::new(1.0, 0.0), half);
    }
    for _ in 0..j {
        multiply(Complex64::new(-1.0, 0.0), half_over_i);
    }
    coeffs
}

/// `(1/2π)∫₀^{2π} cos^i α · sin^j α dα`.
pub fn trig_moment_mean(i: u32, j: u32) -> f64 {
    fourier_coefficients(i, j)[(i + j) as usize].re
}

/// `∫₀^θ cos^i α · sin^j α dα`, exact up to rounding.
pub fn trig_moment_integral(i: u32, j: u32, theta: f64) -> f64 {
    let coeffs = fourier_coefficients(i, j);
    let degree = (i + j) as i64;
    coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let k = idx as i64 - degree;
            if k == 0 {
                c.re * theta
            } else {
                let kf = k as f64;
                let primitive = (Complex64::new(0.0, kf * theta).exp() - 1.0) / Complex64::new(0.0, kf);
                (c * primitive).re
            }
        })
        .sum()
}

/// Angular structure `[Σ coef·O_{i,j}(θ)]·r^power·p + quadratic·O_{2,0}(θ)·r·p²`.
struct Expansion {
    drift_terms: [(u32, u32, f64); 2],
    power: i32,
    quadratic: f64,
    averaged_drift: f64,
    rotation: f64,
}

impl Expansion {
    fn new(order: ExpansionOrder, beta: f64, gamma: &GammaModel) -> Result<Self, ModDevError> {
        let g = gamma.taylor_at_zero();
        let k = KConstants::new(beta, gamma);
        let rotation = k.rotation_scale(g[0])?;
        let quadratic = 8.0 * beta * beta / g[0];
        Ok(match order {
            ExpansionOrder::Second => Self {
                drift_terms: [(3, 1, -2.0 * g[0] * g[2] * rotation), (4, 0, 2.0 * k.k1 / 3.0)],
                power: 2,
                quadratic,
                averaged_drift: k.k1 / 4.0,
                rotation,
            },
            ExpansionOrder::Fourth => {
                check_tri_critical(&k, g[0])?;
                Self {
                    drift_terms: [(5, 1, -g[0].powi(3) * g[4] * rotation / 6.0), (6, 0, k.k2 / 30.0)],
                    power: 3,
                    quadratic,
                    averaged_drift: k.k2 / 96.0,
                    rotation,
                }
            }
        })
    }

    fn eval(&self, theta: f64, r: f64, p: f64) -> f64 {
        let drift: f64 = self.drift_terms.iter().map(|&(i, j, c)| c * trig_moment(i, j, theta)).sum();
        drift * r.powi(self.power) * p + self.quadratic * trig_moment(2, 0, theta) * r * p * p
    }

    /// `∫₀^θ H_α(r, p) dα`.
    fn angle_integral(&self, theta: f64, r: f64, p: f64) -> f64 {
        let drift: f64 = self
            .drift_terms
            .iter()
            .map(|&(i, j, c)| c * trig_moment_integral(i, j, theta))
            .sum();
        drift * r.powi(self.power) * p + self.quadratic * trig_moment_integral(2, 0, theta) * r * p * p
    }

    fn averaged(&self, r: f64, p: f64) -> f64 {
        self.averaged_drift * r.powi(self.power) * p + 0.5 * self.quadratic * r * p * p
    }
}

/// Hamiltonian before averaging over the fast angle. The fourth-order form
/// requires the tri-critical condition `K1 = 0`.
pub fn pre_averaged_hamiltonian(
    theta: f64,
    r: f64,
    p: f64,
    order: ExpansionOrder,
    beta: f64,
    gamma: &GammaModel,
) -> Result<f64, ModDevError> {
    Ok(Expansion::new(order, beta, gamma)?.eval(theta, r, p))
}

/// Angular mean of [`pre_averaged_hamiltonian`] written through the
/// expansion constants: `K1/4·r²p` or `K2/96·r³p`, plus `4β²/Γ(0)·r·p²`.
pub fn averaged_from_expansion(
    r: f64,
    p: f64,
    order: ExpansionOrder,
    beta: f64,
    gamma: &GammaModel,
) -> Result<f64, ModDevError> {
    Ok(Expansion::new(order, beta, gamma)?.averaged(r, p))
}

/// Perturbation of the test function that cancels the angular dependence at
/// the given order.
pub fn perturbation(
    order: PerturbationOrder,
    r: f64,
    theta: f64,
    jet: RadialJet,
    beta: f64,
    gamma: &GammaModel,
) -> Result<f64, ModDevError> {
    let g = gamma.taylor_at_zero();
    match order {
        PerturbationOrder::Zeroth => {
            let e = Expansion::new(ExpansionOrder::Second, beta, gamma)?;
            let p = jet.slope;
            Ok((theta * e.averaged(r, p) - e.angle_integral(theta, r, p)) / (2.0 * e.rotation))
        }
        PerturbationOrder::First => Ok(-0.25 * g[0] * g[2] * trig_moment(4, 0, theta) * r * r * jet.slope),
        PerturbationOrder::Second => {
            let e = Expansion::new(ExpansionOrder::Fourth, beta, gamma)?;
            let p = jet.slope;
            let coupling = second_order_coupling(&g, e.rotation);
            let bracket = theta * e.averaged(r, p) - e.angle_integral(theta, r, p)
                + coupling / 6.0 * (trig_moment(6, 0, theta) - 1.0) * r.powi(3) * jet.slope
                + coupling / 16.0 * (trig_moment(8, 0, theta) - 1.0) * r.powi(4) * jet.curvature;
            Ok(bracket / (2.0 * e.rotation))
        }
    }
}

/// `Γ(0)²·Γ''(0)²·√(Γ(0)K0)`, the weight of the terms produced by the
/// first-order perturbation at fourth order.
fn second_order_coupling(g: &[f64; 7], rotation: f64) -> f64 {
    g[0] * g[0] * g[2] * g[2] * rotation
}

fn angle_derivative(f: impl Fn(f64) -> Result<f64, ModDevError>, theta: f64) -> Result<f64, ModDevError> {
    Ok((f(theta + ANGLE_STEP)? - f(theta - ANGLE_STEP)?) / (2.0 * ANGLE_STEP))
}

/// `H_θ(r, f') + 2√(Γ(0)K0)·∂_θΛ₀ − H̄f(r)`, which vanishes identically.
pub fn first_order_residual(r: f64, theta: f64, jet: RadialJet, beta: f64, gamma: &GammaModel) -> Result<f64, ModDevError> {
    let e = Expansion::new(ExpansionOrder::Second, beta, gamma)?;
    let d_lambda = angle_derivative(|t| perturbation(PerturbationOrder::Zeroth, r, t, jet, beta, gamma), theta)?;
    Ok(e.eval(theta, r, jet.slope) + 2.0 * e.rotation * d_lambda - e.averaged(r, jet.slope))
}

/// Fourth-order analogue of [`first_order_residual`], including the terms
/// generated by the first-order perturbation.
pub fn second_order_residual(r: f64, theta: f64, jet: RadialJet, beta: f64, gamma: &GammaModel) -> Result<f64, ModDevError> {
    let g = gamma.taylor_at_zero();
    let e = Expansion::new(ExpansionOrder::Fourth, beta, gamma)?;
    let coupling = second_order_coupling(&g, e.rotation);
    let induced = coupling
        * (trig_moment(5, 1, theta) * r.powi(3) * jet.slope + 0.5 * trig_moment(7, 1, theta) * r.powi(4) * jet.curvature);
    let d_lambda = angle_derivative(|t| perturbation(PerturbationOrder::Second, r, t, jet, beta, gamma), theta)?;
    Ok(e.eval(theta, r, jet.slope) + induced + 2.0 * e.rotation * d_lambda - e.averaged(r, jet.slope))
}
