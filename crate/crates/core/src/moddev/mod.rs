//! Moderate deviations around the origin.
//!
//! On the critical line the fluctuations, rescaled by `b_n` and written in
//! polar coordinates, separate into a fast angle and a slow squared radius.
//! Averaging out the angle gives a one-dimensional Hamiltonian
//! `H(x, p) = −b·x^k·p + a·x·p²` whose Legendre dual is the Lagrangian of the
//! action functional. Away from criticality the Lagrangian is the Gaussian
//! cost of the linearized dynamics.

mod averaging;
mod lagrangian;

pub use averaging::{
    averaged_from_expansion, first_order_residual, perturbation, pre_averaged_hamiltonian, second_order_residual,
    trig_moment_integral, trig_moment_mean, ExpansionOrder, PerturbationOrder, RadialJet,
};
pub use lagrangian::{
    action, containment_check, flow_action, hamiltonian_flow, lagrangian, legendre_dual, HamiltonianPath,
    SampledPath,
};

use crate::gamma::GammaModel;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Relative tolerance for "`K1` vanishes" at the tri-critical point.
const TRI_CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModDevError {
    #[error("βΓ'(0) − Γ(0) must be positive, got {0}")]
    NonPositiveK0(f64),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("drift coefficient is negative ({0}); the averaged Hamiltonian is not of the critical type")]
    NegativeDrift(f64),
    #[error("supremum over p is unbounded")]
    UnboundedSup,
    #[error("action needs at least 3 samples, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Ode(#[from] crate::ode::OdeError),
}

/// Expansion constants `Γ(0)^{2j}·[βΓ^{(2j+1)}(0) − (2j+1)Γ^{(2j)}(0)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KConstants {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

impl KConstants {
    pub fn new(beta: f64, gamma: &GammaModel) -> Self {
        let g = gamma.taylor_at_zero();
        let term = |j: usize| g[0].powi(2 * j as i32) * (beta * g[2 * j + 1] - (2 * j + 1) as f64 * g[2 * j]);
        Self {
            k0: term(0),
            k1: term(1),
            k2: term(2),
        }
    }

    /// `√(Γ(0)·K0)`, the angular speed scale of the linearized rotation.
    pub fn rotation_scale(&self, gamma0: f64) -> Result<f64, ModDevError> {
        if self.k0 > 0.0 && gamma0 > 0.0 {
            Ok((gamma0 * self.k0).sqrt())
        } else {
            Err(ModDevError::NonPositiveK0(self.k0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    CriticalLine,
    TriCritical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Subcritical => "subcritical",
            Self::CriticalLine => "critical_line",
            Self::TriCritical => "tri_critical",
        }
    }

    /// Order of the first non-vanishing drift term: 0 below criticality,
    /// 2 on the critical line and 4 at the tri-critical point.
    pub fn expansion_order(self) -> i32 {
        match self {
            Self::Subcritical => 0,
            Self::CriticalLine => 2,
            Self::TriCritical => 4,
        }
    }

    /// Large-deviation speed `n·b_n^{−(order+2)}` of the rescaled process.
    pub fn speed(self, n: f64, scaling: f64) -> f64 {
        n * scaling.powi(-(self.expansion_order() + 2))
    }
}

/// Linearization data for the subcritical regime, where the cost is finite
/// only along `v_y = β·v_x − κ·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub beta: f64,
    pub kappa: f64,
    pub gamma0: f64,
    pub gamma_slope: f64,
}

impl LinearConstraint {
    /// `v_y − (β·v_x − κ·y)`.
    pub fn violation(&self, y: f64, vx: f64, vy: f64) -> f64 {
        vy - (self.beta * vx - self.kappa * y)
    }

    /// Zero-cost horizontal velocity `2(Γ'(0)·y − Γ(0)·x)`.
    pub fn drift(&self, x: f64, y: f64) -> f64 {
        2.0 * (self.gamma_slope * y - self.gamma0 * x)
    }
}

/// Coefficients of the limiting Hamiltonian `−drift·x^power·p + diffusion·x·p²`.
///
/// In the subcritical regime only `constraint` is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    pub beta: f64,
    pub diffusion: f64,
    pub drift: f64,
    pub power: i32,
    pub constraint: Option<LinearConstraint>,
}

impl RegimeSpec {
    pub fn subcritical(beta: f64, kappa: f64, gamma: &GammaModel) -> Self {
        let [g0, g1, ..] = gamma.taylor_at_zero();
        Self {
            regime: Regime::Subcritical,
            beta,
            diffusion: 2.0 * g0,
            drift: 0.0,
            power: 1,
            constraint: Some(LinearConstraint {
                beta,
                kappa,
                gamma0: g0,
                gamma_slope: g1,
            }),
        }
    }

    /// Critical line at the given `β`, where `κ = 2βΓ'(0) − 2Γ(0)`.
    pub fn critical_line(beta: f64, gamma: &GammaModel) -> Result<Self, ModDevError> {
        let [g0, g1, g2, g3, ..] = gamma.taylor_at_zero();
        let k0 = beta * g1 - g0;
        if k0 <= 0.0 {
            return Err(ModDevError::NonPositiveK0(k0));
        }
        let drift = 0.25 * g0 * g0 * (3.0 * g2 - beta * g3);
        if drift < 0.0 {
            return Err(ModDevError::NegativeDrift(drift));
        }
        Ok(Self {
            regime: Regime::CriticalLine,
            beta,
            diffusion: 4.0 * beta * beta / g0,
            drift,
            power: 2,
            constraint: None,
        })
    }

    /// Tri-critical point `β = 3Γ''(0)/Γ'''(0)`.
    pub fn tri_critical(gamma: &GammaModel) -> Result<Self, ModDevError> {
        let [g0, g1, g2, g3, g4, g5, _] = gamma.taylor_at_zero();
        if g3 <= 0.0 || g2 <= 0.0 {
            return Err(ModDevError::RegimeMismatch(format!(
                "no tri-critical point: Γ''(0) = {g2}, Γ'''(0) = {g3}"
            )));
        }
        let beta = 3.0 * g2 / g3;
        let k0 = beta * g1 - g0;
        if k0 <= 0.0 {
            return Err(ModDevError::NonPositiveK0(k0));
        }
        let drift = g0.powi(4) * (5.0 * g4 - beta * g5) / 96.0;
        if drift < 0.0 {
            return Err(ModDevError::NegativeDrift(drift));
        }
        Ok(Self {
            regime: Regime::TriCritical,
            beta,
            diffusion: 4.0 * beta * beta / g0,
            drift,
            power: 3,
            constraint: None,
        })
    }

    /// `κ` on the critical line for this `β`.
    pub fn critical_kappa(&self, gamma: &GammaModel) -> f64 {
        2.0 * self.beta * gamma.deriv(1, 0.0) - 2.0 * gamma.eval(0.0)
    }

    fn radial(&self) -> Result<(), ModDevError> {
        match self.regime {
            Regime::Subcritical => Err(ModDevError::RegimeMismatch("expected a critical regime".into())),
            _ => Ok(()),
        }
    }
}

/// `√(Γ(0)·K0)` for the rescaling, rejecting `K0 ≤ 0`.
fn rescale_denominator(beta: f64, gamma: &GammaModel) -> Result<(f64, f64), ModDevError> {
    let g0 = gamma.eval(0.0);
    let scale = KConstants::new(beta, gamma).rotation_scale(g0)?;
    Ok((scale, g0))
}

/// Maps `(m, ζ)` to the rescaled pair `(b_n(βm − ζ)/√(Γ(0)K0), b_n·ζ/Γ(0))`,
/// which turns the elliptic orbits of the linearization into circles.
pub fn rescale_mz(m: f64, zeta: f64, scale: f64, beta: f64, gamma: &GammaModel) -> Result<(f64, f64), ModDevError> {
    let (denom, g0) = rescale_denominator(beta, gamma)?;
    Ok((scale * (beta * m - zeta) / denom, scale * zeta / g0))
}

/// Inverse of [`rescale_mz`].
pub fn unrescale_mz(big_m: f64, big_z: f64, scale: f64, beta: f64, gamma: &GammaModel) -> Result<(f64, f64), ModDevError> {
    let (denom, g0) = rescale_denominator(beta, gamma)?;
    let zeta = big_z * g0 / scale;
    Ok(((big_m * denom / scale + zeta) / beta, zeta))
}

/// Squared radius and angle, with `x = √r·sin θ` and `ξ = √r·cos θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
    pub degenerate: bool,
}

pub fn to_polar(x: f64, xi: f64) -> PolarPoint {
    let r = x * x + xi * xi;
    if r == 0.0 {
        return PolarPoint {
            r: 0.0,
            theta: 0.0,
            degenerate: true,
        };
    }
    let mut theta = x.atan2(xi);
    if theta < 0.0 {
        theta += TAU;
    }
    if theta >= TAU {
        theta = 0.0;
    }
    PolarPoint {
        r,
        theta,
        degenerate: false,
    }
}

pub fn from_polar(point: PolarPoint) -> (f64, f64) {
    if point.degenerate {
        return (0.0, 0.0);
    }
    let root = point.r.sqrt();
    let (s, c) = point.theta.sin_cos();
    (root * s, root * c)
}

/// Limiting Hamiltonian `−drift·x^power·p + diffusion·x·p²`.
pub fn averaged_hamiltonian(x: f64, p: f64, spec: &RegimeSpec) -> f64 {
    -spec.drift * x.powi(spec.power) * p + spec.diffusion * x * p * p
}

/// Subcritical Hamiltonian `2(Γ'(0)y − Γ(0)x)·q − κ·y·p_y + 2Γ(0)·q²` with
/// `q = p_x + β·p_y`.
pub fn subcritical_hamiltonian(constraint: &LinearConstraint, state: [f64; 2], momentum: [f64; 2]) -> f64 {
    let [x, y] = state;
    let [px, py] = momentum;
    let q = px + constraint.beta * py;
    constraint.drift(x, y) * q - constraint.kappa * y * py + 2.0 * constraint.gamma0 * q * q
}

pub(crate) fn check_tri_critical(k: &KConstants, gamma0: f64) -> Result<(), ModDevError> {
    let scale = gamma0 * gamma0 * (k.k0.abs() + gamma0).max(1.0);
    if k.k1.abs() <= TRI_CRITICAL_TOL * scale {
        Ok(())
    } else {
        Err(ModDevError::RegimeMismatch(format!("fourth-order expansion needs K1 = 0, got {}", k.k1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn k_constants_by_substitution() {
        // exp: every derivative is 1, so Kj = β − (2j+1).
        let k = KConstants::new(2.0, &GammaModel::exp());
        assert_eq!((k.k0, k.k1, k.k2), (1.0, -1.0, -3.0));
        // 1 + tanh at 0: derivatives 1, 1, 0, −2, 0, 16.
        let k = KConstants::new(2.0, &GammaModel::tanh_plus_one());
        assert!((k.k0 - 1.0).abs() < 1e-12);
        assert!((k.k1 + 4.0).abs() < 1e-9);
        assert!((k.k2 - 32.0).abs() < 1e-6);
    }

    #[test]
    fn rescale_examples() {
        let g = GammaModel::exp();
        assert_eq!(rescale_mz(0.0, 0.0, 10.0, 2.0, &g).unwrap(), (0.0, 0.0));
        let (mm, zz) = rescale_mz(0.1, 0.1, 10.0, 2.0, &g).unwrap();
        assert!((mm - 1.0).abs() < 1e-12 && (zz - 1.0).abs() < 1e-12);
        let (m, z) = unrescale_mz(mm, zz, 10.0, 2.0, &g).unwrap();
        assert!((m - 0.1).abs() < 1e-12 && (z - 0.1).abs() < 1e-12);
        assert!(matches!(rescale_mz(0.1, 0.1, 10.0, 0.5, &g), Err(ModDevError::NonPositiveK0(_))));
    }

    #[test]
    fn polar_examples() {
        let p = to_polar(1.0, 0.0);
        assert_eq!(p.r, 1.0);
        assert!((p.theta - FRAC_PI_2).abs() < 1e-15);
        let p = to_polar(0.0, 1.0);
        assert_eq!((p.r, p.theta), (1.0, 0.0));
        let origin = to_polar(0.0, 0.0);
        assert!(origin.degenerate);
        assert_eq!(from_polar(origin), (0.0, 0.0));
        let p = to_polar(-1e-3, 1.0);
        assert!(p.theta > 6.28 && p.theta < TAU);
    }

    #[test]
    fn averaged_examples() {
        let spec = RegimeSpec::critical_line(2.0, &GammaModel::exp()).unwrap();
        assert_eq!((spec.drift, spec.diffusion), (0.25, 16.0));
        assert_eq!(averaged_hamiltonian(1.0, 1.0, &spec), 15.75);
        assert_eq!(averaged_hamiltonian(0.0, 3.7, &spec), 0.0);
        assert_eq!(spec.critical_kappa(&GammaModel::exp()), 2.0);
    }

    #[test]
    fn drift_vanishes_at_tri_critical_beta() {
        let g = GammaModel::exp();
        let tri = RegimeSpec::tri_critical(&g).unwrap();
        assert_eq!(tri.beta, 3.0);
        assert_eq!(RegimeSpec::critical_line(tri.beta, &g).unwrap().drift, 0.0);
        assert!((tri.drift - 2.0 / 96.0).abs() < 1e-15);
        assert!(RegimeSpec::tri_critical(&GammaModel::tanh_plus_one()).is_err());
    }

    #[test]
    fn prefactor_identity() {
        for beta in [1.5, 2.0, 2.75] {
            for g in [GammaModel::exp(), GammaModel::tanh_plus_one()] {
                let spec = RegimeSpec::critical_line(beta, &g).unwrap();
                assert_eq!(g.eval(0.0) / (16.0 * beta * beta), 1.0 / (4.0 * spec.diffusion));
            }
        }
    }

    proptest! {
        #[test]
        fn polar_round_trip(x in -10.0f64..10.0, xi in -10.0f64..10.0) {
            prop_assume!(x.hypot(xi) > 1e-6);
            let p = to_polar(x, xi);
            prop_assert!((0.0..TAU).contains(&p.theta));
            let (a, b) = from_polar(p);
            prop_assert!((a - x).abs() <= 1e-12 * (1.0 + x.abs()) && (b - xi).abs() <= 1e-12 * (1.0 + xi.abs()));
        }

        #[test]
        fn rescale_round_trip(m in -1.0f64..1.0, z in -2.0f64..2.0, scale in 1.0f64..100.0, beta in 1.1f64..4.0) {
            for g in [GammaModel::exp(), GammaModel::tanh_plus_one()] {
                let (mm, zz) = rescale_mz(m, z, scale, beta, &g).unwrap();
                let (m2, z2) = unrescale_mz(mm, zz, scale, beta, &g).unwrap();
                prop_assert!((m2 - m).abs() <= 1e-12 && (z2 - z).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn speeds_slow_down_with_the_order() {
        let (n, scaling) = (1e4, 10.0);
        assert_eq!(Regime::Subcritical.speed(n, scaling), 100.0);
        assert_eq!(Regime::CriticalLine.speed(n, scaling), 1.0);
        assert_eq!(Regime::TriCritical.speed(n, scaling), 1e-2);
    }
}
