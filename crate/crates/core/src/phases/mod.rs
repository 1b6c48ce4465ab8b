//! Critical curves and phase classification in the `(κ, β)` plane.
//!
//! The origin loses stability on the Hopf line `β_c(κ)`. When `Γ'''(0) > 0`
//! the Hopf bifurcation turns subcritical beyond the tri-critical abscissa
//! `κ_tc`, and a stable cycle then coexists with the stable origin for
//! `β_⋆(κ) ≤ β < β_c(κ)`. The tangency curve `β_Δ(κ)` of the fixed-point
//! map `Ξ` bounds `β_⋆` from below.

use crate::gamma::GammaModel;
use crate::macroflow::{find_cycles, CycleResult, CycleSearch, Stability};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

const XI_GRID_POINTS: usize = 2000;
const XI_ROOT_TOL: f64 = 1e-10;
const TANGENCY_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;
const BETA_STAR_TOL: f64 = 1e-3;
const MIN_TANGENCY_U: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("Γ'(0) = 0: the Hopf line is undefined")]
    DegenerateGamma,
    #[error("tangency Newton solve failed from every starting point")]
    NewtonNoConvergence,
    #[error("no coexistence window found below beta_c = {beta_c}")]
    WindowEmpty { beta_c: f64 },
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseLabel {
    #[serde(rename = "FP")]
    Fp,
    #[serde(rename = "LC")]
    Lc,
    #[serde(rename = "FP+LC")]
    FpPlusLc,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fp => "FP",
            Self::Lc => "LC",
            Self::FpPlusLc => "FP+LC",
        }
    }
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurves {
    pub kappa: f64,
    pub beta_c: f64,
    pub kappa_tc: Option<f64>,
    pub beta_delta: Option<f64>,
    pub beta_star: Option<f64>,
    pub sigma_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvidence {
    pub beta_c: f64,
    pub sigma_l: f64,
    pub origin_stable: bool,
    pub cycles: Vec<CycleResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseClassification {
    pub label: PhaseLabel,
    pub evidence: PhaseEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub kappa: f64,
    pub beta: f64,
    pub label: PhaseLabel,
    pub beta_c: f64,
    pub sigma_l: f64,
}

/// Hopf line `(κ + 2Γ(0)) / (2Γ'(0))`.
pub fn beta_c(kappa: f64, gamma: &GammaModel) -> Result<f64, PhaseError> {
    let slope = gamma.deriv(1, 0.0);
    if slope == 0.0 {
        return Err(PhaseError::DegenerateGamma);
    }
    Ok((kappa + 2.0 * gamma.eval(0.0)) / (2.0 * slope))
}

/// Tri-critical abscissa `6Γ''(0)Γ'(0)/Γ'''(0) − 2Γ(0)`, defined only when
/// `Γ'''(0) > 0`.
pub fn kappa_tc(gamma: &GammaModel) -> Option<f64> {
    let [g0, g1, g2, g3, ..] = gamma.taylor_at_zero();
    (g3 > 0.0).then(|| 6.0 * g2 * g1 / g3 - 2.0 * g0)
}

/// `β` at the tri-critical point, `3Γ''(0)/Γ'''(0)`.
pub fn beta_tc(gamma: &GammaModel) -> Option<f64> {
    let [_, _, g2, g3, ..] = gamma.taylor_at_zero();
    (g3 > 0.0).then(|| 3.0 * g2 / g3)
}

/// First Lyapunov number on the Hopf line. Negative means supercritical.
pub fn lyapunov_number(kappa: f64, gamma: &GammaModel) -> f64 {
    let [g0, g1, g2, g3, ..] = gamma.taylor_at_zero();
    let damping = kappa + 2.0 * g0;
    -3.0 * PI * g0 * damping * (6.0 * g2 * g1 - damping * g3) / (8.0 * (2.0 * kappa * g0).sqrt() * g1.powi(3))
}

/// Sign of the next-order Lyapunov quantity at the tri-critical point,
/// `−sgn(5Γ⁽⁴⁾(0)Γ'''(0) − 3Γ⁽⁵⁾(0)Γ''(0))`.
pub fn next_order_sign(gamma: &GammaModel) -> f64 {
    let [_, _, g2, g3, g4, g5, _] = gamma.taylor_at_zero();
    let value = 5.0 * g4 * g3 - 3.0 * g5 * g2;
    if value == 0.0 {
        0.0
    } else {
        -value.signum()
    }
}

/// Fixed-point map `β(Γ(u)−Γ(−u)) / (Γ(u)+Γ(−u)+κ)`.
pub fn xi_map(u: f64, beta: f64, kappa: f64, gamma: &GammaModel) -> f64 {
    beta * gamma.odd_part(u) / (gamma.even_part(u) + kappa)
}

/// `Ξ'(0) = 2βΓ'(0)/(κ+2Γ(0))`.
pub fn xi_slope_at_zero(beta: f64, kappa: f64, gamma: &GammaModel) -> f64 {
    2.0 * beta * gamma.deriv(1, 0.0) / (kappa + 2.0 * gamma.eval(0.0))
}

/// `Ξ'''(0) = 2β((κ+2Γ(0))Γ'''(0) − 6Γ'(0)Γ''(0)) / (κ+2Γ(0))²`.
pub fn xi_third_at_zero(beta: f64, kappa: f64, gamma: &GammaModel) -> f64 {
    let [g0, g1, g2, g3, ..] = gamma.taylor_at_zero();
    let damping = kappa + 2.0 * g0;
    2.0 * beta * (damping * g3 - 6.0 * g1 * g2) / (damping * damping)
}

/// `(g, g', g'')` for the profile `g(u) = (Γ(u)−Γ(−u)) / (Γ(u)+Γ(−u)+κ)`,
/// so that `Ξ = β·g`.
fn profile_derivs(u: f64, kappa: f64, gamma: &GammaModel) -> (f64, f64, f64) {
    let (p0, p1, p2) = (gamma.eval(u), gamma.deriv(1, u), gamma.deriv(2, u));
    let (q0, q1, q2) = (gamma.eval(-u), gamma.deriv(1, -u), gamma.deriv(2, -u));
    let (odd, odd1, odd2) = (p0 - q0, p1 + q1, p2 - q2);
    let (den, den1, den2) = (p0 + q0 + kappa, p1 - q1, p2 + q2);
    let value = odd / den;
    let first = (odd1 * den - odd * den1) / (den * den);
    let second = (odd2 * den - odd * den2) / (den * den) - 2.0 * den1 * first / den;
    (value, first, second)
}

/// Positive roots of `Ξ(u) = u` on `(0, u_max]`.
pub fn xi_fixed_points(beta: f64, kappa: f64, gamma: &GammaModel, u_max: f64) -> Vec<f64> {
    let gap = |u: f64| xi_map(u, beta, kappa, gamma) - u;
    let step = u_max / XI_GRID_POINTS as f64;
    let mut roots = Vec::new();
    let mut prev_u = step;
    let mut prev = gap(prev_u);
    if prev == 0.0 {
        roots.push(prev_u);
    }
    for i in 2..=XI_GRID_POINTS {
        let u = i as f64 * step;
        let value = gap(u);
        if value == 0.0 {
            roots.push(u);
        } else if prev * value < 0.0 {
            let (mut lo, mut hi, mut f_lo) = (prev_u, u, prev);
            while hi - lo > XI_ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                let f_mid = gap(mid);
                if f_mid * f_lo > 0.0 {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_u = u;
        prev = value;
    }
    roots
}

/// Default bracketing range `5β`: `|Ξ| < β` everywhere.
pub fn default_u_max(beta: f64) -> f64 {
    5.0 * beta
}

/// Tangency curve: the `β` at which `Ξ(u) = u` and `Ξ'(u) = 1` for some
/// `u > 0`. Absent when the Hopf bifurcation at `κ` is supercritical, since
/// then no tangency exists.
pub fn beta_delta(kappa: f64, gamma: &GammaModel) -> Result<Option<f64>, PhaseError> {
    Ok(beta_delta_point(kappa, gamma)?.map(|(_, beta)| beta))
}

/// `(u_*, β_Δ)` solving the tangency system by damped Newton with
/// multistart.
pub fn beta_delta_point(kappa: f64, gamma: &GammaModel) -> Result<Option<(f64, f64)>, PhaseError> {
    let bc = beta_c(kappa, gamma)?;
    if xi_third_at_zero(bc, kappa, gamma) <= 0.0 {
        return Ok(None);
    }
    // (u, β) = (0, β_c) solves the system trivially; starts that collapse
    // onto it are discarded.
    let starts = [1.0, 0.5, 2.0, 1.5, 3.0, 0.25, 4.0, 6.0];
    for &u0 in &starts {
        if let Some(sol) = tangency_newton(u0, 0.9 * bc, kappa, gamma) {
            if sol.0 > MIN_TANGENCY_U && sol.1 > 0.0 && sol.1 <= bc {
                return Ok(Some(sol));
            }
        }
    }
    Err(PhaseError::NewtonNoConvergence)
}

/// Residuals `(Ξ(u) − u, Ξ'(u) − 1)`.
pub fn tangency_residuals(u: f64, beta: f64, kappa: f64, gamma: &GammaModel) -> (f64, f64) {
    let (value, first, _) = profile_derivs(u, kappa, gamma);
    (beta * value - u, beta * first - 1.0)
}

fn tangency_newton(u0: f64, beta0: f64, kappa: f64, gamma: &GammaModel) -> Option<(f64, f64)> {
    let (mut u, mut beta) = (u0, beta0);
    let norm = |u: f64, beta: f64| {
        let (a, b) = tangency_residuals(u, beta, kappa, gamma);
        a.hypot(b)
    };
    let mut current = norm(u, beta);
    for _ in 0..NEWTON_MAX_ITER {
        if current <= TANGENCY_TOL {
            return Some((u, beta));
        }
        let (value, first, second) = profile_derivs(u, kappa, gamma);
        let (r1, r2) = (beta * value - u, beta * first - 1.0);
        // Jacobian with respect to (u, β).
        let (a, b, c, d) = (beta * first - 1.0, value, beta * second, first);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let du = (d * r1 - b * r2) / det;
        let dbeta = (a * r2 - c * r1) / det;
        let mut damping = 1.0;
        loop {
            let (nu, nb) = (u - damping * du, beta - damping * dbeta);
            let next = norm(nu, nb);
            if nu > 0.0 && next.is_finite() && next < current {
                u = nu;
                beta = nb;
                current = next;
                break;
            }
            damping *= 0.5;
            if damping < 1e-10 {
                return (current <= 1e-9).then_some((u, beta));
            }
        }
    }
    (current <= TANGENCY_TOL).then_some((u, beta))
}

fn has_stable_cycle(cycles: &[CycleResult]) -> bool {
    cycles
        .iter()
        .any(|c| matches!(c.stability, Stability::Stable | Stability::Semistable))
}

/// Saddle-node of cycles: infimum of the `β < β_c` for which a stable cycle
/// exists, located by bisection on `[β_Δ, β_c]` to `10⁻³`.
pub fn beta_star(kappa: f64, gamma: &GammaModel, search: &CycleSearch) -> Result<f64, PhaseError> {
    match kappa_tc(gamma) {
        Some(tc) if kappa > tc => {}
        _ => {
            return Err(PhaseError::NotApplicable(
                "coexistence requires kappa above the tri-critical value".into(),
            ))
        }
    }
    let bc = beta_c(kappa, gamma)?;
    let lower = beta_delta(kappa, gamma)?.unwrap_or(0.0);
    let exists = |beta: f64| has_stable_cycle(&find_cycles(beta, kappa, gamma, search));
    let mut hi = bc - BETA_STAR_TOL;
    if !exists(hi) {
        return Err(PhaseError::WindowEmpty { beta_c: bc });
    }
    let mut lo = lower;
    if exists(lo) {
        return Ok(lo);
    }
    while hi - lo > 0.25 * BETA_STAR_TOL {
        let mid = 0.5 * (lo + hi);
        if exists(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Labels a parameter point from the linear stability of the origin and the
/// cycles of the return map. Points on the Hopf line count as LC.
pub fn classify(beta: f64, kappa: f64, gamma: &GammaModel, search: &CycleSearch) -> Result<PhaseClassification, PhaseError> {
    let bc = beta_c(kappa, gamma)?;
    let sigma_l = lyapunov_number(kappa, gamma);
    let cycles = find_cycles(beta, kappa, gamma, search);
    let origin_stable = beta < bc;
    let label = if !origin_stable {
        PhaseLabel::Lc
    } else if has_stable_cycle(&cycles) {
        PhaseLabel::FpPlusLc
    } else {
        PhaseLabel::Fp
    };
    Ok(PhaseClassification {
        label,
        evidence: PhaseEvidence { beta_c: bc, sigma_l, origin_stable, cycles },
    })
}

/// Classifies every point of `kappas × betas`, κ-major.
pub fn scan_grid(kappas: &[f64], betas: &[f64], gamma: &GammaModel, search: &CycleSearch) -> Result<Vec<PhaseCell>, PhaseError> {
    let points: Vec<(f64, f64)> = kappas.iter().flat_map(|&k| betas.iter().map(move |&b| (k, b))).collect();
    points
        .par_iter()
        .map(|&(kappa, beta)| {
            let c = classify(beta, kappa, gamma, search)?;
            Ok(PhaseCell {
                kappa,
                beta,
                label: c.label,
                beta_c: c.evidence.beta_c,
                sigma_l: c.evidence.sigma_l,
            })
        })
        .collect()
}

/// `β_c`, `β_Δ`, `β_⋆` and `σ_L` at each `κ`. Curves that do not exist at a
/// given `κ` are left empty.
pub fn critical_curves(kappas: &[f64], gamma: &GammaModel, search: &CycleSearch) -> Result<Vec<CriticalCurves>, PhaseError> {
    let tc = kappa_tc(gamma);
    kappas
        .par_iter()
        .map(|&kappa| {
            let bc = beta_c(kappa, gamma)?;
            let beta_delta = beta_delta(kappa, gamma)?;
            let beta_star = match tc {
                Some(tc) if kappa > tc => match beta_star(kappa, gamma, search) {
                    Ok(b) => Some(b),
                    Err(PhaseError::WindowEmpty { .. }) => None,
                    Err(e) => return Err(e),
                },
                _ => None,
            };
            Ok(CriticalCurves {
                kappa,
                beta_c: bc,
                kappa_tc: tc,
                beta_delta,
                beta_star,
                sigma_l: lyapunov_number(kappa, gamma),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent tangency oracle: at a tangency `u·g'(u) = g(u)` and
    /// `β = u / g(u)`; solved by bisection in `u`.
    fn tangency_oracle(kappa: f64, gamma: &GammaModel) -> f64 {
        let h = |u: f64| {
            let step = 1e-5;
            let g = |v: f64| gamma.odd_part(v) / (gamma.even_part(v) + kappa);
            u * (g(u + step) - g(u - step)) / (2.0 * step) - g(u)
        };
        let (mut lo, mut hi) = (0.2, 10.0);
        assert!(h(lo) * h(hi) < 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if h(mid) * h(lo) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = 0.5 * (lo + hi);
        u * (gamma.even_part(u) + kappa) / gamma.odd_part(u)
    }

    #[test]
    fn hopf_line_values() {
        assert_eq!(beta_c(2.0, &GammaModel::exp()).unwrap(), 2.0);
        assert_eq!(beta_c(2.0, &GammaModel::tanh_plus_one()).unwrap(), 2.0);
        assert!((beta_c(1e-12, &GammaModel::exp()).unwrap() - 1.0).abs() < 1e-11);
        let flat = GammaModel::custom("flat", |k, _| if k == 0 { 1.0 } else { 0.0 });
        assert_eq!(beta_c(1.0, &flat), Err(PhaseError::DegenerateGamma));
    }

    #[test]
    fn tri_critical_values() {
        let exp = GammaModel::exp();
        assert_eq!(kappa_tc(&exp), Some(4.0));
        assert_eq!(beta_tc(&exp), Some(3.0));
        assert_eq!(beta_c(4.0, &exp).unwrap(), 3.0);
        assert!(lyapunov_number(4.0, &exp).abs() <= 1e-10);
        assert_eq!(kappa_tc(&GammaModel::tanh_plus_one()), None);
        // Γ''(0) = 0 and Γ'''(0) > 0 puts the tri-critical point at κ = −2Γ(0).
        let cubic = GammaModel::custom("cubic-germ", |k, _| [1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0][k]);
        assert_eq!(kappa_tc(&cubic), Some(-2.0));
    }

    #[test]
    fn lyapunov_signs() {
        for kappa in [0.5, 1.0, 2.0, 5.0] {
            assert!(lyapunov_number(kappa, &GammaModel::tanh_plus_one()) < 0.0);
        }
        assert!(lyapunov_number(6.0, &GammaModel::exp()) > 0.0);
        assert!(lyapunov_number(2.0, &GammaModel::exp()) < 0.0);
        assert_eq!(next_order_sign(&GammaModel::exp()), -1.0);
    }

    #[test]
    fn xi_map_examples() {
        let exp = GammaModel::exp();
        assert_eq!(xi_map(0.0, 2.0, 1.0, &exp), 0.0);
        for u in [-1.0, 0.4, 2.5] {
            let expect = 2.0 * 3.0 * f64::sinh(u) / (2.0 * f64::cosh(u) + 6.0);
            assert!((xi_map(u, 3.0, 6.0, &exp) - expect).abs() < 1e-14);
        }
        let step = 1e-6;
        let numeric = (xi_map(step, 4.0, 6.0, &exp) - xi_map(-step, 4.0, 6.0, &exp)) / (2.0 * step);
        assert!((numeric - 1.0).abs() < 1e-9);
        assert_eq!(xi_slope_at_zero(4.0, 6.0, &exp), 1.0);
    }

    #[test]
    fn xi_third_matches_finite_differences() {
        for (g, beta, kappa) in [(GammaModel::exp(), 3.0, 6.0), (GammaModel::tanh_plus_one(), 1.5, 2.0)] {
            let h = 1e-2;
            let f = |u: f64| xi_map(u, beta, kappa, &g);
            let numeric = (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h.powi(3));
            assert!((numeric - xi_third_at_zero(beta, kappa, &g)).abs() < 1e-3, "{numeric}");
        }
    }

    #[test]
    fn fixed_point_counts() {
        let exp = GammaModel::exp();
        assert_eq!(xi_fixed_points(4.1, 6.0, &exp, default_u_max(4.1)).len(), 1);
        let tanh = GammaModel::tanh_plus_one();
        assert!(xi_fixed_points(1.5, 2.0, &tanh, default_u_max(1.5)).is_empty());
        let bd = beta_delta(6.0, &exp).unwrap().unwrap();
        let mid = 0.5 * (bd + 4.0);
        assert_eq!(xi_fixed_points(mid, 6.0, &exp, default_u_max(mid)).len(), 2);
    }

    #[test]
    fn tangency_solution() {
        let exp = GammaModel::exp();
        let (u, beta) = beta_delta_point(6.0, &exp).unwrap().unwrap();
        let (r1, r2) = tangency_residuals(u, beta, 6.0, &exp);
        assert!(r1.abs() <= 1e-9 && r2.abs() <= 1e-9);
        assert!(beta < 4.0);
        // Frozen from a 30-digit solve of u·g'(u) = g(u).
        assert!((beta - 3.728_934_293_439_833).abs() < 1e-9);
        assert!((beta - tangency_oracle(6.0, &exp)).abs() < 1e-6);
        assert!((beta_delta(5.0, &exp).unwrap().unwrap() - 3.418_334_502_288_216).abs() < 1e-9);
    }

    #[test]
    fn tangency_absent_below_tri_critical() {
        assert_eq!(beta_delta(2.0, &GammaModel::exp()).unwrap(), None);
        assert_eq!(beta_delta(1.0, &GammaModel::tanh_plus_one()).unwrap(), None);
    }

    #[test]
    fn coexistence_window_ordering() {
        let exp = GammaModel::exp();
        let search = CycleSearch::default();
        let bd = beta_delta(6.0, &exp).unwrap().unwrap();
        let bs = beta_star(6.0, &exp, &search).unwrap();
        assert!(bd <= bs && bs <= 4.0, "{bd} {bs}");
        assert!(has_stable_cycle(&find_cycles(4.0 - 1e-3, 6.0, &exp, &search)));
        assert!(!has_stable_cycle(&find_cycles(0.9 * bd, 6.0, &exp, &search)));
        let above = find_cycles(bs + 1e-2, 6.0, &exp, &search);
        assert_eq!(above.len(), 2);
        assert!((above[0].radius_on_section - above[1].radius_on_section).abs() > 1e-3);
        assert!(find_cycles(bs - 1e-2, 6.0, &exp, &search).is_empty());
    }

    #[test]
    fn classify_examples() {
        let search = CycleSearch::default();
        let tanh = GammaModel::tanh_plus_one();
        assert_eq!(classify(2.0, 1.0, &tanh, &search).unwrap().label, PhaseLabel::Lc);
        assert_eq!(classify(1.0, 2.0, &tanh, &search).unwrap().label, PhaseLabel::Fp);
        // On the Hopf line with σ_L < 0.
        assert_eq!(classify(1.5, 1.0, &tanh, &search).unwrap().label, PhaseLabel::Lc);
        let exp = GammaModel::exp();
        assert_eq!(classify(3.9, 6.0, &exp, &search).unwrap().label, PhaseLabel::FpPlusLc);
        assert_eq!(classify(1.0, 6.0, &exp, &search).unwrap().label, PhaseLabel::Fp);
    }

    #[test]
    fn labels_serialize() {
        assert_eq!(serde_json::to_string(&PhaseLabel::FpPlusLc).unwrap(), "\"FP+LC\"");
        assert_eq!(PhaseLabel::Fp.to_string(), "FP");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn supercritical_has_one_root(kappa in 0.2f64..8.0, excess in 0.01f64..2.0) {
            for g in [GammaModel::exp(), GammaModel::tanh_plus_one()] {
                let beta = beta_c(kappa, &g).unwrap() + excess;
                prop_assert_eq!(xi_fixed_points(beta, kappa, &g, default_u_max(beta)).len(), 1);
            }
        }

        #[test]
        fn concave_case_has_no_root(kappa in 0.2f64..8.0, frac in 0.05f64..0.99) {
            let g = GammaModel::tanh_plus_one();
            let beta = frac * beta_c(kappa, &g).unwrap();
            prop_assert!(xi_third_at_zero(beta, kappa, &g) < 0.0);
            prop_assert!(xi_fixed_points(beta, kappa, &g, default_u_max(beta)).is_empty());
        }

        #[test]
        fn convex_case_has_zero_or_two_roots(kappa in 4.5f64..10.0, frac in 0.3f64..0.999) {
            let g = GammaModel::exp();
            let beta = frac * beta_c(kappa, &g).unwrap();
            prop_assert!(xi_third_at_zero(beta, kappa, &g) > 0.0);
            let roots = xi_fixed_points(beta, kappa, &g, default_u_max(beta)).len();
            let bd = beta_delta(kappa, &g).unwrap().unwrap();
            prop_assert!(roots == 0 || roots == 2);
            prop_assert_eq!(roots == 2, beta > bd);
        }

        #[test]
        fn convex_case_on_hopf_line_has_one_root(kappa in 4.5f64..10.0) {
            let g = GammaModel::exp();
            let beta = beta_c(kappa, &g).unwrap();
            prop_assert_eq!(xi_fixed_points(beta, kappa, &g, default_u_max(beta)).len(), 1);
        }

        #[test]
        fn tangency_below_hopf(kappa in 4.2f64..12.0) {
            let g = GammaModel::exp();
            let bd = beta_delta(kappa, &g).unwrap().unwrap();
            prop_assert!(bd <= beta_c(kappa, &g).unwrap());
        }
    }
}
