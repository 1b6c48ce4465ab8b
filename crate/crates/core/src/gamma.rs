//! Spin-flip intensity functions.
//!
//! A [`GammaModel`] is the rate function `Γ` used by the Glauber dynamics: a
//! spin with value `σ` flips at rate `Γ(-σζ)`. Everything downstream (critical
//! curves, Lagrangian coefficients, Liénard form) only needs `Γ` and its first
//! six derivatives, so a model is fully described by `deriv(k, u)` for
//! `k ∈ 0..=6`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Highest derivative order any part of the toolkit asks for.
pub const MAX_ORDER: usize = 6;

/// Half-width of the interval on which custom models must be positive.
pub const POSITIVITY_CHECK_HALF_WIDTH: f64 = 5.0;

/// Dead-band applied to second differences when counting inflections.
pub const INFLECTION_DEAD_BAND: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GammaError {
    #[error("validation grid is empty")]
    EmptyGrid,
    #[error("validation grid is not sorted in increasing order")]
    UnsortedGrid,
    #[error("custom rate function is not positive at u = {u} (value {value})")]
    NotPositive { u: f64, value: f64 },
    #[error("expected at most {max} Taylor coefficients, got {got}")]
    TooManyCoefficients { max: usize, got: usize },
    #[error("Taylor coefficient list is empty")]
    NoCoefficients,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaKind {
    TanhPlusOne,
    Exp,
    Custom,
}

type DerivFn = dyn Fn(usize, f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Repr {
    TanhPlusOne,
    Exp,
    /// `Γ(u) = Σ c_k u^k / k!`, `k ≤ 6`.
    Taylor([f64; MAX_ORDER + 1]),
    Closure(Arc<DerivFn>),
}

/// Positive, increasing rate function with derivatives through order six.
///
/// Immutable after construction and cheap to clone (closures are shared).
#[derive(Clone)]
pub struct GammaModel {
    kind: GammaKind,
    name: String,
    repr: Repr,
}

impl fmt::Debug for GammaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GammaModel")
            .field("kind", &self.kind)
            .field("name", &self.name)
            .finish()
    }
}

impl GammaModel {
    /// `Γ(u) = 1 + tanh(u)` or `Γ(u) = exp(u)`.
    ///
    /// Passing [`GammaKind::Custom`] falls back to `TanhPlusOne`; use
    /// [`GammaModel::custom`] or [`GammaModel::from_taylor`] instead.
    pub fn builtin(kind: GammaKind) -> Self {
        match kind {
            GammaKind::Exp => Self::exp(),
            GammaKind::TanhPlusOne | GammaKind::Custom => Self::tanh_plus_one(),
        }
    }

    pub fn tanh_plus_one() -> Self {
        Self {
            kind: GammaKind::TanhPlusOne,
            name: "tanh".to_string(),
            repr: Repr::TanhPlusOne,
        }
    }

    pub fn exp() -> Self {
        Self {
            kind: GammaKind::Exp,
            name: "exp".to_string(),
            repr: Repr::Exp,
        }
    }

    /// A user-supplied model. `deriv(k, u)` must return the `k`-th
    /// derivative for every `k ≤ 6`; nothing is differentiated numerically.
    pub fn custom<F>(name: impl Into<String>, deriv: F) -> Self
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: GammaKind::Custom,
            name: name.into(),
            repr: Repr::Closure(Arc::new(deriv)),
        }
    }

    /// Polynomial model `Γ(u) = Σ c_k u^k / k!` from at most seven
    /// coefficients. Rejected unless positive on `[-5, 5]`.
    pub fn from_taylor(coefficients: &[f64]) -> Result<Self, GammaError> {
        if coefficients.is_empty() {
            return Err(GammaError::NoCoefficients);
        }
        if coefficients.len() > MAX_ORDER + 1 {
            return Err(GammaError::TooManyCoefficients {
                max: MAX_ORDER + 1,
                got: coefficients.len(),
            });
        }
        let mut c = [0.0; MAX_ORDER + 1];
        c[..coefficients.len()].copy_from_slice(coefficients);
        let model = Self {
            kind: GammaKind::Custom,
            name: "taylor".to_string(),
            repr: Repr::Taylor(c),
        };
        let n = 2001;
        for i in 0..n {
            let u = -POSITIVITY_CHECK_HALF_WIDTH
                + 2.0 * POSITIVITY_CHECK_HALF_WIDTH * i as f64 / (n - 1) as f64;
            let value = model.eval(u);
            if !(value > 0.0) {
                return Err(GammaError::NotPositive { u, value });
            }
        }
        Ok(model)
    }

    pub fn kind(&self) -> GammaKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match &self.repr {
            // 2 / (1 + e^{-2u}) avoids the cancellation in 1 + tanh(u) for u ≪ 0.
            Repr::TanhPlusOne => 2.0 / (1.0 + (-2.0 * u).exp()),
            Repr::Exp => u.exp(),
            Repr::Taylor(c) => taylor_derivative(c, 0, u),
            Repr::Closure(f) => f(0, u),
        }
    }

    /// `k`-th derivative at `u`. `deriv(0, u)` is exactly `eval(u)`.
    pub fn deriv(&self, k: usize, u: f64) -> f64 {
        if k == 0 {
            return self.eval(u);
        }
        match &self.repr {
            Repr::TanhPlusOne => tanh_derivative(k, u.tanh()),
            Repr::Exp => u.exp(),
            Repr::Taylor(c) => taylor_derivative(c, k, u),
            Repr::Closure(f) => f(k, u),
        }
    }

    /// `[Γ(0), Γ'(0), ..., Γ⁽⁶⁾(0)]`.
    pub fn taylor_at_zero(&self) -> [f64; MAX_ORDER + 1] {
        let mut out = [0.0; MAX_ORDER + 1];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.deriv(k, 0.0);
        }
        out
    }

    /// Odd part `Γ(u) - Γ(-u)`.
    #[inline]
    pub fn odd_part(&self, u: f64) -> f64 {
        self.eval(u) - self.eval(-u)
    }

    /// Even part `Γ(u) + Γ(-u)`.
    #[inline]
    pub fn even_part(&self, u: f64) -> f64 {
        self.eval(u) + self.eval(-u)
    }

    /// Grid check of the standing assumptions on `Γ`.
    ///
    /// The inflection condition is tested on `ψ(u) = (Γ(u)-Γ(-u)) /
    /// (Γ(u)+Γ(-u)+κ)` restricted to the positive part of the grid: `ψ` is
    /// odd, so `u = 0` is always an inflection point and only the curvature
    /// changes on `(0, ∞)` carry information.
    pub fn validate(&self, grid: &[f64], kappa: f64) -> Result<AssumptionReport, GammaError> {
        if grid.is_empty() {
            return Err(GammaError::EmptyGrid);
        }
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(GammaError::UnsortedGrid);
        }
        let values: Vec<f64> = grid.iter().map(|&u| self.eval(u)).collect();
        let positive = values.iter().all(|&v| v > 0.0);
        let increasing = values.windows(2).all(|w| w[1] >= w[0]);
        let g0 = self.taylor_at_zero();

        let psi = |u: f64| self.odd_part(u) / (self.even_part(u) + kappa);
        let positive_part: Vec<f64> = grid.iter().copied().filter(|&u| u > 0.0).collect();
        let inflections = count_inflections(&positive_part, psi);

        Ok(AssumptionReport {
            positive,
            increasing,
            gamma0_nonzero: g0[0] != 0.0,
            gamma1_nonzero: g0[1] != 0.0,
            gamma2_nonneg: g0[2] >= 0.0,
            inflection_count_ok: inflections <= 1,
        })
    }
}

/// Sign changes of centred second differences of `f` on `grid`, ignoring
/// values inside the dead-band.
fn count_inflections(grid: &[f64], f: impl Fn(f64) -> f64) -> usize {
    if grid.len() < 3 {
        return 0;
    }
    let values: Vec<f64> = grid.iter().map(|&u| f(u)).collect();
    let mut last_sign = 0i8;
    let mut changes = 0;
    for i in 1..grid.len() - 1 {
        let (h0, h1) = (grid[i] - grid[i - 1], grid[i + 1] - grid[i]);
        // non-uniform three-point second difference
        let d2 = 2.0
            * (h0 * values[i + 1] - (h0 + h1) * values[i] + h1 * values[i - 1])
            / (h0 * h1 * (h0 + h1));
        let scaled = d2 * h0 * h1;
        if scaled.abs() <= INFLECTION_DEAD_BAND {
            continue;
        }
        let sign = if scaled > 0.0 { 1 } else { -1 };
        if last_sign != 0 && sign != last_sign {
            changes += 1;
        }
        last_sign = sign;
    }
    changes
}

/// Outcome of [`GammaModel::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub positive: bool,
    pub increasing: bool,
    pub gamma0_nonzero: bool,
    pub gamma1_nonzero: bool,
    pub gamma2_nonneg: bool,
    pub inflection_count_ok: bool,
}

impl AssumptionReport {
    /// All flags set: the model may be used for the phase analysis.
    pub fn admissible(&self) -> bool {
        self.positive
            && self.increasing
            && self.gamma0_nonzero
            && self.gamma1_nonzero
            && self.gamma2_nonneg
            && self.inflection_count_ok
    }
}

fn taylor_derivative(c: &[f64; MAX_ORDER + 1], k: usize, u: f64) -> f64 {
    if k > MAX_ORDER {
        return 0.0;
    }
    // Σ_{j≥k} c_j u^{j-k} / (j-k)!
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut fact = 1.0;
    for (i, &cj) in c[k..].iter().enumerate() {
        if i > 0 {
            power *= u;
            fact *= i as f64;
        }
        sum += cj * power / fact;
    }
    sum
}

/// `d^k/du^k tanh(u)` as a polynomial in `t = tanh(u)`, using
/// `P_{k+1}(t) = P_k'(t) (1 - t²)` with `P_0(t) = t`.
fn tanh_derivative(k: usize, t: f64) -> f64 {
    let coeffs = tanh_derivative_poly(k);
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn tanh_derivative_poly(k: usize) -> Vec<f64> {
    let mut p = vec![0.0, 1.0];
    for _ in 0..k {
        // derivative in t
        let dp: Vec<f64> = p.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect();
        // multiply by (1 - t²)
        let mut next = vec![0.0; dp.len() + 2];
        for (i, &c) in dp.iter().enumerate() {
            next[i] += c;
            next[i + 2] -= c;
        }
        p = next;
    }
    p
}

/// Serializable description of a rate function, as read from config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaSpec {
    Tanh,
    Exp,
    /// Taylor coefficients `c_0..c_6` of `Γ(u) = Σ c_k u^k / k!`.
    Polynomial { coefficients: Vec<f64> },
}

impl GammaSpec {
    pub fn build(&self) -> Result<GammaModel, GammaError> {
        match self {
            GammaSpec::Tanh => Ok(GammaModel::tanh_plus_one()),
            GammaSpec::Exp => Ok(GammaModel::exp()),
            GammaSpec::Polynomial { coefficients } => GammaModel::from_taylor(coefficients),
        }
    }
}
