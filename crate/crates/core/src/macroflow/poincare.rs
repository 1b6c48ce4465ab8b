//! Return map on the half-line `{ζ = 0, m > 0}` and cycle search.
//!
//! On that half-line `ζ̇ = −2βΓ(0)·m < 0`, so the flow crosses it
//! transversally and always from `ζ > 0` to `ζ < 0`.

use super::{field_array, vector_field, MacroError, MacroState};
use crate::gamma::GammaModel;
use crate::ode::{integrate_steps, DenseStep, Flow, OdeOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const EVENT_TOL: f64 = 1e-10;
const BISECTION_ITERS: usize = 200;
/// Trajectories this close to the origin are treated as captured by it.
const CAPTURE_RADIUS: f64 = 1e-8;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Time after which the search reports `NoReturn`.
    pub t_cap: f64,
    pub h_max: f64,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            t_cap: 500.0,
            h_max: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnPoint {
    pub radius: f64,
    /// Time of flight back to the section.
    pub period: f64,
}

/// Integrates from `(m, ζ) = (radius, 0)` to the next crossing of the
/// section and returns the crossing's `m`.
pub fn return_map(
    radius: f64,
    beta: f64,
    kappa: f64,
    gamma: &GammaModel,
    opts: &ReturnOptions,
) -> Result<ReturnPoint, MacroError> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(MacroError::InvalidRadius(radius));
    }
    let ode = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_max: opts.h_max,
        max_steps: 50_000_000,
    };
    let field = field_array(beta, kappa, gamma);
    let mut found = None;
    let mut captured = false;
    integrate_steps(&field, 0.0, [radius, 0.0], opts.t_cap, &ode, |step| {
        if step.y0[1] > 0.0 && step.y1[1] <= 0.0 {
            let (t, y) = locate_crossing(step);
            let (_, dz) = vector_field(MacroState::new(y[0], 0.0), beta, kappa, gamma);
            assert!(y[0] > 0.0 && dz < 0.0, "non-transversal section crossing at m = {}", y[0]);
            found = Some(ReturnPoint { radius: y[0], period: t });
            return Flow::Stop;
        }
        if step.y1[0].hypot(step.y1[1]) < CAPTURE_RADIUS * radius.max(1e-3) {
            captured = true;
            return Flow::Stop;
        }
        Flow::Continue
    })?;
    found.ok_or(MacroError::NoReturn {
        radius,
        t_cap: if captured { 0.0 } else { opts.t_cap },
    })
}

fn locate_crossing(step: &DenseStep<2>) -> (f64, [f64; 2]) {
    let (mut lo, mut hi) = (step.t0, step.t1);
    let mut best = (step.t1, step.y1);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let y = step.eval(mid);
        best = (mid, y);
        if y[1] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if y[1].abs() <= EVENT_TOL * 1e-4 {
            break;
        }
    }
    debug_assert!(best.1[1].abs() <= EVENT_TOL);
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
    Semistable,
}

impl Stability {
    pub fn from_slope(slope: f64, band: f64) -> Self {
        if slope.abs() < 1.0 - band {
            Self::Stable
        } else if slope.abs() > 1.0 + band {
            Self::Unstable
        } else {
            Self::Semistable
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    pub found: bool,
    pub radius_on_section: f64,
    pub period: f64,
    pub stability: Stability,
    /// Derivative of the return map at the cycle.
    pub floquet_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSearch {
    pub radius_grid: Vec<f64>,
    pub ret: ReturnOptions,
    /// Relative step of the central-difference slope.
    pub slope_step: f64,
    /// Half-width of the semistable band around slope 1.
    pub semistable_band: f64,
    /// Extremum of `P(r) − r` below which a touching pair is merged into one
    /// semistable cycle.
    pub tangency_tol: f64,
}

impl Default for CycleSearch {
    fn default() -> Self {
        Self {
            radius_grid: default_radius_grid(),
            ret: ReturnOptions::default(),
            slope_step: 1e-4,
            semistable_band: 1e-3,
            tangency_tol: 1e-10,
        }
    }
}

/// Log-spaced radii from `10⁻³` to `0.999`. On the section `m ∈ (0, 1]`,
/// so larger radii do not exist.
pub fn default_radius_grid() -> Vec<f64> {
    log_grid(1e-3, 0.999, 48)
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// All fixed points of the return map within the grid range, in increasing
/// radius.
///
/// Roots are bracketed by sign changes of `P(r) − r` on the grid. Pairs of
/// roots that fall between two grid points are caught by refining every
/// local extremum of `P(r) − r` that approaches zero.
pub fn find_cycles(beta: f64, kappa: f64, gamma: &GammaModel, search: &CycleSearch) -> Vec<CycleResult> {
    let grid = &search.radius_grid;
    let gap = |r: f64| return_map(r, beta, kappa, gamma, &search.ret).ok().map(|p| p.radius - r);
    let values: Vec<Option<f64>> = grid.par_iter().map(|&r| gap(r)).collect();

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..grid.len().saturating_sub(1) {
        let (Some(g0), Some(g1)) = (values[i], values[i + 1]) else { continue };
        if g0 == 0.0 {
            roots.push(grid[i]);
        } else if g0 * g1 < 0.0 {
            if let Some(r) = bracketed_root(&gap, grid[i], g0, grid[i + 1], g1) {
                roots.push(r);
            }
        }
    }
    if let (Some(r), Some(Some(g))) = (grid.last(), values.last()) {
        if *g == 0.0 {
            roots.push(*r);
        }
    }

    let mut tangencies = Vec::new();
    for i in 1..grid.len().saturating_sub(1) {
        let (Some(a), Some(b), Some(c)) = (values[i - 1], values[i], values[i + 1]) else { continue };
        let same_sign = (a > 0.0 && b > 0.0 && c > 0.0) || (a < 0.0 && b < 0.0 && c < 0.0);
        if !same_sign || b.abs() > a.abs() || b.abs() > c.abs() {
            continue;
        }
        let sign = b.signum();
        // Minimise sign·g, i.e. push g toward (and possibly past) zero.
        let Some((r_ext, g_ext)) = golden_min(|r| gap(r).map(|g| sign * g), grid[i - 1], grid[i + 1]) else {
            continue;
        };
        let g_ext = sign * g_ext;
        if g_ext.abs() <= search.tangency_tol {
            tangencies.push(r_ext);
        } else if g_ext * sign < 0.0 {
            if let Some(r) = bracketed_root(&gap, grid[i - 1], a, r_ext, g_ext) {
                roots.push(r);
            }
            if let Some(r) = bracketed_root(&gap, r_ext, g_ext, grid[i + 1], c) {
                roots.push(r);
            }
        }
    }

    let mut cycles: Vec<CycleResult> = roots
        .iter()
        .filter_map(|&r| characterize(r, beta, kappa, gamma, search, None))
        .collect();
    cycles.extend(
        tangencies
            .iter()
            .filter_map(|&r| characterize(r, beta, kappa, gamma, search, Some(Stability::Semistable))),
    );
    cycles.sort_by(|a, b| a.radius_on_section.total_cmp(&b.radius_on_section));
    cycles.dedup_by(|a, b| (a.radius_on_section - b.radius_on_section).abs() < 1e-9);
    cycles
}

fn characterize(
    radius: f64,
    beta: f64,
    kappa: f64,
    gamma: &GammaModel,
    search: &CycleSearch,
    forced: Option<Stability>,
) -> Option<CycleResult> {
    let ret = return_map(radius, beta, kappa, gamma, &search.ret).ok()?;
    let h = search.slope_step * radius;
    let up = return_map((radius + h).min(1.0), beta, kappa, gamma, &search.ret).ok()?;
    let down = return_map(radius - h, beta, kappa, gamma, &search.ret).ok()?;
    let slope = (up.radius - down.radius) / ((radius + h).min(1.0) - (radius - h));
    Some(CycleResult {
        found: true,
        radius_on_section: radius,
        period: ret.period,
        stability: forced.unwrap_or_else(|| Stability::from_slope(slope, search.semistable_band)),
        floquet_slope: slope,
    })
}

/// Illinois-modified regula falsi on a sign-changing bracket.
fn bracketed_root(f: &impl Fn(f64) -> Option<f64>, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64) -> Option<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() < 1e-13 * c.max(1e-3) {
            return Some(c);
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            side = 0;
        } else {
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        b = c;
        fb = fc;
        if fc.abs() < 1e-15 {
            return Some(c);
        }
    }
    Some(b)
}

/// Golden-section minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> Option<f64>, mut a: f64, mut b: f64) -> Option<(f64, f64)> {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..80 {
        if (b - a).abs() < 1e-9 * b.abs() {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2)?;
        }
        if f1.min(f2) < 0.0 {
            break;
        }
    }
    Some(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}
