//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! States are fixed-size arrays so the planar systems used throughout the
//! crate stay on the stack.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("output grid must be sorted and start at the initial time")]
    BadGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step length; `f64::INFINITY` for none.
    pub h_max: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    /// Relative and absolute tolerance both set to `tol`.
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }

    pub fn h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// One accepted step together with its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    coeff: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    /// Fourth-order continuous extension evaluated at `t ∈ [t0, t1]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.coeff;
        std::array::from_fn(|i| r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i]))))
    }
}

/// Whether integration should continue after a step callback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, handing every accepted
/// step to `on_step`. Returns the final time and state (earlier than `t_end`
/// if the callback stopped the run).
pub fn integrate_steps<const N: usize, F, C>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    mut on_step: C,
) -> Result<(f64, [f64; N]), OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    C: FnMut(&DenseStep<N>) -> Flow,
{
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(OdeError::NonFinite(t0));
    }
    if t_end <= t0 {
        return Ok((t0, y0));
    }
    let span = t_end - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&f, t, &y, &k1, opts).min(opts.h_max).min(span);
    let mut steps = 0usize;

    loop {
        if steps >= opts.max_steps {
            return Err(OdeError::TooManySteps(opts.max_steps));
        }
        steps += 1;
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(OdeError::StepSizeUnderflow { t, h });
        }

        let stage = |a: &[(f64, &[f64; N])]| -> [f64; N] {
            std::array::from_fn(|i| y[i] + h * a.iter().map(|(c, k)| c * k[i]).sum::<f64>())
        };
        let k2 = f(t + C2 * h, &stage(&[(A21, &k1)]));
        let k3 = f(t + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = stage(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();
        if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
            h *= FAC_MIN;
            continue;
        }

        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let coeff = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                }),
            ];
            let t_new = if last { t_end } else { t + h };
            let step = DenseStep {
                t0: t,
                t1: t_new,
                y0: y,
                y1: y_new,
                coeff,
            };
            t = t_new;
            y = y_new;
            k1 = k7;
            if on_step(&step) == Flow::Stop || last {
                return Ok((t, y));
            }
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
        }
    }
}

fn initial_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], opts: &OdeOptions) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let scale: [f64; N] = std::array::from_fn(|i| opts.atol + opts.rtol * y[i].abs());
    let rms = |v: &[f64; N]| (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d0 = rms(y);
    let d1 = rms(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: [f64; N] = std::array::from_fn(|i| y[i] + h0 * k1[i]);
    let k2 = f(t + h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| k2[i] - k1[i]);
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Integrates and samples the dense output at every time in `grid`.
///
/// `grid[0]` is the initial time.
pub fn integrate_grid<const N: usize, F>(
    f: F,
    y0: [f64; N],
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[f64; N]>, OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let Some(&t0) = grid.first() else {
        return Ok(Vec::new());
    };
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(OdeError::BadGrid);
    }
    let t_end = *grid.last().unwrap();
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    let mut next = 1;
    integrate_steps(f, t0, y0, t_end, opts, |step| {
        while next < grid.len() && grid[next] <= step.t1 {
            out.push(if grid[next] == step.t1 { step.y1 } else { step.eval(grid[next]) });
            next += 1;
        }
        Flow::Continue
    })?;
    while out.len() < grid.len() {
        out.push(*out.last().unwrap());
    }
    Ok(out)
}

/// Evenly spaced grid `t0, t0 + dt, ...`, closed with `t_end` when the last
/// multiple falls short.
pub fn uniform_grid(t0: f64, t_end: f64, dt: f64) -> Vec<f64> {
    let count = ((t_end - t0) / dt + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| t0 + i as f64 * dt).collect();
    if t_end - grid[count] > 1e-9 * dt {
        grid.push(t_end);
    } else {
        grid[count] = t_end;
    }
    grid
}
