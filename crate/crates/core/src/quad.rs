//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    ToleranceNotReached { tol: f64, estimate: f64 },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: usize = 50;

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(center));
    }
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite(x2));
        }
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

/// `∫_a^b f(x) dx` to absolute tolerance `abs_tol` by recursive bisection.
///
/// Reversed limits give the negated integral.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, abs_tol).map(|v| -v);
    }
    let mut stack = vec![(a, b, abs_tol, 0usize)];
    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    while let Some((lo, hi, tol, depth)) = stack.pop() {
        let (value, err) = gk15(&f, lo, hi)?;
        if err <= tol || depth >= MAX_DEPTH || (hi - lo) <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            if err > tol {
                worst = worst.max(err);
            }
            total += value;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        stack.push((lo, mid, 0.5 * tol, depth + 1));
        stack.push((mid, hi, 0.5 * tol, depth + 1));
    }
    if worst > abs_tol {
        return Err(QuadError::ToleranceNotReached {
            tol: abs_tol,
            estimate: worst,
        });
    }
    Ok(total)
}

/// Composite trapezoid rule on samples `y` with uniform spacing `h`.
pub fn trapezoid_uniform(y: &[f64], h: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (y[0] + y[n - 1]) + y[1..n - 1].iter().sum::<f64>()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_transcendental() {
        let v = integrate(|x: f64| 1.0 / (2.0 * x.cosh()), 0.0, 3.0, 1e-12).unwrap();
        let exact = 3.0f64.sinh().atan() / 2.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_negate() {
        let a = integrate(f64::sin, 0.0, 1.0, 1e-13).unwrap();
        let b = integrate(f64::sin, 1.0, 0.0, 1e-13).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn peaked_integrand_adapts() {
        let v = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn non_finite_reported() {
        assert!(matches!(
            integrate(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, 1e-10),
            Err(QuadError::NonFinite(_))
        ));
    }

    #[test]
    fn trapezoid_linear_is_exact() {
        let h = 0.1;
        let y: Vec<f64> = (0..11).map(|i| 2.0 * i as f64 * h + 1.0).collect();
        assert!((trapezoid_uniform(&y, h) - 2.0).abs() < 1e-14);
    }
}
