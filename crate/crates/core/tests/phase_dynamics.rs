//! Phase labels against long-horizon integrations of the limiting ODE.

use cwdiss_core::macroflow::{integrate, CycleSearch, MacroState};
use cwdiss_core::phases::{classify, PhaseLabel};
use cwdiss_core::GammaModel;

/// Distance from the origin after a long run, and the smallest distance over
/// the final stretch (a cycle keeps it bounded away from zero).
fn long_run(init: (f64, f64), beta: f64, kappa: f64, g: &GammaModel) -> (f64, f64) {
    let tr = integrate(MacroState::new(init.0, init.1), beta, kappa, g, 400.0, 0.05, 1e-10).unwrap();
    let tail = tr.m.len() - 400;
    let radius = |i: usize| tr.m[i].hypot(tr.zeta[i]);
    let last = radius(tr.m.len() - 1);
    let floor = (tail..tr.m.len()).map(radius).fold(f64::INFINITY, f64::min);
    (last, floor)
}

#[test]
fn fixed_point_phase_relaxes() {
    let g = GammaModel::tanh_plus_one();
    assert_eq!(classify(1.0, 1.0, &g, &CycleSearch::default()).unwrap().label, PhaseLabel::Fp);
    for init in [(0.05, 0.0), (0.5, 0.3), (0.95, -0.5)] {
        assert!(long_run(init, 1.0, 1.0, &g).0 < 1e-6);
    }
}

#[test]
fn cycle_phase_oscillates_from_every_start() {
    let g = GammaModel::tanh_plus_one();
    assert_eq!(classify(2.0, 1.0, &g, &CycleSearch::default()).unwrap().label, PhaseLabel::Lc);
    for init in [(0.01, 0.0), (0.5, 0.3), (0.95, -0.5)] {
        assert!(long_run(init, 2.0, 1.0, &g).1 > 0.05);
    }
}

#[test]
fn coexistence_phase_is_bistable() {
    let g = GammaModel::exp();
    let c = classify(3.9, 6.0, &g, &CycleSearch::default()).unwrap();
    assert_eq!(c.label, PhaseLabel::FpPlusLc);
    // The unstable cycle separates the two basins.
    assert!(long_run((0.02, 0.0), 3.9, 6.0, &g).0 < 1e-6);
    assert!(long_run((0.9, 0.0), 3.9, 6.0, &g).1 > 0.05);
}
