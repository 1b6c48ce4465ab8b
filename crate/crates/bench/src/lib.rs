//! Fixtures shared by the benchmarks in `benches/`.

use cwdiss_core::microsim::{MicroState, SimConfig};
use cwdiss_core::{GammaModel, RegimeSpec};

/// High-temperature settings of the law-of-large-numbers experiments.
pub fn relaxing_config(n: u64, t_max: f64) -> SimConfig {
    SimConfig { n, beta: 1.0, kappa: 2.0, t_max, record_dt: 0.01, seed: 1, replica_index: 0 }
}

pub fn relaxing_init() -> MicroState {
    MicroState::new(0.5, 0.2)
}

/// Critical line of `1 + tanh` at `β = 2`.
pub fn tanh_critical() -> RegimeSpec {
    RegimeSpec::critical_line(2.0, &GammaModel::tanh_plus_one()).expect("tanh is critical at beta = 2")
}

/// Tri-critical point of `exp`.
pub fn exp_tri_critical() -> RegimeSpec {
    RegimeSpec::tri_critical(&GammaModel::exp()).expect("exp has a tri-critical point")
}
