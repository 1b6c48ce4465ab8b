//! Simulation and numerical analysis for the dissipative Curie–Weiss model.
//!
//! The crate covers four layers:
//!
//! * [`microsim`]: exact finite-n jump-process simulation and Monte Carlo
//!   ensembles.
//! * [`macroflow`]: the infinite-volume ODE, its Liénard form and periodic
//!   orbit detection.
//! * [`phases`]: critical curves and phase classification in the
//!   (κ, β) plane.
//! * [`moddev`]: moderate-deviation Hamiltonians, Lagrangians and action
//!   functionals.

pub mod gamma;
pub mod io;
pub mod macroflow;
pub mod microsim;
pub mod moddev;
pub mod ode;
pub mod phases;
pub mod quad;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use gamma::{AssumptionReport, GammaError, GammaKind, GammaModel, GammaSpec};
pub use macroflow::{CycleResult, LienardState, MacroError, MacroState, MacroTrajectory, Stability};
pub use microsim::{
    EnsembleRecord, ExitEstimate, MicroState, Observable, SimConfig, SimError, Trajectory,
};
pub use phases::{CriticalCurves, PhaseClassification, PhaseError, PhaseLabel};
pub use moddev::{KConstants, ModDevError, PolarPoint, Regime, RegimeSpec};
