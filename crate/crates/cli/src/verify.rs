//! Built-in invariant suite: quick checks across every module that a build
//! is numerically sound.

use crate::error::CliError;
use crate::Context;
use cwdiss_core::macroflow::{
    find_cycles, from_lienard, integrate, to_lienard, vector_field, CycleSearch, MacroState, Stability,
};
use cwdiss_core::microsim::{run_ensemble, simulate_observed, EnsembleOptions, MicroState, SimConfig};
use cwdiss_core::moddev::{
    action, averaged_hamiltonian, containment_check, first_order_residual, from_polar, hamiltonian_flow, lagrangian,
    legendre_dual, pre_averaged_hamiltonian, rescale_mz, second_order_residual, to_polar, unrescale_mz,
    ExpansionOrder, RadialJet, SampledPath,
};
use cwdiss_core::ode::Flow;
use cwdiss_core::phases::{beta_c, beta_delta, beta_star, beta_tc, kappa_tc, lyapunov_number};
use cwdiss_core::{GammaModel, RegimeSpec};
use std::f64::consts::TAU;
use std::fmt::Display;
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn text<E: Display>(e: E) -> String {
    e.to_string()
}

/// `i`-th point of the van der Corput sequence in `base`, in `[0, 1)`.
fn low_discrepancy(mut i: usize, base: usize) -> f64 {
    let (mut value, mut scale) = (0.0, 1.0);
    while i > 0 {
        scale /= base as f64;
        value += scale * (i % base) as f64;
        i /= base;
    }
    value
}

fn sample(i: usize, base: usize, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * low_discrepancy(i + 1, base)
}

fn builtins() -> [GammaModel; 2] {
    [GammaModel::tanh_plus_one(), GammaModel::exp()]
}

fn gamma_derivatives() -> Outcome {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for g in builtins() {
        for u in [-1.0, 0.0, 0.7] {
            for k in 0..5 {
                let fd = (g.deriv(k, u + h) - g.deriv(k, u - h)) / (2.0 * h);
                worst = worst.max((fd - g.deriv(k + 1, u)).abs() / (1.0 + g.deriv(k + 1, u).abs()));
            }
        }
    }
    ensure(worst <= 1e-6, format!("largest relative finite-difference gap {worst:e}"))
}

fn gamma_admissibility() -> Outcome {
    let rejected = GammaModel::from_taylor(&[1.0, -3.0]).is_err();
    let grid: Vec<f64> = (0..=1000).map(|i| -5.0 + 0.01 * i as f64).collect();
    let builtins_ok = builtins().iter().all(|g| g.validate(&grid, 1.0).is_ok_and(|r| r.admissible()));
    ensure(rejected && builtins_ok, format!("builtins admissible: {builtins_ok}, non-positive polynomial rejected: {rejected}"))
}

fn jump_invariant() -> Outcome {
    let cfg = SimConfig { n: 10_000, beta: 1.7, kappa: 1.3, t_max: 1e4, record_dt: 1.0, seed: 3, replica_index: 0 };
    let mut seen = 0u64;
    let stats = simulate_observed(&cfg, &GammaModel::exp(), &MicroState::new(0.2, 0.1), |_| {
        seen += 1;
        if seen >= 1_000_000 {
            Flow::Stop
        } else {
            Flow::Continue
        }
    })
    .map_err(text)?;
    ensure(
        stats.max_invariant_step <= 1e-12,
        format!("{} jumps, largest change of beta*m - zeta {:e}", stats.jumps, stats.max_invariant_step),
    )
}

fn ensemble_reproducibility() -> Outcome {
    let cfg = SimConfig { n: 500, beta: 1.2, kappa: 1.0, t_max: 1.0, record_dt: 0.1, seed: 5, replica_index: 0 };
    let g = GammaModel::tanh_plus_one();
    let init = MicroState::new(0.2, 0.0);
    let serial = run_ensemble(&cfg, &g, &init, &EnsembleOptions::new(3, 1)).map_err(text)?;
    let threaded = run_ensemble(&cfg, &g, &init, &EnsembleOptions::new(3, 2)).map_err(text)?;
    let on_lattice = serial.iter().flat_map(|p| &p.m).all(|&m| MicroState::new(m, 0.0).up_count(cfg.n).is_some());
    ensure(
        serial == threaded && serial[0] != serial[1] && on_lattice,
        format!(
            "thread-count independent: {}, replicas distinct: {}, on lattice: {on_lattice}",
            serial == threaded,
            serial[0] != serial[1]
        ),
    )
}

fn law_of_large_numbers() -> Outcome {
    let g = GammaModel::tanh_plus_one();
    let cfg = SimConfig { n: 20_000, beta: 1.0, kappa: 2.0, t_max: 5.0, record_dt: 0.01, seed: 1, replica_index: 0 };
    let paths = run_ensemble(&cfg, &g, &MicroState::new(0.5, 0.2), &EnsembleOptions::new(20, 0)).map_err(text)?;
    let ode = integrate(MacroState::new(0.5, 0.2), 1.0, 2.0, &g, 5.0, 0.01, 1e-10).map_err(text)?;
    let sups: Vec<f64> = paths
        .iter()
        .map(|p| p.m.iter().zip(&ode.m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    let close = sups.iter().filter(|&&s| s <= 0.05).count();
    let worst = sups.iter().cloned().fold(0.0, f64::max);
    ensure(close >= 16, format!("{close}/20 replicas within 0.05 of the limit, worst {worst:.4}"))
}

fn vector_field_symmetry() -> Outcome {
    let mut worst: f64 = 0.0;
    for g in builtins() {
        for i in 0..50 {
            let s = MacroState::new(sample(i, 2, -1.0, 1.0), sample(i, 3, -2.0, 2.0));
            let (dm, dz) = vector_field(s, 1.7, 1.1, &g);
            let (dm_neg, dz_neg) = vector_field(MacroState::new(-s.m, -s.zeta), 1.7, 1.1, &g);
            worst = worst.max((dm + dm_neg).abs()).max((dz + dz_neg).abs());
        }
    }
    ensure(worst <= 1e-12, format!("largest |F(-s) + F(s)| {worst:e}"))
}

fn lienard_round_trip() -> Outcome {
    let mut worst: f64 = 0.0;
    for g in builtins() {
        for i in 0..50 {
            let s = MacroState::new(sample(i, 2, -0.9, 0.9), sample(i, 3, -1.5, 1.5));
            let back = from_lienard(to_lienard(s, 2.0, &g).map_err(text)?, 2.0, &g).map_err(text)?;
            worst = worst.max((back.m - s.m).abs()).max((back.zeta - s.zeta).abs());
        }
    }
    ensure(worst <= 1e-10, format!("largest round-trip error {worst:e}"))
}

fn invariant_strip() -> Outcome {
    let path = integrate(MacroState::new(0.95, 1.5), 3.0, 1.0, &GammaModel::exp(), 30.0, 0.05, 1e-10).map_err(text)?;
    let top = path.m.iter().fold(0.0f64, |a, m| a.max(m.abs()));
    ensure(top <= 1.0 + 1e-8, format!("max |m| along the path {top:.6}"))
}

fn unique_limit_cycle() -> Outcome {
    let cycles = find_cycles(2.0, 1.0, &GammaModel::tanh_plus_one(), &CycleSearch::default());
    let ok = cycles.len() == 1 && cycles[0].stability == Stability::Stable;
    let radii: Vec<f64> = cycles.iter().map(|c| c.radius_on_section).collect();
    ensure(ok, format!("{} cycle(s) at radii {radii:.6?}", cycles.len()))
}

fn hopf_line() -> Outcome {
    let values = builtins().iter().map(|g| beta_c(2.0, g)).collect::<Result<Vec<_>, _>>().map_err(text)?;
    ensure(values.iter().all(|b| (b - 2.0).abs() <= 1e-12), format!("beta_c(2) = {values:?}"))
}

fn tri_critical_point() -> Outcome {
    let g = GammaModel::exp();
    let (kappa, beta) = (kappa_tc(&g).ok_or("missing")?, beta_tc(&g).ok_or("missing")?);
    let sigma = lyapunov_number(kappa, &g);
    let tanh_none = kappa_tc(&GammaModel::tanh_plus_one()).is_none();
    ensure(
        (kappa - 4.0).abs() <= 1e-12 && (beta - 3.0).abs() <= 1e-12 && sigma.abs() <= 1e-10 && tanh_none,
        format!("exp: ({kappa}, {beta}), sigma_L = {sigma:e}; tanh has none: {tanh_none}"),
    )
}

fn hopf_scenarios() -> Outcome {
    let tanh: Vec<f64> = [0.5, 1.0, 2.0, 5.0].iter().map(|&k| lyapunov_number(k, &GammaModel::tanh_plus_one())).collect();
    let exp = lyapunov_number(6.0, &GammaModel::exp());
    ensure(tanh.iter().all(|&s| s < 0.0) && exp > 0.0, format!("tanh sigma_L {tanh:.3?}, exp sigma_L(6) = {exp:.3}"))
}

fn coexistence_window() -> Outcome {
    let g = GammaModel::exp();
    let delta = beta_delta(6.0, &g).map_err(text)?.ok_or("beta_delta(6) missing")?;
    let star = beta_star(6.0, &g, &CycleSearch::default()).map_err(text)?;
    let critical = beta_c(6.0, &g).map_err(text)?;
    ensure(
        delta <= star && star <= critical,
        format!("beta_delta = {delta:.6} <= beta_star = {star:.4} <= beta_c = {critical}"),
    )
}

fn regimes() -> Result<Vec<RegimeSpec>, String> {
    let [tanh, exp] = builtins();
    Ok(vec![
        RegimeSpec::critical_line(2.0, &tanh).map_err(text)?,
        RegimeSpec::critical_line(2.0, &exp).map_err(text)?,
        RegimeSpec::tri_critical(&exp).map_err(text)?,
    ])
}

fn legendre_duality() -> Outcome {
    let mut worst: f64 = 0.0;
    for spec in regimes()? {
        for i in 0..40 {
            let (x, v) = (sample(i, 2, 0.01, 5.0), sample(i, 3, -5.0, 5.0));
            let dual = legendre_dual(&spec, &[x], &[v]).map_err(text)?;
            worst = worst.max((dual - lagrangian(&spec, &[x], &[v]).map_err(text)?).abs());
        }
    }
    let sub = RegimeSpec::subcritical(1.0, 2.0, &GammaModel::exp());
    for i in 0..40 {
        let (x, y, vx) = (sample(i, 2, -1.0, 1.0), sample(i, 3, -1.0, 1.0), sample(i, 5, -2.0, 2.0));
        let velocity = [vx, 1.0 * vx - 2.0 * y];
        let dual = legendre_dual(&sub, &[x, y], &velocity).map_err(text)?;
        worst = worst.max((dual - lagrangian(&sub, &[x, y], &velocity).map_err(text)?).abs());
    }
    ensure(worst <= 1e-6, format!("largest |L - sup_p| {worst:e} over 160 points"))
}

fn averaging_identity() -> Outcome {
    let nodes = 256;
    let mut gap: f64 = 0.0;
    let [tanh, exp] = builtins();
    let cases = [(ExpansionOrder::Second, &tanh), (ExpansionOrder::Second, &exp), (ExpansionOrder::Fourth, &exp)];
    for ((order, g), spec) in cases.into_iter().zip(regimes()?) {
        for (r, p) in [(0.3, 0.7), (1.0, -1.2)] {
            let mut sum = 0.0;
            for i in 0..nodes {
                let theta = (i as f64 + 0.5) * TAU / nodes as f64;
                sum += pre_averaged_hamiltonian(theta, r, p, order, spec.beta, g).map_err(text)?;
            }
            gap = gap.max((sum / nodes as f64 - averaged_hamiltonian(r, p, &spec)).abs());
        }
    }
    ensure(gap <= 1e-10, format!("largest quadrature gap {gap:e}"))
}

fn perturbation_residuals() -> Outcome {
    let jet = |r: f64| RadialJet { value: (1.0 + r).ln(), slope: 1.0 / (1.0 + r), curvature: -1.0 / (1.0 + r).powi(2) };
    let (mut first, mut second): (f64, f64) = (0.0, 0.0);
    let exp = GammaModel::exp();
    for i in 0..5 {
        let r = 0.2 + 0.4 * i as f64;
        for j in 0..16 {
            let theta = TAU * j as f64 / 16.0;
            first = first.max(first_order_residual(r, theta, jet(r), 2.0, &exp).map_err(text)?.abs());
            second = second.max(second_order_residual(r, theta, jet(r), 3.0, &exp).map_err(text)?.abs());
        }
    }
    ensure(first <= 1e-8 && second <= 1e-7, format!("first-order {first:e}, second-order {second:e}"))
}

fn zero_cost_path() -> Outcome {
    let spec = RegimeSpec::critical_line(2.0, &GammaModel::tanh_plus_one()).map_err(text)?;
    let path = SampledPath::from_fn(10.0, 10_000, |t| vec![1.0 / (1.0 + spec.drift * t)]);
    let value = action(&spec, &path, |_| 0.0).map_err(text)?;
    ensure((0.0..=1e-10).contains(&value), format!("action {value:e}"))
}

fn energy_conservation() -> Outcome {
    let spec = RegimeSpec::critical_line(2.0, &GammaModel::tanh_plus_one()).map_err(text)?;
    let flow = hamiltonian_flow(&spec, 0.2, 0.005, 5.0, 0.01).map_err(text)?;
    let energies = flow.energies(&spec);
    let drift = energies.iter().map(|v| (v - energies[0]).abs()).fold(0.0, f64::max);
    ensure(drift <= 1e-8, format!("energy drift {drift:e}"))
}

fn containment() -> Outcome {
    let grid: Vec<f64> = (0..=2000).map(|i| 10f64.powf(-6.0 + 10.0 * i as f64 / 2000.0)).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for spec in regimes()? {
        let sup = containment_check(&spec, &grid).map_err(text)?;
        ok &= sup <= spec.diffusion / 4.0 + 1e-9;
        parts.push(format!("{sup:.4} <= {:.4}", spec.diffusion / 4.0));
    }
    ensure(ok, parts.join(", "))
}

fn coordinate_round_trips() -> Outcome {
    let g = GammaModel::exp();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (x, xi) = (sample(i, 2, -3.0, 3.0), sample(i, 3, -3.0, 3.0));
        let (x2, xi2) = from_polar(to_polar(x, xi));
        worst = worst.max((x2 - x).abs()).max((xi2 - xi).abs());
        let (big_m, big_z) = rescale_mz(x / 3.0, xi / 3.0, 7.0, 2.0, &g).map_err(text)?;
        let (m, z) = unrescale_mz(big_m, big_z, 7.0, 2.0, &g).map_err(text)?;
        worst = worst.max((m - x / 3.0).abs()).max((z - xi / 3.0).abs());
    }
    ensure(worst <= 1e-12, format!("largest round-trip error {worst:e}"))
}

const CHECKS: &[(&str, fn() -> Outcome)] = &[
    ("gamma: derivatives", gamma_derivatives),
    ("gamma: admissibility", gamma_admissibility),
    ("microsim: jump invariant", jump_invariant),
    ("microsim: reproducible ensembles", ensemble_reproducibility),
    ("microsim: law of large numbers", law_of_large_numbers),
    ("macroflow: odd vector field", vector_field_symmetry),
    ("macroflow: Lienard round trip", lienard_round_trip),
    ("macroflow: invariant strip", invariant_strip),
    ("macroflow: unique limit cycle", unique_limit_cycle),
    ("phases: Hopf line", hopf_line),
    ("phases: tri-critical point", tri_critical_point),
    ("phases: Hopf scenarios", hopf_scenarios),
    ("phases: coexistence window", coexistence_window),
    ("moddev: Legendre duality", legendre_duality),
    ("moddev: averaging", averaging_identity),
    ("moddev: perturbation residuals", perturbation_residuals),
    ("moddev: zero-cost path", zero_cost_path),
    ("moddev: energy conservation", energy_conservation),
    ("moddev: containment", containment),
    ("moddev: coordinate round trips", coordinate_round_trips),
];

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let mut report = Vec::new();
    let mut failed = 0;
    for (name, check) in CHECKS {
        let start = Instant::now();
        let outcome = ctx.in_pool(check)?;
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        let line = format!("{status} {name}: {detail}");
        println!("{line} ({:.2?})", start.elapsed());
        report.push(line);
    }
    println!("{}/{} checks passed", CHECKS.len() - failed, CHECKS.len());

    let mut out = ctx.outputs()?;
    out.write("verify.txt", |w| report.iter().try_for_each(|l| writeln!(w, "{l}")))?;
    let names: Vec<&str> = CHECKS.iter().map(|(n, _)| *n).collect();
    out.finish("verify", &names, 0)?;
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} verification check(s) failed")));
    }
    Ok(())
}
