//! End-to-end acceptance checks. Prints one PASS/FAIL line per check and
//! exits non-zero if any fails. Pass check numbers as arguments to run a
//! subset.

use cwdiss_core::macroflow::{self, find_cycles, return_map, CycleSearch, MacroState, ReturnOptions, Stability};
use cwdiss_core::microsim::{
    estimate_exit_probability, run_ensemble, simulate_observed, EnsembleOptions, ExitQuery, MicroState, Observable,
    SimConfig,
};
use cwdiss_core::moddev::{
    action, averaged_hamiltonian, containment_check, first_order_residual, hamiltonian_flow, lagrangian,
    legendre_dual, pre_averaged_hamiltonian, second_order_residual, ExpansionOrder, RadialJet, RegimeSpec,
    SampledPath,
};
use cwdiss_core::ode::Flow;
use cwdiss_core::phases::{self, PhaseLabel};
use cwdiss_core::GammaModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tanh() -> GammaModel {
    GammaModel::tanh_plus_one()
}

fn exp() -> GammaModel {
    GammaModel::exp()
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

fn hopf_line() -> Outcome {
    let for_exp = phases::beta_c(2.0, &exp()).map_err(|e| e.to_string())?;
    let for_tanh = phases::beta_c(2.0, &tanh()).map_err(|e| e.to_string())?;
    ensure(
        (for_exp - 2.0).abs() <= 1e-12 && (for_tanh - 2.0).abs() <= 1e-12,
        format!("beta_c(2) = {for_exp} (exp), {for_tanh} (tanh)"),
    )
}

fn tri_critical_point() -> Outcome {
    let g = exp();
    let kappa = phases::kappa_tc(&g).ok_or("no tri-critical point")?;
    let beta = phases::beta_tc(&g).ok_or("no tri-critical point")?;
    let sigma = phases::lyapunov_number(kappa, &g);
    let drift = RegimeSpec::critical_line(beta, &g).map_err(|e| e.to_string())?.drift;
    ensure(
        (kappa - 4.0).abs() <= 1e-12 && (beta - 3.0).abs() <= 1e-12 && sigma.abs() <= 1e-10 && drift == 0.0,
        format!("(kappa_tc, beta_tc) = ({kappa}, {beta}), sigma_L = {sigma:e}, critical drift = {drift}"),
    )
}

fn hopf_scenarios() -> Outcome {
    let tanh_sigmas: Vec<f64> = [0.5, 1.0, 2.0, 5.0].iter().map(|&k| phases::lyapunov_number(k, &tanh())).collect();
    let exp_sigma = phases::lyapunov_number(6.0, &exp());
    ensure(
        tanh_sigmas.iter().all(|&s| s < 0.0) && exp_sigma > 0.0,
        format!("tanh sigma_L = {tanh_sigmas:.4?}, exp sigma_L(6) = {exp_sigma:.4}"),
    )
}

fn phase_diagram() -> Outcome {
    let search = CycleSearch::default();
    let kappas = linspace(0.2, 3.0, 30);
    let betas = linspace(0.2, 3.0, 30);
    let cells = phases::scan_grid(&kappas, &betas, &tanh(), &search).map_err(|e| e.to_string())?;
    let misplaced = cells
        .iter()
        .filter(|c| c.label != if c.beta < c.beta_c { PhaseLabel::Fp } else { PhaseLabel::Lc })
        .count();
    let fp = cells.iter().filter(|c| c.label == PhaseLabel::Fp).count();
    let lc = cells.iter().filter(|c| c.label == PhaseLabel::Lc).count();

    let kappas = linspace(0.5, 8.0, 30);
    let betas = linspace(0.5, 6.0, 30);
    let cells = phases::scan_grid(&kappas, &betas, &exp(), &search).map_err(|e| e.to_string())?;
    let mixed: Vec<_> = cells.iter().filter(|c| c.label == PhaseLabel::FpPlusLc).collect();
    let mixed_ok = !mixed.is_empty() && mixed.iter().all(|c| c.kappa > 4.0 && c.beta < c.beta_c);

    let delta = phases::beta_delta(6.0, &exp()).map_err(|e| e.to_string())?.ok_or("beta_delta(6) missing")?;
    let star = phases::beta_star(6.0, &exp(), &search).map_err(|e| e.to_string())?;
    ensure(
        misplaced == 0 && fp > 0 && lc > 0 && mixed_ok && delta <= star && star <= 4.0,
        format!(
            "tanh: {fp} FP + {lc} LC, {misplaced} off the Hopf split; exp: {} FP+LC cells; beta_delta(6) = {delta:.6}, beta_star(6) = {star:.4}",
            mixed.len()
        ),
    )
}

/// Iterates the return map until it stops moving.
fn iterate_return(start: f64, beta: f64, kappa: f64, g: &GammaModel) -> Result<f64, String> {
    let opts = ReturnOptions::default();
    let mut r = start;
    for _ in 0..2000 {
        let next = return_map(r, beta, kappa, g, &opts).map_err(|e| e.to_string())?.radius;
        if (next - r).abs() <= 1e-12 {
            return Ok(next);
        }
        r = next;
    }
    Err(format!("return map iteration from {start} did not settle"))
}

/// Radius of the single attracting cycle. Close to the Hopf line the slope
/// approaches 1 and the cycle may be labelled semistable.
fn amplitude(beta: f64, kappa: f64, g: &GammaModel) -> Result<f64, String> {
    let cycles = find_cycles(beta, kappa, g, &CycleSearch::default());
    match cycles.as_slice() {
        [c] if c.stability != Stability::Unstable && c.floquet_slope < 1.0 => Ok(c.radius_on_section),
        other => Err(format!("beta = {beta}: expected one attracting cycle, found {other:?}")),
    }
}

fn limit_cycle() -> Outcome {
    let g = tanh();
    let cycles = find_cycles(2.0, 1.0, &g, &CycleSearch::default());
    let from_small = iterate_return(0.01, 2.0, 1.0, &g)?;
    let from_large = iterate_return(0.8, 2.0, 1.0, &g)?;
    let unique = cycles.len() == 1 && (cycles[0].radius_on_section - from_small).abs() <= 1e-4;

    let betas = [1.52, 1.55, 1.6, 1.65, 1.7, 1.75, 1.8];
    let amps = betas.iter().map(|&b| amplitude(b, 1.0, &g)).collect::<Result<Vec<_>, _>>()?;
    let increasing = amps.windows(2).all(|w| w[1] > w[0]);
    let near = [1.5 + 1e-2, 1.5 + 1e-3, 1.5 + 1e-4]
        .iter()
        .map(|&b| amplitude(b, 1.0, &g))
        .collect::<Result<Vec<_>, _>>()?;
    let shrinking = near.windows(2).all(|w| w[1] < w[0]) && near[2] < 0.05;
    ensure(
        unique && (from_small - from_large).abs() <= 1e-4 && increasing && shrinking,
        format!(
            "fixed radius {from_small:.8} / {from_large:.8} ({} cycle); amplitudes {amps:.4?}; near Hopf {near:.5?}",
            cycles.len()
        ),
    )
}

fn law_of_large_numbers() -> Outcome {
    let g = tanh();
    let cfg = SimConfig { n: 20_000, beta: 1.0, kappa: 2.0, t_max: 5.0, record_dt: 0.01, seed: 2024, replica_index: 0 };
    let init = MicroState::new(0.5, 0.2);
    let paths = run_ensemble(&cfg, &g, &init, &EnsembleOptions::new(20, 0)).map_err(|e| e.to_string())?;
    let ode = macroflow::integrate_on(MacroState::new(0.5, 0.2), 1.0, 2.0, &g, &paths[0].times, 1e-10)
        .map_err(|e| e.to_string())?;
    let sups: Vec<f64> = paths
        .iter()
        .map(|p| p.m.iter().zip(&ode.m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    let close = sups.iter().filter(|&&s| s <= 0.05).count();
    let worst = sups.iter().cloned().fold(0.0, f64::max);
    ensure(close >= 16, format!("{close}/20 replicas within 0.05, worst sup deviation {worst:.4}"))
}

fn jump_invariant() -> Outcome {
    let g = exp();
    let cfg = SimConfig { n: 10_000, beta: 1.7, kappa: 1.3, t_max: 1e4, record_dt: 1.0, seed: 99, replica_index: 0 };
    let mut seen = 0u64;
    let stats = simulate_observed(&cfg, &g, &MicroState::new(0.2, 0.1), |_| {
        seen += 1;
        if seen >= 1_000_000 {
            Flow::Stop
        } else {
            Flow::Continue
        }
    })
    .map_err(|e| e.to_string())?;
    ensure(
        stats.jumps >= 1_000_000 && stats.max_invariant_step <= 1e-12,
        format!("{} jumps, largest change of beta*m - zeta across a jump {:e}", stats.jumps, stats.max_invariant_step),
    )
}

/// The worked closed forms: the critical-line cost with the drift
/// `Γ(0)²(3Γ''(0) − βΓ'''(0))/4` and, at the tri-critical point, the cost
/// with prefactor `Γ(0)Γ'''(0)²/(144Γ''(0)²)`.
fn critical_line_closed_form(beta: f64, g: &GammaModel, x: f64, v: f64) -> f64 {
    let d = g.taylor_at_zero();
    let pull = d[0] * d[0] / 4.0 * (3.0 * d[2] - beta * d[3]);
    d[0] / (16.0 * beta * beta * x) * (v + pull * x * x).powi(2)
}

fn tri_critical_closed_form(g: &GammaModel, x: f64, v: f64) -> f64 {
    let d = g.taylor_at_zero();
    let pull = d[0].powi(4) / (96.0 * d[3]) * (5.0 * d[4] * d[3] - 3.0 * d[5] * d[2]);
    d[0] * d[3] * d[3] / (144.0 * d[2] * d[2] * x) * (v + pull * x.powi(3)).powi(2)
}

fn legendre_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut track = |a: f64, b: f64| worst = worst.max((a - b).abs());
    for g in [tanh(), exp()] {
        for _ in 0..100 {
            let beta = rng.random_range(1.2..3.0);
            let x = rng.random_range(0.01..5.0);
            let v = rng.random_range(-5.0..5.0);
            let spec = RegimeSpec::critical_line(beta, &g).map_err(|e| e.to_string())?;
            let numeric = legendre_dual(&spec, &[x], &[v]).map_err(|e| e.to_string())?;
            track(numeric, lagrangian(&spec, &[x], &[v]).map_err(|e| e.to_string())?);
            track(numeric, critical_line_closed_form(beta, &g, x, v));
        }
    }
    for _ in 0..100 {
        let beta = rng.random_range(1.2..3.0);
        let x = rng.random_range(0.01..5.0);
        let v = rng.random_range(-5.0..5.0);
        let tanh_spec = RegimeSpec::critical_line(beta, &tanh()).map_err(|e| e.to_string())?;
        track(
            legendre_dual(&tanh_spec, &[x], &[v]).map_err(|e| e.to_string())?,
            (v + beta / 2.0 * x * x).powi(2) / (16.0 * beta * beta * x),
        );
        let exp_spec = RegimeSpec::critical_line(beta, &exp()).map_err(|e| e.to_string())?;
        track(
            legendre_dual(&exp_spec, &[x], &[v]).map_err(|e| e.to_string())?,
            (v + (3.0 - beta) / 4.0 * x * x).powi(2) / (16.0 * beta * beta * x),
        );
    }
    let tri = RegimeSpec::tri_critical(&exp()).map_err(|e| e.to_string())?;
    for _ in 0..100 {
        let x = rng.random_range(0.01..5.0);
        let v = rng.random_range(-5.0..5.0);
        let numeric = legendre_dual(&tri, &[x], &[v]).map_err(|e| e.to_string())?;
        track(numeric, lagrangian(&tri, &[x], &[v]).map_err(|e| e.to_string())?);
        track(numeric, tri_critical_closed_form(&exp(), x, v));
    }
    ensure(worst <= 1e-6, format!("largest |closed form - sup_p| = {worst:e} over 700 points"))
}

fn averaging_identities() -> Outcome {
    let nodes = 512;
    let mean = |f: &dyn Fn(f64) -> f64| (0..nodes).map(|i| f((i as f64 + 0.5) * TAU / nodes as f64)).sum::<f64>() / nodes as f64;
    let mut averaging_gap: f64 = 0.0;
    let cases = [
        (ExpansionOrder::Second, tanh(), RegimeSpec::critical_line(2.0, &tanh()).map_err(|e| e.to_string())?),
        (ExpansionOrder::Second, exp(), RegimeSpec::critical_line(2.0, &exp()).map_err(|e| e.to_string())?),
        (ExpansionOrder::Fourth, exp(), RegimeSpec::tri_critical(&exp()).map_err(|e| e.to_string())?),
    ];
    for (order, g, spec) in &cases {
        for &(r, p) in &[(0.3, 0.7), (1.0, -1.2), (2.5, 0.4)] {
            let quad = mean(&|t| pre_averaged_hamiltonian(t, r, p, *order, spec.beta, g).unwrap());
            averaging_gap = averaging_gap.max((quad - averaged_hamiltonian(r, p, spec)).abs());
        }
    }
    let jet = |r: f64| RadialJet { value: (1.0 + r).ln(), slope: 1.0 / (1.0 + r), curvature: -1.0 / (1.0 + r).powi(2) };
    let (mut first, mut second): (f64, f64) = (0.0, 0.0);
    for r in linspace(0.1, 2.0, 20) {
        for j in 0..64 {
            let theta = TAU * j as f64 / 64.0;
            for g in [tanh(), exp()] {
                first = first.max(first_order_residual(r, theta, jet(r), 2.0, &g).map_err(|e| e.to_string())?.abs());
            }
            second = second.max(second_order_residual(r, theta, jet(r), 3.0, &exp()).map_err(|e| e.to_string())?.abs());
        }
    }
    ensure(
        averaging_gap <= 1e-10 && first <= 1e-8 && second <= 1e-7,
        format!("averaging gap {averaging_gap:e}, first-order residual {first:e}, second-order residual {second:e}"),
    )
}

fn zero_cost_path() -> Outcome {
    let spec = RegimeSpec::critical_line(2.0, &tanh()).map_err(|e| e.to_string())?;
    let drift = spec.drift;
    let path = SampledPath::from_fn(10.0, 10_000, |t| vec![1.0 / (1.0 + drift * t)]);
    let value = action(&spec, &path, |_| 0.0).map_err(|e| e.to_string())?;
    let flow = hamiltonian_flow(&spec, 0.2, 0.005, 5.0, 0.01).map_err(|e| e.to_string())?;
    let energies = flow.energies(&spec);
    let drift = energies.iter().map(|e| (e - energies[0]).abs()).fold(0.0, f64::max);
    ensure(
        (0.0..=1e-10).contains(&value) && drift <= 1e-8,
        format!("relaxation action {value:e}, energy drift {drift:e}"),
    )
}

fn containment() -> Outcome {
    let mut grid = vec![0.0];
    grid.extend((0..=20_000).map(|i| 10f64.powf(-8.0 + 14.0 * i as f64 / 20_000.0)));
    let specs = [
        RegimeSpec::critical_line(2.0, &tanh()).map_err(|e| e.to_string())?,
        RegimeSpec::critical_line(2.0, &exp()).map_err(|e| e.to_string())?,
        RegimeSpec::tri_critical(&exp()).map_err(|e| e.to_string())?,
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for spec in &specs {
        let sup = containment_check(spec, &grid).map_err(|e| e.to_string())?;
        ok &= sup.is_finite() && sup <= spec.diffusion / 4.0 + 1e-9;
        details.push(format!("{}: {sup:.6} <= {:.6}", spec.regime.as_str(), spec.diffusion / 4.0));
    }
    ensure(ok, details.join(", "))
}

fn moderate_deviation_trend() -> Outcome {
    let g = tanh();
    let (delta, horizon) = (0.35, 0.5);
    let mut rates = Vec::new();
    let mut details = Vec::new();
    for (n, replicas) in [(2000u64, 10_000usize), (8000, 20_000), (32_000, 100_000)] {
        let cfg = SimConfig { n, beta: 1.0, kappa: 2.0, t_max: horizon, record_dt: horizon, seed: 77, replica_index: 0 };
        let query = ExitQuery { delta, observable: Observable::AbsM, scaling: (n as f64).powf(0.25), horizon };
        let est = estimate_exit_probability(&cfg, &g, &MicroState::new(0.0, 0.0), &EnsembleOptions::new(replicas, 0), &query)
            .map_err(|e| e.to_string())?;
        if n == 2000 && !(0.01..=0.2).contains(&est.p_hat) {
            return Err(format!("calibration off: p_hat(2000) = {}", est.p_hat));
        }
        let rate = est.rate().map_err(|e| format!("n = {n}: {e}"))?;
        details.push(format!("n={n}: p={:.2e} ({} hits) rate={rate:.4}", est.p_hat, est.hits));
        rates.push(rate);
    }
    let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rates.iter().cloned().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    ensure(lo > 0.0 && spread < 0.3, format!("{}; spread {:.1}%", details.join(", "), 100.0 * spread))
}

struct Check {
    number: usize,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let checks = [
        Check { number: 1, name: "Hopf line at kappa = 2", budget: Duration::from_millis(1), run: hopf_line },
        Check { number: 2, name: "tri-critical point for exp", budget: Duration::from_millis(1), run: tri_critical_point },
        Check { number: 3, name: "super/subcritical Hopf scenarios", budget: Duration::from_millis(1), run: hopf_scenarios },
        Check { number: 4, name: "phase diagram", budget: Duration::from_secs(600), run: phase_diagram },
        Check { number: 5, name: "limit cycle uniqueness and growth", budget: Duration::from_secs(60), run: limit_cycle },
        Check { number: 6, name: "law of large numbers", budget: Duration::from_secs(120), run: law_of_large_numbers },
        Check { number: 7, name: "jump invariant over 10^6 jumps", budget: Duration::from_secs(30), run: jump_invariant },
        Check { number: 8, name: "Legendre duality", budget: Duration::from_secs(10), run: legendre_duality },
        Check { number: 9, name: "averaging and perturbation identities", budget: Duration::from_secs(30), run: averaging_identities },
        Check { number: 10, name: "zero-cost path and energy conservation", budget: Duration::from_secs(5), run: zero_cost_path },
        Check { number: 11, name: "containment function", budget: Duration::from_secs(1), run: containment },
        Check { number: 12, name: "moderate-deviation rate trend", budget: Duration::from_secs(1800), run: moderate_deviation_trend },
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for check in checks.iter().filter(|c| selected.is_empty() || selected.contains(&c.number)) {
        let start = Instant::now();
        let outcome = (check.run)();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= check.budget;
        let (status, detail) = match (&outcome, in_budget) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {:?} budget", check.budget)),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{status} [{:2}] {}: {detail} ({:.3?})", check.number, check.name, elapsed);
    }
    if failures > 0 {
        println!("{failures} acceptance check(s) failed");
        std::process::exit(1);
    }
}
