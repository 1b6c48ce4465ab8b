use crate::config::{self, GammaArgs, ObservableChoice, RegimeChoice};
use crate::error::CliError;
use crate::Context;
use clap::Args;
use cwdiss_core::io::{write_ensemble_csv, write_json, write_tabulation_csv, ActionReport};
use cwdiss_core::microsim::{estimate_exit_probability, snap_to_lattice, EnsembleOptions, ExitQuery, MicroState, SimConfig};
use cwdiss_core::moddev::{action, lagrangian, SampledPath};
use cwdiss_core::phases::beta_c;
use cwdiss_core::{GammaModel, GammaSpec, Regime, RegimeSpec};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Relative spread of time steps tolerated in a path file.
const STEP_TOL: f64 = 1e-9;

#[derive(Debug, Args)]
pub struct MdpArgs {
    #[command(flatten)]
    gamma: GammaArgs,
    #[arg(long, value_enum)]
    regime: Option<RegimeChoice>,
    /// Required except at the tri-critical point, where it is fixed by the
    /// rate function.
    #[arg(long)]
    beta: Option<f64>,
    /// Subcritical regime only.
    #[arg(long)]
    kappa: Option<f64>,
    /// `zero_cost`, `constant`, or a CSV file with header `t,x` or `t,x,y`
    /// on a uniform time grid (default zero_cost, or constant when
    /// subcritical).
    #[arg(long)]
    path: Option<String>,
    /// Starting point of generated paths (default 1).
    #[arg(long)]
    x0: Option<f64>,
    /// Length of generated paths (default 10).
    #[arg(long)]
    tmax: Option<f64>,
    /// Sample count of generated paths (default 10000).
    #[arg(long)]
    points: Option<usize>,
    /// Write a table of the Lagrangian over (x, v).
    #[arg(long)]
    tabulate: bool,
    /// Estimate the exit probability of the finite-n process.
    #[arg(long)]
    exit: bool,
    /// Number of spins for the exit estimate.
    #[arg(long)]
    n: Option<u64>,
    /// Replicas for the exit estimate (default 1000).
    #[arg(long)]
    replicas: Option<usize>,
    /// Exit threshold on the scaled observable (default 0.35).
    #[arg(long)]
    delta: Option<f64>,
    /// Time horizon of the exit estimate (default 0.5).
    #[arg(long)]
    horizon: Option<f64>,
    /// Observable monitored for the exit (default abs-m).
    #[arg(long, value_enum)]
    observable: Option<ObservableChoice>,
    /// Scaling `b_n = n^e` (default e = 0.25).
    #[arg(long)]
    scaling_exponent: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
struct ExitRun {
    n: u64,
    replicas: usize,
    delta: f64,
    horizon: f64,
    observable: ObservableChoice,
    scaling_exponent: f64,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct MdpRun {
    gamma: GammaSpec,
    regime: RegimeChoice,
    beta: f64,
    kappa: f64,
    path: String,
    x0: f64,
    tmax: f64,
    points: usize,
    tabulate: bool,
    exit: Option<ExitRun>,
}

#[derive(Serialize)]
struct ExitSummary {
    n: u64,
    beta: f64,
    kappa: f64,
    delta: f64,
    horizon: f64,
    observable: ObservableChoice,
    scaling: f64,
    /// `n·b_n^{−(order+2)}` for the selected regime.
    speed: f64,
    replicas: usize,
    hits: usize,
    p_hat: f64,
    stderr: f64,
    rate_hat: Option<f64>,
}

fn regime_spec(choice: RegimeChoice, beta: Option<f64>, kappa: Option<f64>, gamma: &GammaModel) -> Result<(RegimeSpec, f64), CliError> {
    match choice {
        RegimeChoice::Subcritical => {
            let beta = config::positive(config::required(beta, "beta")?, "beta")?;
            let kappa = config::positive(config::required(kappa, "kappa")?, "kappa")?;
            let critical = beta_c(kappa, gamma)?;
            if beta >= critical {
                return Err(CliError::config(format!("beta = {beta} is not below beta_c({kappa}) = {critical}")));
            }
            Ok((RegimeSpec::subcritical(beta, kappa, gamma), kappa))
        }
        RegimeChoice::Critical => {
            let spec = RegimeSpec::critical_line(config::required(beta, "beta")?, gamma)?;
            Ok((spec, spec.critical_kappa(gamma)))
        }
        RegimeChoice::Tricritical => {
            let spec = RegimeSpec::tri_critical(gamma)?;
            if let Some(b) = beta {
                if (b - spec.beta).abs() > 1e-12 * spec.beta {
                    return Err(CliError::config(format!(
                        "the tri-critical point has beta = {}, got beta = {b}",
                        spec.beta
                    )));
                }
            }
            Ok((spec, spec.critical_kappa(gamma)))
        }
    }
}

fn default_path(regime: RegimeChoice) -> &'static str {
    match regime {
        RegimeChoice::Subcritical => "constant",
        _ => "zero_cost",
    }
}

/// Relaxation `ẋ = −b·x^k` from `x0`, solved in closed form.
fn relaxation(spec: &RegimeSpec, x0: f64, t: f64) -> f64 {
    let power = spec.power as f64;
    (x0.powf(1.0 - power) + (power - 1.0) * spec.drift * t).powf(-1.0 / (power - 1.0))
}

fn generated_path(name: &str, spec: &RegimeSpec, x0: f64, tmax: f64, points: usize) -> Result<SampledPath, CliError> {
    let planar = spec.regime == Regime::Subcritical;
    match (name, planar) {
        ("zero_cost", false) => Ok(SampledPath::from_fn(tmax, points, |t| vec![relaxation(spec, x0, t)])),
        ("zero_cost", true) => Err(CliError::config(
            "zero_cost is only generated for critical regimes; supply a path file for the subcritical regime",
        )),
        // At rest, the constraint forces y = 0.
        ("constant", false) => Ok(SampledPath::from_fn(tmax, points, |_| vec![x0])),
        ("constant", true) => Ok(SampledPath::from_fn(tmax, points, |_| vec![x0, 0.0])),
        _ => unreachable!("only called for generated paths"),
    }
}

fn read_path(file: &Path, planar: bool) -> Result<SampledPath, CliError> {
    let bad = |msg: String| CliError::config(format!("{}: {msg}", file.display()));
    let text = std::fs::read_to_string(file).map_err(|e| bad(e.to_string()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty file".into()))?.split(',').map(str::trim).collect();
    let expected: &[&str] = if planar { &["t", "x", "y"] } else { &["t", "x"] };
    if header != expected {
        return Err(bad(format!("expected header {}", expected.join(","))));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
        if row.len() != expected.len() {
            return Err(bad(format!("row {} has {} fields", i + 1, row.len())));
        }
        times.push(row[0]);
        states.push(row[1..].to_vec());
    }
    if times.len() < 3 {
        return Err(bad(format!("need at least 3 rows, got {}", times.len())));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > STEP_TOL * dt.max(1.0)) {
        return Err(bad("times must be increasing and evenly spaced".into()));
    }
    Ok(SampledPath { dt, states })
}

fn write_path(w: &mut dyn Write, path: &SampledPath) -> std::io::Result<()> {
    let planar = path.states.first().is_some_and(|s| s.len() == 2);
    writeln!(w, "{}", if planar { "t,x,y" } else { "t,x" })?;
    for (i, s) in path.states.iter().enumerate() {
        let t = i as f64 * path.dt;
        let values: Vec<String> = s.iter().map(f64::to_string).collect();
        writeln!(w, "{t},{}", values.join(","))?;
    }
    Ok(())
}

fn lagrangian_table(spec: &RegimeSpec) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let mut rows = Vec::new();
    for i in 0..=20 {
        let x = 0.1 * i as f64;
        for j in 0..=20 {
            let v = -2.0 + 0.2 * j as f64;
            rows.push((x, v, lagrangian(spec, &[x], &[v])?));
        }
    }
    Ok(rows)
}

pub fn run(ctx: &Context, args: &MdpArgs) -> Result<(), CliError> {
    let file = &ctx.file.mdp;
    let gamma_spec = args.gamma.resolve(ctx.file.gamma.as_ref())?;
    let gamma = gamma_spec.build()?;
    let regime = config::required(args.regime.or(file.regime), "regime")?;
    let (spec, kappa) = regime_spec(regime, args.beta.or(file.beta), args.kappa.or(file.kappa), &gamma)?;
    let exit = if args.exit || file.exit.unwrap_or(false) {
        Some(ExitRun {
            n: config::required(args.n.or(file.n), "n")?,
            replicas: args.replicas.or(file.replicas).unwrap_or(1000),
            delta: args.delta.or(file.delta).unwrap_or(0.35),
            horizon: args.horizon.or(file.horizon).unwrap_or(0.5),
            observable: args.observable.or(file.observable).unwrap_or(ObservableChoice::AbsM),
            scaling_exponent: args.scaling_exponent.or(file.scaling_exponent).unwrap_or(0.25),
            seed: args.seed.or(file.seed).unwrap_or(0),
        })
    } else {
        None
    };
    let resolved = MdpRun {
        gamma: gamma_spec,
        regime,
        beta: spec.beta,
        kappa,
        path: args.path.clone().or_else(|| file.path.clone()).unwrap_or_else(|| default_path(regime).into()),
        x0: args.x0.or(file.x0).unwrap_or(1.0),
        tmax: config::positive(args.tmax.or(file.tmax).unwrap_or(10.0), "tmax")?,
        points: args.points.or(file.points).unwrap_or(10_000),
        tabulate: args.tabulate || file.tabulate.unwrap_or(false),
        exit,
    };
    if resolved.points < 3 {
        return Err(CliError::config("points must be at least 3"));
    }
    let planar = spec.regime == Regime::Subcritical;
    if !planar && !(resolved.x0 >= 0.0) {
        return Err(CliError::config("x0 must be nonnegative in critical regimes"));
    }

    let mut out = ctx.outputs()?;
    let generated = matches!(resolved.path.as_str(), "zero_cost" | "constant");
    let (path, path_file) = if generated {
        let path = generated_path(&resolved.path, &spec, resolved.x0, resolved.tmax, resolved.points)?;
        out.write("path.csv", |w| write_path(w, &path))?;
        (path, "path.csv".to_string())
    } else {
        (read_path(Path::new(&resolved.path), planar)?, resolved.path.clone())
    };
    let value = action(&spec, &path, |_| 0.0)?;
    let report = ActionReport::new(spec.regime, path_file, value);
    out.write("action.json", |w| write_json(w, &report))?;
    println!("action along {}: {value:e}", report.path_file);

    if resolved.tabulate {
        if planar {
            return Err(CliError::config("tabulation is only available for critical regimes"));
        }
        let rows = lagrangian_table(&spec)?;
        out.write("lagrangian.csv", |w| write_tabulation_csv(w, &rows))?;
    }

    if let Some(exit) = &resolved.exit {
        let template = SimConfig {
            n: exit.n,
            beta: spec.beta,
            kappa,
            t_max: exit.horizon,
            record_dt: exit.horizon,
            seed: exit.seed,
            replica_index: 0,
        };
        let scaling = (exit.n as f64).powf(exit.scaling_exponent);
        let query = ExitQuery { delta: exit.delta, observable: exit.observable.into(), scaling, horizon: exit.horizon };
        let init = MicroState::new(snap_to_lattice(exit.n.max(1), 0.0), 0.0);
        let options = EnsembleOptions::new(exit.replicas, ctx.threads);
        let estimate = estimate_exit_probability(&template, &gamma, &init, &options, &query)?;
        out.write("exit.csv", |w| write_ensemble_csv(w, &estimate.records))?;
        let summary = ExitSummary {
            n: exit.n,
            beta: spec.beta,
            kappa,
            delta: exit.delta,
            horizon: exit.horizon,
            observable: exit.observable,
            scaling,
            speed: spec.regime.speed(exit.n as f64, scaling),
            replicas: estimate.replicas,
            hits: estimate.hits,
            p_hat: estimate.p_hat,
            stderr: estimate.stderr,
            rate_hat: estimate.rate_hat,
        };
        out.write("exit.json", |w| write_json(w, &summary))?;
        println!("exit probability {} +/- {} ({} of {} replicas)", estimate.p_hat, estimate.stderr, estimate.hits, estimate.replicas);
    }
    let seed = resolved.exit.as_ref().map_or(0, |e| e.seed);
    out.finish("mdp", &resolved, seed)?;
    Ok(())
}
