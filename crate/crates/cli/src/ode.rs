use crate::config::{self, GammaArgs};
use crate::error::CliError;
use crate::Context;
use clap::Args;
use cwdiss_core::io::{write_json, write_trajectory_csv, CycleReport};
use cwdiss_core::macroflow::{find_cycles, integrate, CycleSearch, MacroState};
use cwdiss_core::GammaSpec;
use serde::Serialize;

#[derive(Debug, Args)]
pub struct OdeArgs {
    #[command(flatten)]
    gamma: GammaArgs,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Initial state `m,zeta` (default 0.1,0.1).
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    /// Final time (default 100).
    #[arg(long)]
    tmax: Option<f64>,
    /// Output spacing (default 0.05).
    #[arg(long)]
    dt: Option<f64>,
    /// Integrator tolerance (default 1e-10).
    #[arg(long)]
    tol: Option<f64>,
    /// Also search for limit cycles at these parameters.
    #[arg(long)]
    cycles: bool,
}

#[derive(Serialize)]
struct OdeRun {
    gamma: GammaSpec,
    beta: f64,
    kappa: f64,
    init: [f64; 2],
    tmax: f64,
    dt: f64,
    tol: f64,
    cycles: bool,
}

pub fn run(ctx: &Context, args: &OdeArgs) -> Result<(), CliError> {
    let file = &ctx.file.ode;
    let resolved = OdeRun {
        gamma: args.gamma.resolve(ctx.file.gamma.as_ref())?,
        beta: config::positive(config::required(args.beta.or(file.beta), "beta")?, "beta")?,
        kappa: config::positive(config::required(args.kappa.or(file.kappa), "kappa")?, "kappa")?,
        init: config::pair(args.init.as_deref(), file.init.as_ref(), "init")?.unwrap_or([0.1, 0.1]),
        tmax: config::positive(args.tmax.or(file.tmax).unwrap_or(100.0), "tmax")?,
        dt: config::positive(args.dt.or(file.dt).unwrap_or(0.05), "dt")?,
        tol: config::positive(args.tol.or(file.tol).unwrap_or(1e-10), "tol")?,
        cycles: args.cycles || file.cycles.unwrap_or(false),
    };
    if resolved.dt > resolved.tmax {
        return Err(CliError::config("dt must not exceed tmax"));
    }
    if resolved.init[0].abs() > 1.0 {
        return Err(CliError::config(format!("initial m = {} lies outside [-1, 1]", resolved.init[0])));
    }
    let gamma = resolved.gamma.build()?;
    let (beta, kappa) = (resolved.beta, resolved.kappa);
    let init = MacroState::new(resolved.init[0], resolved.init[1]);
    let path = integrate(init, beta, kappa, &gamma, resolved.tmax, resolved.dt, resolved.tol)?;
    let mut out = ctx.outputs()?;
    out.write("trajectory.csv", |w| write_trajectory_csv(w, &path.times, &path.m, &path.zeta))?;
    let end = path.last();
    println!("integrated to t = {}: m = {}, zeta = {}", resolved.tmax, end.m, end.zeta);

    if resolved.cycles {
        let found = ctx.in_pool(|| find_cycles(beta, kappa, &gamma, &CycleSearch::default()))?;
        let reports: Vec<CycleReport> = found.iter().map(|c| CycleReport::new(beta, kappa, c)).collect();
        out.write("cycles.json", |w| write_json(w, &reports))?;
        println!("found {} limit cycle(s)", reports.len());
    }
    out.finish("ode", &resolved, 0)?;
    Ok(())
}
