use crate::config::{self, GammaArgs};
use crate::error::CliError;
use crate::Context;
use clap::Args;
use cwdiss_core::io::{write_json, write_trajectory_csv, TrajectorySummary};
use cwdiss_core::microsim::{simulate, snap_to_lattice, MicroState, SimConfig};
use cwdiss_core::GammaSpec;
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    gamma: GammaArgs,
    /// Number of spins.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Initial state `m,zeta` (default 0,0); `m` is moved to the nearest
    /// lattice point.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    /// Final time (default 5).
    #[arg(long)]
    tmax: Option<f64>,
    /// Recording interval (default 0.01).
    #[arg(long)]
    dt: Option<f64>,
    /// Generator seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent replicas (default 1).
    #[arg(long)]
    replicas: Option<usize>,
}

#[derive(Serialize)]
struct SimulateRun {
    gamma: GammaSpec,
    template: SimConfig,
    init: [f64; 2],
    replicas: usize,
}

pub fn run(ctx: &Context, args: &SimulateArgs) -> Result<(), CliError> {
    let file = &ctx.file.simulate;
    let gamma_spec = args.gamma.resolve(ctx.file.gamma.as_ref())?;
    let n = config::required(args.n.or(file.n), "n")?;
    let template = SimConfig {
        n,
        beta: config::required(args.beta.or(file.beta), "beta")?,
        kappa: config::required(args.kappa.or(file.kappa), "kappa")?,
        t_max: args.tmax.or(file.tmax).unwrap_or(5.0),
        record_dt: args.dt.or(file.dt).unwrap_or(0.01),
        seed: args.seed.or(file.seed).unwrap_or(0),
        replica_index: 0,
    };
    template.validate()?;
    let replicas = args.replicas.or(file.replicas).unwrap_or(1);
    if replicas == 0 {
        return Err(CliError::config("replicas must be positive"));
    }
    let [m, zeta] = config::pair(args.init.as_deref(), file.init.as_ref(), "init")?.unwrap_or([0.0, 0.0]);
    if m.abs() > 1.0 {
        return Err(CliError::config(format!("initial m = {m} lies outside [-1, 1]")));
    }
    let snapped = snap_to_lattice(n, m);
    if snapped != m {
        eprintln!("cwdiss: initial m = {m} moved to the lattice point {snapped}");
    }
    let resolved = SimulateRun { gamma: gamma_spec, template, init: [snapped, zeta], replicas };
    let gamma = resolved.gamma.build()?;
    let init = MicroState::new(snapped, zeta);

    let runs = ctx.in_pool(|| {
        (0..replicas)
            .into_par_iter()
            .map(|r| {
                let config = SimConfig { replica_index: r as u64, ..template };
                let start = Instant::now();
                let path = simulate(&config, &gamma, &init)?;
                Ok((path, start.elapsed().as_secs_f64()))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })??;

    let mut out = ctx.outputs()?;
    let mut jumps = 0;
    for (r, (path, wall_time)) in runs.iter().enumerate() {
        out.write(&format!("trajectory_{r:04}.csv"), |w| write_trajectory_csv(w, &path.times, &path.m, &path.zeta))?;
        let summary = TrajectorySummary { config: path.meta, jumps: path.jumps, wall_time: *wall_time };
        out.write(&format!("trajectory_{r:04}.json"), |w| write_json(w, &summary))?;
        jumps += path.jumps;
    }
    println!("simulated {replicas} replica(s), {jumps} jumps in total");
    out.finish("simulate", &resolved, template.seed)?;
    Ok(())
}
