use crate::config::{self, GammaArgs};
use crate::error::CliError;
use crate::Context;
use clap::Args;
use cwdiss_core::io::{write_json, write_phase_csv};
use cwdiss_core::macroflow::CycleSearch;
use cwdiss_core::phases::{critical_curves, scan_grid};
use cwdiss_core::GammaSpec;
use serde::Serialize;

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    gamma: GammaArgs,
    /// Kappa values, `start:stop:count` or a single number.
    #[arg(long)]
    kappa: Option<String>,
    /// Beta values, `start:stop:count` or a single number.
    #[arg(long)]
    beta: Option<String>,
    /// Tabulate beta_c, beta_delta, beta_star and sigma_L over the kappa values.
    #[arg(long)]
    curves: bool,
}

#[derive(Serialize)]
struct PhaseRun {
    gamma: GammaSpec,
    kappa: Vec<f64>,
    beta: Option<Vec<f64>>,
    curves: bool,
}

pub fn run(ctx: &Context, args: &PhaseArgs) -> Result<(), CliError> {
    let file = &ctx.file.phase;
    let resolved = PhaseRun {
        gamma: args.gamma.resolve(ctx.file.gamma.as_ref())?,
        kappa: config::required(config::grid(args.kappa.as_deref(), file.kappa.as_ref(), "kappa")?, "kappa")?,
        beta: config::grid(args.beta.as_deref(), file.beta.as_ref(), "beta")?,
        curves: args.curves || file.curves.unwrap_or(false),
    };
    if resolved.beta.is_none() && !resolved.curves {
        return Err(CliError::config("nothing to do: give beta values for a scan, or --curves"));
    }
    for &k in &resolved.kappa {
        config::positive(k, "kappa")?;
    }
    let gamma = resolved.gamma.build()?;
    let search = CycleSearch::default();
    let mut out = ctx.outputs()?;

    if let Some(betas) = &resolved.beta {
        for &b in betas {
            config::positive(b, "beta")?;
        }
        let cells = ctx.in_pool(|| scan_grid(&resolved.kappa, betas, &gamma, &search))??;
        out.write("phase.csv", |w| write_phase_csv(w, &cells))?;
        println!("classified {} grid points", cells.len());
    }
    if resolved.curves {
        let table = ctx.in_pool(|| critical_curves(&resolved.kappa, &gamma, &search))??;
        out.write("curves.json", |w| write_json(w, &table))?;
        println!("tabulated critical curves at {} kappa values", table.len());
    }
    out.finish("phase", &resolved, 0)?;
    Ok(())
}
