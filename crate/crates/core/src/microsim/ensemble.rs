use super::{check_gamma, check_init, simulate_unchecked, MicroState, SimConfig, SimError, Trajectory};
use crate::gamma::GammaModel;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How replicas obtain their random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamMode {
    /// Replica `r` uses stream `r` of the seeded generator.
    #[default]
    PerReplica,
    /// Every replica reuses the template's stream (common random numbers).
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub replicas: usize,
    /// Worker threads; 0 means the rayon default.
    pub threads: usize,
    pub streams: StreamMode,
}

impl EnsembleOptions {
    pub fn new(replicas: usize, threads: usize) -> Self {
        Self {
            replicas,
            threads,
            streams: StreamMode::PerReplica,
        }
    }

    pub(crate) fn replica_config(&self, template: &SimConfig, r: usize) -> SimConfig {
        match self.streams {
            StreamMode::PerReplica => SimConfig {
                replica_index: r as u64,
                ..*template
            },
            StreamMode::Shared => *template,
        }
    }

    /// Runs `job` for every replica index on a pool of the requested size,
    /// collecting results in index order.
    pub(crate) fn map<T, F>(&self, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let run = || (0..self.replicas).into_par_iter().map(&job).collect();
        if self.threads == 0 {
            return run();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(self.threads).build() {
            Ok(pool) => pool.install(run),
            Err(_) => (0..self.replicas).map(&job).collect(),
        }
    }
}

/// Simulates `options.replicas` independent replicas of `template`.
///
/// Output depends only on the template and replica indices, never on the
/// number of threads.
pub fn run_ensemble(
    template: &SimConfig,
    gamma: &GammaModel,
    init: &MicroState,
    options: &EnsembleOptions,
) -> Result<Vec<Trajectory>, SimError> {
    if options.replicas == 0 {
        return Ok(Vec::new());
    }
    template.validate()?;
    check_gamma(gamma, template.kappa)?;
    let ups = check_init(template, init)?;
    Ok(options.map(|r| simulate_unchecked(&options.replica_config(template, r), gamma, init, ups)))
}
