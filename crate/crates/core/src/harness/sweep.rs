//! Grids of experiments over (T, d).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::run::run_experiment;
use crate::harness::seed::cell_hash;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub horizon: usize,
    /// Realized max_t d_t.
    pub d_max: usize,
    pub algorithm: String,
    pub set: String,
    pub seed: u64,
    pub regret: f64,
    pub wall_ms: u128,
}

impl SweepRow {
    /// Equality ignoring wall-clock time.
    pub fn same_cell(&self, other: &SweepRow) -> bool {
        SweepRow {
            wall_ms: 0,
            ..self.clone()
        } == SweepRow {
            wall_ms: 0,
            ..other.clone()
        }
    }
}

/// Config for cell (T, d): horizon T, the delay variant's magnitude set to
/// d, and base seed offset by a stable hash of (T, d).
pub fn cell_config(base: &ExperimentConfig, horizon: usize, delay: usize) -> ExperimentConfig {
    let mut cfg = base.clone();
    cfg.horizon = horizon;
    cfg.delays = base.delays.with_magnitude(delay);
    cfg.base_seed = base.base_seed.wrapping_add(cell_hash(horizon, delay));
    cfg
}

/// Runs every (T, d) cell, T-major. Rows come back in grid order whether or
/// not the cells ran in parallel.
pub fn sweep(
    base: &ExperimentConfig,
    horizons: &[usize],
    delays: &[usize],
    parallel: bool,
) -> Result<Vec<SweepRow>> {
    if horizons.is_empty() || delays.is_empty() {
        return Err(Error::param("sweep needs non-empty T and d lists"));
    }
    let cells: Vec<ExperimentConfig> = horizons
        .iter()
        .flat_map(|&t| delays.iter().map(move |&d| (t, d)))
        .map(|(t, d)| cell_config(base, t, d))
        .collect();
    let run = |cfg: &ExperimentConfig| -> Result<SweepRow> {
        let res = run_experiment(cfg)?;
        Ok(SweepRow {
            horizon: cfg.horizon,
            d_max: res.max_delay,
            algorithm: cfg.algorithm.clone(),
            set: cfg.set.kind().to_string(),
            seed: cfg.base_seed,
            regret: res.regret,
            wall_ms: res.duration.as_millis(),
        })
    };
    if parallel {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    }
}
