//! Experiment runner, configuration, CSV output and rate fitting.

pub mod config;
pub mod csv;
pub mod run;
pub mod seed;
pub mod slope;
pub mod sweep;

pub use config::{
    parse_config, parse_config_with, DelaySpec, EtaRule, ExperimentConfig, SetSpec, StreamKind,
    StreamSpec,
};
pub use run::{gap_check, run_experiment, run_experiment_with, Experiment, ExperimentResult, GapCheckSummary, RoundLog};
pub use slope::fit_slope;
pub use sweep::{cell_config, sweep, SweepRow};
