//! Experiment configuration and the batch commands of the `netsync` binary.

pub mod commands;
pub mod config;
pub mod plot;

pub use commands::{
    cmd_bound, cmd_certify, cmd_graph_info, cmd_simulate, cmd_sweep, exit_code, run_experiment, BatchSpec, RunOutput,
    SimulationSummary, SweepParameter, SweepRow,
};
pub use config::ExperimentConfig;
