//! Random-graph experiment protocol.

mod config;
mod graph;
mod run;

pub use config::ExperimentConfig;
pub use graph::{random_graph, skeleton_is_chordal};
pub use run::{
    derive_seed, generate_instance, mean_and_band, naive_arm_count, run_armcount_experiment,
    run_regret_experiment, run_samples_experiment, ArmsReport, ArmsRow, Instance, RegretReport,
    RegretTrial, SamplesReport, SamplesRow,
};
