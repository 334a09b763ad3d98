//! Finite-sample structure learning from interventional data.

mod config;
mod env;
mod hypothesis;
mod learn;
mod store;
mod tally;

pub use config::{
    budget_a, budget_b, budget_c, compute_budgets, rounds, BudgetMode, DiscoveryConfig,
    SampleBudget,
};
pub use env::{Environment, RewardLog, SimulatedEnvironment};
pub use hypothesis::{ancestrality_test, latent_test};
pub use learn::{Coverage, Dataset, Discovery, Evidence};
pub use store::{Entry, InterventionalStore, Stage};
pub use tally::{estimate, Estimate, Frequencies, Tally};
