//! Causal bandits over unknown causal graphs with latent confounders.

pub mod admg;
pub mod bandit;
pub mod discovery;
pub mod error;
pub mod examples;
pub mod experiment;
pub mod pomis;
pub mod scm;

pub use error::{Error, Result};
