//! Phase two: UCB over the arms of the learned POMIS family, and the
//! end-to-end runner with regret accounting over every pull.

mod arms;
mod run;
mod trace;
mod ucb;

pub use arms::{build_arm_set, build_arm_set_with_limit, Arm, DEFAULT_ARM_LIMIT};
pub use run::{run_two_phase, run_two_phase_scaled, run_two_phase_with, TwoPhaseRun};
pub use trace::{RegretTrace, RoundRecord};
pub use ucb::{ucb_step, ArmStats};
