use super::arms::{build_arm_set, Arm};
use super::trace::RegretTrace;
use super::ucb::{ucb_step, ArmStats};
use crate::discovery::{Discovery, DiscoveryConfig, Environment, SimulatedEnvironment};
use crate::error::{Error, Result};
use crate::pomis::{learn_pomis_structure_with, PairPolicy, PomisStructure};
use crate::scm::{ExactOracle, Intervention, Scm};

/// Offset between the sampling seed and the seed of the random backgrounds.
const BACKGROUND_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Everything a two-phase run produced.
#[derive(Debug, Clone)]
pub struct TwoPhaseRun {
    pub trace: RegretTrace,
    pub structure: PomisStructure,
    pub arms: Vec<Arm>,
    pub stats: Vec<ArmStats>,
    /// Best expected reward over the true POMIS arms and an arm achieving it.
    pub optimum: (f64, Intervention),
}

impl TwoPhaseRun {
    pub fn phase_one_pulls(&self) -> u64 {
        self.trace.phase_one_len()
    }

    /// Index of the most pulled arm in the bandit phase.
    pub fn favourite_arm(&self) -> Option<usize> {
        (0..self.stats.len()).max_by_key(|&i| (self.stats[i].pulls, std::cmp::Reverse(i)))
    }
}

/// POMIS discovery followed by UCB over the learned arms, `horizon` pulls in
/// all. Discovery samples count as rounds.
pub fn run_two_phase(
    scm: &Scm,
    cfg: DiscoveryConfig,
    horizon: u64,
    seed: u64,
) -> Result<TwoPhaseRun> {
    run_two_phase_with(scm, cfg, horizon, seed, PairPolicy::Necessary)
}

pub fn run_two_phase_with(
    scm: &Scm,
    cfg: DiscoveryConfig,
    horizon: u64,
    seed: u64,
    pairs: PairPolicy,
) -> Result<TwoPhaseRun> {
    run(scm, cfg, seed, pairs, |phase_one| {
        if phase_one > horizon {
            return Err(Error::Config(format!(
                "horizon {horizon} is shorter than the {phase_one} pulls discovery needed"
            )));
        }
        Ok(horizon)
    })
}

/// As [`run_two_phase_with`] with the horizon set to `multiple` times the
/// number of pulls discovery took.
pub fn run_two_phase_scaled(
    scm: &Scm,
    cfg: DiscoveryConfig,
    multiple: u64,
    seed: u64,
    pairs: PairPolicy,
) -> Result<TwoPhaseRun> {
    if multiple == 0 {
        return Err(Error::Config("horizon multiple must be at least 1".into()));
    }
    run(scm, cfg, seed, pairs, |phase_one| {
        phase_one
            .checked_mul(multiple)
            .ok_or_else(|| Error::Config(format!("horizon {multiple} x {phase_one} overflows")))
    })
}

fn run(
    scm: &Scm,
    cfg: DiscoveryConfig,
    seed: u64,
    pairs: PairPolicy,
    horizon: impl FnOnce(u64) -> Result<u64>,
) -> Result<TwoPhaseRun> {
    let oracle = ExactOracle::new(scm);
    let optimum = oracle.oracle_optimum()?;
    let y = scm.graph().reward();
    let mut env = SimulatedEnvironment::new(scm.clone(), seed);
    let structure = {
        let mut d = Discovery::new(&mut env, cfg, seed ^ BACKGROUND_SEED)?;
        learn_pomis_structure_with(&mut d, pairs)?
    };
    let phase_one = env.total_pulls();
    let horizon = horizon(phase_one)?;
    let arms = build_arm_set(&structure.family, &structure.graph)?;
    let mut stats = vec![ArmStats::default(); arms.len()];
    for t in 1..=horizon - phase_one {
        let i = ucb_step(&stats, t)?;
        let mut reward = false;
        env.draw(&arms[i].intervention, 1, &mut |s| reward = s[y] == 1)?;
        stats[i].record(reward);
    }
    let log = env.reward_log().clone();
    let means = log
        .interventions()
        .iter()
        .map(|iv| oracle.expected_reward(iv))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TwoPhaseRun {
        trace: RegretTrace::new(log, &means, optimum.0, phase_one),
        structure,
        arms,
        stats,
        optimum,
    })
}
