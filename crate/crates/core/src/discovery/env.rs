use std::collections::HashMap;

use bitvec::vec::BitVec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admg::Admg;
use crate::error::Result;
use crate::scm::{Intervention, Scm, Scratch};

/// Every pull in order: which intervention and the realized reward.
/// Consecutive pulls of one intervention share a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardLog {
    interventions: Vec<Intervention>,
    index: HashMap<Intervention, usize>,
    runs: Vec<(usize, u64)>,
    rewards: BitVec,
}

impl RewardLog {
    pub fn push(&mut self, iv: &Intervention, reward: bool) {
        self.push_run(iv, [reward]);
    }

    /// Appends consecutive pulls of one intervention.
    pub fn push_run(&mut self, iv: &Intervention, rewards: impl IntoIterator<Item = bool>) {
        let before = self.rewards.len();
        self.rewards.extend(rewards);
        let added = (self.rewards.len() - before) as u64;
        if added == 0 {
            return;
        }
        let last = self.runs.last().map(|&(id, _)| id);
        let id = match last.filter(|&id| &self.interventions[id] == iv) {
            Some(id) => id,
            None => match self.index.get(iv) {
                Some(&id) => id,
                None => {
                    let id = self.interventions.len();
                    self.interventions.push(iv.clone());
                    self.index.insert(iv.clone(), id);
                    id
                }
            },
        };
        match self.runs.last_mut() {
            Some((last, n)) if *last == id => *n += added,
            _ => self.runs.push((id, added)),
        }
    }

    pub fn len(&self) -> u64 {
        self.rewards.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// Distinct interventions in order of first pull.
    pub fn interventions(&self) -> &[Intervention] {
        &self.interventions
    }

    /// `(index into interventions(), run length)` in pull order.
    pub fn runs(&self) -> &[(usize, u64)] {
        &self.runs
    }

    pub fn reward(&self, pull: u64) -> bool {
        self.rewards[pull as usize]
    }

    /// `(intervention index, reward)` per pull.
    pub fn iter(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.runs
            .iter()
            .flat_map(|&(id, n)| std::iter::repeat_n(id, n as usize))
            .zip(self.rewards.iter().by_vals())
    }
}

/// Sampling interface seen by the learners and the bandit.
pub trait Environment {
    /// Vertex names, domains and reward. Carries no edges.
    fn skeleton(&self) -> &Admg;

    /// Draws `count` samples under `do(iv)`, logging each as one pull.
    fn draw(&mut self, iv: &Intervention, count: u64, sink: &mut dyn FnMut(&[u32])) -> Result<()>;

    fn total_pulls(&self) -> u64;

    fn reward_log(&self) -> &RewardLog;
}

/// Environment backed by a known model and a seeded generator.
#[derive(Debug, Clone)]
pub struct SimulatedEnvironment {
    scm: Scm,
    skeleton: Admg,
    rng: ChaCha8Rng,
    log: RewardLog,
    scratch: Scratch,
}

impl SimulatedEnvironment {
    pub fn new(scm: Scm, seed: u64) -> Self {
        let skeleton = scm.graph().empty_like();
        SimulatedEnvironment {
            scm,
            skeleton,
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: RewardLog::default(),
            scratch: Scratch::default(),
        }
    }

    pub fn scm(&self) -> &Scm {
        &self.scm
    }
}

impl Environment for SimulatedEnvironment {
    fn skeleton(&self) -> &Admg {
        &self.skeleton
    }

    fn draw(&mut self, iv: &Intervention, count: u64, sink: &mut dyn FnMut(&[u32])) -> Result<()> {
        let y = self.skeleton.reward();
        if count == 1 {
            let mut reward = false;
            self.scm
                .draw_with_scratch(iv, 1, &mut self.rng, &mut self.scratch, |s| {
                    reward = s[y] == 1;
                    sink(s);
                })?;
            self.log.push_run(iv, [reward]);
            return Ok(());
        }
        let mut rewards: BitVec = BitVec::with_capacity(count as usize);
        self.scm
            .draw_with_scratch(iv, count, &mut self.rng, &mut self.scratch, |s| {
                rewards.push(s[y] == 1);
                sink(s);
            })?;
        self.log.push_run(iv, rewards);
        Ok(())
    }

    fn total_pulls(&self) -> u64 {
        self.log.len()
    }

    fn reward_log(&self) -> &RewardLog {
        &self.log
    }
}
