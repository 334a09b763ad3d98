use crate::error::{Error, Result};

/// Pull count and number of unit rewards of one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArmStats {
    pub pulls: u64,
    pub reward_sum: u64,
}

impl ArmStats {
    pub fn mean(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.reward_sum as f64 / self.pulls as f64
        }
    }

    pub fn record(&mut self, reward: bool) {
        self.pulls += 1;
        self.reward_sum += reward as u64;
    }
}

/// UCB1 choice at round `t` (1-based): the first unpulled arm, otherwise
/// the largest `mean + sqrt(2 ln t / pulls)` with ties to the lowest index.
pub fn ucb_step(stats: &[ArmStats], t: u64) -> Result<usize> {
    if stats.is_empty() {
        return Err(Error::domain("no arms to choose from"));
    }
    if let Some(i) = stats.iter().position(|s| s.pulls == 0) {
        return Ok(i);
    }
    let log_t = (t.max(1) as f64).ln();
    let mut best = 0;
    let mut best_index = f64::NEG_INFINITY;
    for (i, s) in stats.iter().enumerate() {
        let index = s.mean() + (2.0 * log_t / s.pulls as f64).sqrt();
        if index > best_index {
            best = i;
            best_index = index;
        }
    }
    Ok(best)
}
