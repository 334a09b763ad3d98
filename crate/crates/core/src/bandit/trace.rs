use std::fmt::Write as _;

use crate::admg::Admg;
use crate::discovery::RewardLog;
use crate::scm::Intervention;

/// Differences this small between an arm's mean and the optimum are
/// rounding noise and count as zero regret.
const REGRET_TOLERANCE: f64 = 1e-9;

/// One pull of the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    /// 1-based.
    pub round: u64,
    /// Index into [`RegretTrace::interventions`].
    pub intervention: usize,
    pub reward: bool,
    pub regret: f64,
    pub cumulative: f64,
}

/// Every pull of a run with its expected shortfall against the optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    log: RewardLog,
    gaps: Vec<f64>,
    optimum: f64,
    phase_one: u64,
}

impl RegretTrace {
    /// `means[i]` is the expected reward of `log.interventions()[i]`;
    /// the first `phase_one` pulls belong to discovery.
    pub fn new(log: RewardLog, means: &[f64], optimum: f64, phase_one: u64) -> Self {
        let gaps = means
            .iter()
            .map(|&m| {
                let gap = optimum - m;
                if gap.abs() < REGRET_TOLERANCE {
                    0.0
                } else {
                    gap
                }
            })
            .collect();
        RegretTrace {
            log,
            gaps,
            optimum,
            phase_one,
        }
    }

    pub fn len(&self) -> u64 {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    pub fn optimum(&self) -> f64 {
        self.optimum
    }

    pub fn phase_one_len(&self) -> u64 {
        self.phase_one
    }

    pub fn interventions(&self) -> &[Intervention] {
        self.log.interventions()
    }

    /// Expected shortfall of each intervention in [`RegretTrace::interventions`].
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn log(&self) -> &RewardLog {
        &self.log
    }

    pub fn iter(&self) -> impl Iterator<Item = RoundRecord> + '_ {
        let mut cumulative = 0.0;
        self.log
            .iter()
            .enumerate()
            .map(move |(i, (intervention, reward))| {
                let regret = self.gaps[intervention];
                cumulative += regret;
                RoundRecord {
                    round: i as u64 + 1,
                    intervention,
                    reward,
                    regret,
                    cumulative,
                }
            })
    }

    /// Cumulative regret over pulls `from..to` (0-based, end exclusive),
    /// computed run by run.
    pub fn regret_between(&self, from: u64, to: u64) -> f64 {
        let mut total = 0.0;
        let mut start = 0u64;
        for &(id, n) in self.log.runs() {
            let end = start + n;
            let lo = start.max(from);
            let hi = end.min(to);
            if hi > lo {
                total += self.gaps[id] * (hi - lo) as f64;
            }
            start = end;
            if start >= to {
                break;
            }
        }
        total
    }

    pub fn total_regret(&self) -> f64 {
        self.regret_between(0, self.len())
    }

    /// Regret of the bandit phase alone.
    pub fn ucb_regret(&self) -> f64 {
        self.regret_between(self.phase_one, self.len())
    }

    /// Cumulative regret after every `stride`-th round, plus the last.
    pub fn curve(&self, stride: u64) -> Vec<(u64, f64)> {
        let stride = stride.max(1);
        let len = self.len();
        let mut out = Vec::new();
        let mut start = 0u64;
        let mut cumulative = 0.0;
        let mut next = 1u64;
        for &(id, n) in self.log.runs() {
            let end = start + n;
            while next <= end && next <= len {
                out.push((next, cumulative + self.gaps[id] * (next - start) as f64));
                next += stride;
            }
            cumulative += self.gaps[id] * n as f64;
            start = end;
        }
        if len > 0 && out.last().is_none_or(|&(r, _)| r != len) {
            out.push((len, cumulative));
        }
        out
    }

    /// `round,arm_key,reward,inst_regret,cum_regret` for every `stride`-th
    /// round and the last.
    pub fn to_csv(&self, g: &Admg, stride: u64) -> String {
        let stride = stride.max(1);
        let keys: Vec<String> = self.interventions().iter().map(|iv| iv.key(g)).collect();
        let len = self.len();
        let mut out = String::from("round,arm_key,reward,inst_regret,cum_regret\n");
        for r in self.iter() {
            if (r.round - 1) % stride == 0 || r.round == len {
                let _ = writeln!(
                    out,
                    "{},\"{}\",{},{},{}",
                    r.round, keys[r.intervention], r.reward as u8, r.regret, r.cumulative
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::xor_scm;

    fn trace() -> RegretTrace {
        let mut log = RewardLog::default();
        let good = Intervention::new([(0, 1)]);
        let bad = Intervention::new([(0, 0)]);
        log.push_run(&bad, [false; 3]);
        log.push_run(&good, [true; 4]);
        log.push_run(&bad, [false; 2]);
        RegretTrace::new(log, &[0.0, 1.0], 1.0, 5)
    }

    #[test]
    fn cumulative_regret() {
        let t = trace();
        let cum: Vec<f64> = t.iter().map(|r| r.cumulative).collect();
        assert_eq!(cum, vec![1.0, 2.0, 3.0, 3.0, 3.0, 3.0, 3.0, 4.0, 5.0]);
        assert_eq!(t.total_regret(), 5.0);
        assert_eq!(t.ucb_regret(), 2.0);
        assert_eq!(t.regret_between(2, 8), 2.0);
    }

    #[test]
    fn curve_and_csv_stride() {
        let t = trace();
        assert_eq!(t.curve(4), vec![(1, 1.0), (5, 3.0), (9, 5.0)]);
        assert_eq!(t.curve(1).len(), 9);
        let g = xor_scm().graph().clone();
        let csv = t.to_csv(&g, 4);
        assert_eq!(
            csv,
            "round,arm_key,reward,inst_regret,cum_regret\n\
             1,\"do(X1=0)\",0,1,1\n\
             5,\"do(X1=1)\",1,0,3\n\
             9,\"do(X1=0)\",0,1,5\n"
        );
        assert_eq!(t.to_csv(&g, 1).lines().count(), 10);
    }
}
