use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::graph::random_graph;
use crate::admg::Admg;
use crate::bandit::{build_arm_set, run_two_phase_scaled, run_two_phase_with, TwoPhaseRun};
use crate::discovery::{Discovery, SimulatedEnvironment};
use crate::error::{Error, Result};
use crate::pomis::{learn_pomis_structure_with, PairPolicy, PomisStructure};
use crate::scm::{random_scm, GapParams, Scm};

/// Independent seed for `salt` under `base`.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(salt);
    rng.next_u64()
}

fn trial_seed(base: u64, cell: usize, trial: usize) -> u64 {
    derive_seed(base, ((cell as u64) << 32) | trial as u64)
}

/// A generated graph with an SCM meeting the configured gaps.
#[derive(Debug, Clone)]
pub struct Instance {
    pub scm: Scm,
    /// Graphs discarded because no SCM met the gaps.
    pub resampled: usize,
}

impl Instance {
    pub fn graph(&self) -> &Admg {
        self.scm.graph()
    }
}

/// Draws graphs until one admits an SCM meeting the configured gaps.
/// Each failure is appended to `log`.
pub fn generate_instance(
    cfg: &ExperimentConfig,
    (n, rho, rho_l): (usize, f64, f64),
    seed: u64,
    log: &mut Vec<String>,
) -> Result<Instance> {
    let params = GapParams {
        epsilon: cfg.discovery.epsilon,
        gamma: cfg.discovery.gamma,
        eta: cfg.discovery.eta,
        ..GapParams::default()
    };
    let mut last = String::new();
    for attempt in 0..cfg.generation_retries {
        let s = derive_seed(seed, attempt as u64);
        let g = random_graph(n, rho, rho_l, s)?;
        match random_scm(&g, &params, s) {
            Ok(scm) => {
                return Ok(Instance {
                    scm,
                    resampled: attempt,
                })
            }
            Err(Error::Generation { violated, .. }) => {
                log.push(format!(
                    "n={n} rho={rho} rho_l={rho_l} seed={seed} attempt {attempt}: {violated}"
                ));
                last = violated;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Generation {
        attempts: cfg.generation_retries,
        violated: last,
    })
}

fn learn(
    inst: &Instance,
    cfg: &ExperimentConfig,
    seed: u64,
    pairs: PairPolicy,
) -> Result<PomisStructure> {
    let dc = cfg.discovery_for(inst.graph().max_directed_degree());
    let mut env = SimulatedEnvironment::new(inst.scm.clone(), seed);
    let mut d = Discovery::new(&mut env, dc, derive_seed(seed, u64::MAX))?;
    learn_pomis_structure_with(&mut d, pairs)
}

/// Mean and twice the sample standard deviation.
pub fn mean_and_band(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 2.0 * var.sqrt())
}

/// One trial of the sample-count comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplesRow {
    pub n: usize,
    pub rho: f64,
    pub rho_l: f64,
    pub trial: usize,
    /// Ancestor search plus observable graph.
    pub observable: u64,
    /// Observable graph plus every confounder pair.
    pub full_latents: u64,
    /// Observable graph plus the necessary pairs only.
    pub pomis: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SamplesReport {
    pub rows: Vec<SamplesRow>,
    /// Generation failures that were resampled.
    pub log: Vec<String>,
}

impl SamplesReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,rho,rho_l,trial,samples_observable,samples_full_latents,samples_pomis\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.n, r.rho, r.rho_l, r.trial, r.observable, r.full_latents, r.pomis
            );
        }
        out
    }

    /// Per cell: trial count, then mean and 2·std of each sample column.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "n,rho,rho_l,trials,mean_observable,band_observable,mean_full_latents,band_full_latents,mean_pomis,band_pomis\n",
        );
        let mut cells: Vec<(usize, f64, f64)> = Vec::new();
        for r in &self.rows {
            if !cells.contains(&(r.n, r.rho, r.rho_l)) {
                cells.push((r.n, r.rho, r.rho_l));
            }
        }
        for cell in cells {
            let rows: Vec<&SamplesRow> = self
                .rows
                .iter()
                .filter(|r| (r.n, r.rho, r.rho_l) == cell)
                .collect();
            let column = |f: fn(&SamplesRow) -> u64| {
                mean_and_band(&rows.iter().map(|r| f(r) as f64).collect::<Vec<_>>())
            };
            let (mo, bo) = column(|r| r.observable);
            let (mf, bf) = column(|r| r.full_latents);
            let (mp, bp) = column(|r| r.pomis);
            let _ = writeln!(
                out,
                "{},{},{},{},{mo},{bo},{mf},{bf},{mp},{bp}",
                cell.0,
                cell.1,
                cell.2,
                rows.len()
            );
        }
        out
    }
}

/// Samples spent by observable-graph learning, by full-latent learning
/// and by the POMIS learner, on the same instances and sample streams.
pub fn run_samples_experiment(cfg: &ExperimentConfig) -> Result<SamplesReport> {
    cfg.validate()?;
    let mut report = SamplesReport::default();
    for (c, cell) in cfg.cells().into_iter().enumerate() {
        for trial in 0..cfg.trials {
            let seed = trial_seed(cfg.seed, c, trial);
            let inst = generate_instance(cfg, cell, seed, &mut report.log)?;
            let full = learn(&inst, cfg, seed, PairPolicy::All)?;
            let pomis = learn(&inst, cfg, seed, PairPolicy::Necessary)?;
            report.rows.push(SamplesRow {
                n: cell.0,
                rho: cell.1,
                rho_l: cell.2,
                trial,
                observable: full.samples.ancestry + full.samples.observable,
                full_latents: full.samples.total(),
                pomis: pomis.samples.total(),
            });
        }
    }
    Ok(report)
}

/// `(k + 1)^n`: every assignment of every variable, or leaving it alone.
pub fn naive_arm_count(n: usize, k: u32) -> Result<u128> {
    u32::try_from(n)
        .ok()
        .and_then(|e| (k as u128 + 1).checked_pow(e))
        .ok_or(Error::Capacity {
            what: "naive arm count",
            required: u128::MAX,
            limit: u128::MAX,
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmsRow {
    pub n: usize,
    pub pomis_arms: usize,
    pub naive_arms: u128,
    pub samples_pomis: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArmsReport {
    pub rows: Vec<ArmsRow>,
    pub log: Vec<String>,
}

impl ArmsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,pomis_arm_count,naive_arm_count,samples_pomis\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.n, r.pomis_arms, r.naive_arms, r.samples_pomis
            );
        }
        out
    }
}

/// Arms of the learned POMIS family against all interventions.
pub fn run_armcount_experiment(cfg: &ExperimentConfig) -> Result<ArmsReport> {
    cfg.validate()?;
    let mut report = ArmsReport::default();
    for (c, cell) in cfg.cells().into_iter().enumerate() {
        let naive_arms = naive_arm_count(cell.0, cfg.discovery.k)?;
        for trial in 0..cfg.trials {
            let seed = trial_seed(cfg.seed, c, trial);
            let inst = generate_instance(cfg, cell, seed, &mut report.log)?;
            let s = learn(&inst, cfg, seed, PairPolicy::Necessary)?;
            report.rows.push(ArmsRow {
                n: cell.0,
                pomis_arms: build_arm_set(&s.family, &s.graph)?.len(),
                naive_arms,
                samples_pomis: s.samples.total(),
            });
        }
    }
    Ok(report)
}

/// Both runs of one regret trial, sampled on a shared round grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrial {
    pub trial: usize,
    pub horizon: u64,
    pub phase_one_pomis: u64,
    pub phase_one_full: u64,
    /// `(round, cumulative regret POMIS-guided, cumulative regret full)`.
    pub curve: Vec<(u64, f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretReport {
    pub trials: Vec<RegretTrial>,
    pub log: Vec<String>,
}

impl RegretReport {
    /// Mean curves over trials, on the rounds every trial reached.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,cum_regret_pomis,cum_regret_full\n");
        let Some(first) = self.trials.first() else {
            return out;
        };
        let shortest = self.trials.iter().map(|t| t.horizon).min().unwrap_or(0);
        let k = self.trials.len() as f64;
        for (i, &(round, _, _)) in first.curve.iter().enumerate() {
            if round > shortest {
                break;
            }
            let rows: Vec<&(u64, f64, f64)> = self
                .trials
                .iter()
                .filter_map(|t| t.curve.get(i).filter(|p| p.0 == round))
                .collect();
            if rows.len() != self.trials.len() {
                break;
            }
            let p = rows.iter().map(|r| r.1).sum::<f64>() / k;
            let f = rows.iter().map(|r| r.2).sum::<f64>() / k;
            let _ = writeln!(out, "{round},{p},{f}");
        }
        out
    }

    pub fn trials_csv(&self) -> String {
        let mut out = String::from(
            "trial,horizon,phase_one_pomis,phase_one_full,round,cum_regret_pomis,cum_regret_full\n",
        );
        for t in &self.trials {
            for &(round, p, f) in &t.curve {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{round},{p},{f}",
                    t.trial, t.horizon, t.phase_one_pomis, t.phase_one_full
                );
            }
        }
        out
    }
}

/// Regret of POMIS-guided against full-latent discovery, each followed
/// by UCB over its learned arms, on aligned seeds. The horizon is
/// `horizon` when given, otherwise `cfg.horizon`, otherwise
/// `cfg.horizon_multiple` times the full run's phase one.
pub fn run_regret_experiment(
    cfg: &ExperimentConfig,
    horizon: Option<u64>,
    stride: u64,
) -> Result<RegretReport> {
    cfg.validate()?;
    let cells = cfg.cells();
    let [cell] = cells[..] else {
        return Err(Error::Config(format!(
            "the regret experiment takes one (n, rho, rho_l) cell, got {}",
            cells.len()
        )));
    };
    let stride = stride.max(1);
    let mut report = RegretReport::default();
    for trial in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, 0, trial);
        let inst = generate_instance(cfg, cell, seed, &mut report.log)?;
        let dc = cfg.discovery_for(inst.graph().max_directed_degree());
        let full: TwoPhaseRun = match horizon.or(cfg.horizon) {
            Some(h) => run_two_phase_with(&inst.scm, dc, h, seed, PairPolicy::All)?,
            None => {
                run_two_phase_scaled(&inst.scm, dc, cfg.horizon_multiple, seed, PairPolicy::All)?
            }
        };
        let h = full.trace.len();
        let pomis = run_two_phase_with(&inst.scm, dc, h, seed, PairPolicy::Necessary)?;
        let curve = full
            .trace
            .curve(stride)
            .into_iter()
            .zip(pomis.trace.curve(stride))
            .map(|((round, f), (_, p))| (round, p, f))
            .collect();
        report.trials.push(RegretTrial {
            trial,
            horizon: h,
            phase_one_pomis: pomis.phase_one_pulls(),
            phase_one_full: full.phase_one_pulls(),
            curve,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n: vec![4],
            trials: 2,
            seed: 11,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn band_is_twice_sample_std() {
        let (m, b) = mean_and_band(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((b - 2.0 * (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_and_band(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn naive_counts() {
        assert_eq!(naive_arm_count(10, 2).unwrap(), 59049);
        assert!(matches!(
            naive_arm_count(200, 2),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn samples_rows_are_deterministic_and_ordered() {
        let cfg = small();
        let a = run_samples_experiment(&cfg).unwrap();
        let b = run_samples_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 2);
        for r in &a.rows {
            assert!(r.observable <= r.pomis);
            assert!(r.pomis <= r.full_latents);
        }
        assert_eq!(a.summary_csv().lines().count(), 2);
    }

    #[test]
    fn two_node_graph_has_two_arms() {
        // A -> Y without a confounder: the parent set is the only POMIS
        // and the empty intervention is dominated
        let cfg = ExperimentConfig {
            n: vec![2],
            rho_l: vec![0.0],
            trials: 1,
            ..ExperimentConfig::default()
        };
        let r = run_armcount_experiment(&cfg).unwrap();
        assert_eq!(r.rows[0].pomis_arms, 2);
        assert_eq!(r.rows[0].naive_arms, 9);
    }

    #[test]
    fn regret_needs_one_cell() {
        let cfg = ExperimentConfig {
            n: vec![3, 4],
            ..small()
        };
        assert!(matches!(
            run_regret_experiment(&cfg, None, 10),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn regret_curves_align() {
        let cfg = ExperimentConfig {
            n: vec![3],
            trials: 1,
            horizon_multiple: 2,
            ..small()
        };
        let r = run_regret_experiment(&cfg, None, 5000).unwrap();
        let t = &r.trials[0];
        assert!(t.phase_one_pomis <= t.phase_one_full);
        assert_eq!(t.curve.last().unwrap().0, t.horizon);
        assert_eq!(r.to_csv().lines().count(), t.curve.len() + 1);
    }
}
