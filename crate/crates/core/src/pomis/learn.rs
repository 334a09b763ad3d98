use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::witness::territory_of;
use crate::admg::{enumerate_pomis, Admg, PomisFamily, VarId, VertexSet};
use crate::discovery::{
    compute_budgets, BudgetMode, Discovery, DiscoveryConfig, Environment, SampleBudget, Stage,
};
use crate::error::Result;

/// One confounder test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerEntry {
    pub z: VarId,
    pub x: VarId,
    pub confounded: bool,
    pub samples_spent: u64,
}

/// Confounder tests in the order they ran. No unordered pair is tested twice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TestLedger {
    entries: Vec<LedgerEntry>,
    tested: BTreeSet<(VarId, VarId)>,
}

impl TestLedger {
    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, a: VarId, b: VarId) -> bool {
        self.tested.contains(&(a.min(b), a.max(b)))
    }

    /// Tested pairs as `(z, x)` in test order.
    pub fn pairs(&self) -> Vec<(VarId, VarId)> {
        self.entries.iter().map(|e| (e.z, e.x)).collect()
    }

    /// Returns false, recording nothing, when the pair was already tested.
    pub fn record(&mut self, entry: LedgerEntry) -> bool {
        if !self
            .tested
            .insert((entry.z.min(entry.x), entry.z.max(entry.x)))
        {
            return false;
        }
        self.entries.push(entry);
        true
    }

    /// `ordinal,Z,X,outcome,samples_spent`.
    pub fn to_csv(&self, g: &Admg) -> String {
        let mut out = String::from("ordinal,Z,X,outcome,samples_spent\n");
        for (i, e) in self.entries.iter().enumerate() {
            let outcome = if e.confounded {
                "confounded"
            } else {
                "unconfounded"
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                i + 1,
                g.name(e.z),
                g.name(e.x),
                outcome,
                e.samples_spent
            );
        }
        out
    }
}

/// Smallest untested `(Z, X)`: `Z` an ancestor of the reward with no
/// `Z <-> Y` in `g`, and `X` in `MUCT(g_{do(Pa(Z) ∪ Bi(Z))}, Y)` other than
/// `Z` and `Y`.
pub fn next_required_pair(g: &Admg, ledger: &TestLedger) -> Option<(VarId, VarId)> {
    let y = g.reward();
    for z in g.ancestors(y) {
        if g.has_bidirected(z, y) {
            continue;
        }
        let candidates = territory_of(g, z).without(y).without(z);
        if let Some(x) = candidates.iter().find(|&x| !ledger.contains(z, x)) {
            return Some((z, x));
        }
    }
    None
}

/// Which confounder pairs the last step tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairPolicy {
    /// Only the pairs that can change the POMIS family.
    #[default]
    Necessary,
    /// Every unordered pair among the reward's ancestors and the reward.
    All,
}

/// Samples spent by each step of phase one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseCounts {
    pub ancestry: u64,
    pub observable: u64,
    pub latent: u64,
}

impl PhaseCounts {
    pub fn total(&self) -> u64 {
        self.ancestry + self.observable + self.latent
    }
}

/// Result of phase one.
#[derive(Debug, Clone, PartialEq)]
pub struct PomisStructure {
    /// Learned graph restricted to the reward's ancestors and the reward.
    pub graph: Admg,
    pub family: PomisFamily,
    pub ledger: TestLedger,
    /// Learned ancestors of the reward.
    pub ancestors: VertexSet,
    pub samples: PhaseCounts,
}

/// Phase one with default evidence and coverage.
pub fn learn_pomis_structure<E: Environment>(
    env: &mut E,
    cfg: DiscoveryConfig,
    seed: u64,
) -> Result<PomisStructure> {
    let mut d = Discovery::new(env, cfg, seed)?;
    learn_pomis_structure_with(&mut d, PairPolicy::Necessary)
}

/// Phase one on a prepared run:
/// ancestors of the reward from one closure at the empty background, the
/// observable graph on those ancestors, a test of every ancestor against
/// the reward, then the pairs chosen by `pairs` until none remain.
pub fn learn_pomis_structure_with<E: Environment>(
    d: &mut Discovery<'_, E>,
    pairs: PairPolicy,
) -> Result<PomisStructure> {
    let cfg = *d.config();
    let skeleton = d.skeleton().clone();
    let y = skeleton.reward();
    let all = skeleton.vertices();

    let first = compute_budgets(&cfg, BudgetMode::ClosureOnly, all.len());
    let closure =
        d.learn_transitive_closure(all, VertexSet::empty(), first.a, first.b, Stage::Ancestry)?;
    let ancestors = closure.ancestors(y);
    let scope = ancestors.with(y);

    let budget = compute_budgets(&cfg, BudgetMode::Pomis, ancestors.len());
    let mut g = d.learn_observable_graph(scope, &budget)?.restrict_to(scope);

    let mut ledger = TestLedger::default();
    for z in ancestors {
        test_pair(d, &mut g, &mut ledger, z, y, &budget)?;
    }
    match pairs {
        PairPolicy::Necessary => {
            while let Some((z, x)) = next_required_pair(&g, &ledger) {
                test_pair(d, &mut g, &mut ledger, z, x, &budget)?;
            }
        }
        PairPolicy::All => {
            for a in ancestors {
                for b in ancestors {
                    if a < b {
                        test_pair(d, &mut g, &mut ledger, a, b, &budget)?;
                    }
                }
            }
        }
    }

    let family = enumerate_pomis(&g)?;
    let store = d.store();
    let samples = PhaseCounts {
        ancestry: store.spent_on(|s| s == Stage::Ancestry),
        observable: store.spent_on(|s| matches!(s, Stage::Observable(_))),
        latent: store.spent_on(|s| matches!(s, Stage::Latent(..))),
    };
    Ok(PomisStructure {
        graph: g,
        family,
        ledger,
        ancestors,
        samples,
    })
}

fn test_pair<E: Environment>(
    d: &mut Discovery<'_, E>,
    g: &mut Admg,
    ledger: &mut TestLedger,
    z: VarId,
    x: VarId,
    budget: &SampleBudget,
) -> Result<()> {
    let before = d.samples_spent();
    let confounded = d.detect_latent_confounder(g, z, x, budget)?;
    ledger.record(LedgerEntry {
        z,
        x,
        confounded,
        samples_spent: d.samples_spent() - before,
    });
    Ok(())
}

/// The first three terms of the phase-one regret bound: sample cost of the
/// ancestor search and of learning the POMIS family, with `ancestors`
/// the size of the reward's ancestor set.
pub fn phase_one_bound(cfg: &DiscoveryConfig, n: usize, ancestors: usize) -> f64 {
    let k = cfg.k as f64;
    let nf = n as f64;
    let scale = (8.0 / cfg.epsilon.powi(2)).max(8.0 / cfg.gamma.powi(2));
    let first = k * nf * scale * (4.0 * nf * nf * k * k / cfg.delta).ln();
    let second = 8.0 / cfg.epsilon.powi(2) * (4.0 * nf * k * k / cfg.delta).ln();
    let b = compute_budgets(cfg, BudgetMode::Pomis, ancestors);
    let an = ancestors.max(2) as f64;
    let third =
        8.0 * b.alpha * cfg.d_max as f64 * (k * b.a as f64 * an + b.b.max(b.c) as f64) * an.ln();
    first + second + third
}
