use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{compute_budgets, BudgetMode, DiscoveryConfig, SampleBudget};
use super::env::Environment;
use super::hypothesis::{ancestrality_test, latent_test};
use super::store::{InterventionalStore, Stage};
use super::tally::{Estimate, Frequencies, Tally};
use crate::admg::{Admg, VarId, VertexSet};
use crate::error::{Error, Result};
use crate::scm::{Distribution, ExactOracle, Intervention, Scm};

/// Where test statistics come from.
#[derive(Debug, Clone, Copy)]
pub enum Evidence<'a> {
    /// Frequencies of drawn samples, thresholded at half the gaps.
    Empirical,
    /// Exact laws of a known model. Samples are charged to the store but
    /// never drawn, and any difference above `tolerance` counts.
    Exact { scm: &'a Scm, tolerance: f64 },
}

/// Which backgrounds observable-graph learning visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coverage {
    /// The random rounds only.
    #[default]
    Randomized,
    /// The random rounds, then every background they missed.
    Exhaustive,
}

/// Data behind one side of a test.
#[derive(Debug, Clone)]
pub enum Dataset {
    Counts(Tally),
    Exact(Distribution),
}

impl Frequencies for Dataset {
    fn frequency(&self, target: (VarId, u32), given: Option<(VarId, u32)>) -> Estimate {
        match self {
            Dataset::Counts(t) => t.frequency(target, given),
            Dataset::Exact(d) => d.frequency(target, given),
        }
    }
}

/// One sequential discovery run against an environment.
pub struct Discovery<'a, E: Environment> {
    env: &'a mut E,
    cfg: DiscoveryConfig,
    evidence: Evidence<'a>,
    coverage: Coverage,
    skeleton: Admg,
    store: InterventionalStore,
    rng: ChaCha8Rng,
    laws: HashMap<(Intervention, VertexSet), Distribution>,
}

impl<'a, E: Environment> Discovery<'a, E> {
    /// `seed` drives the random backgrounds; sampling randomness belongs to
    /// the environment.
    pub fn new(env: &'a mut E, cfg: DiscoveryConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let skeleton = env.skeleton().clone();
        if let Some(v) = skeleton
            .vertices()
            .iter()
            .find(|&v| skeleton.domain(v) > cfg.k)
        {
            return Err(Error::Config(format!(
                "domain of {} exceeds k = {}",
                skeleton.name(v),
                cfg.k
            )));
        }
        let store = InterventionalStore::new(skeleton.domains());
        Ok(Discovery {
            env,
            cfg,
            evidence: Evidence::Empirical,
            coverage: Coverage::Randomized,
            skeleton,
            store,
            rng: ChaCha8Rng::seed_from_u64(seed),
            laws: HashMap::new(),
        })
    }

    pub fn with_evidence(mut self, evidence: Evidence<'a>) -> Self {
        self.evidence = evidence;
        self
    }

    pub fn with_coverage(mut self, coverage: Coverage) -> Self {
        self.coverage = coverage;
        self
    }

    /// Keep raw samples for CSV export.
    pub fn retaining_raw(mut self) -> Self {
        self.store = self.store.retaining_raw();
        self
    }

    pub fn config(&self) -> &DiscoveryConfig {
        &self.cfg
    }

    pub fn skeleton(&self) -> &Admg {
        &self.skeleton
    }

    pub fn store(&self) -> &InterventionalStore {
        &self.store
    }

    pub fn into_store(self) -> InterventionalStore {
        self.store
    }

    pub fn env(&self) -> &E {
        self.env
    }

    /// Samples drawn or charged so far.
    pub fn samples_spent(&self) -> u64 {
        self.store.total()
    }

    fn gaps(&self) -> (f64, f64) {
        match self.evidence {
            Evidence::Empirical => (self.cfg.epsilon, self.cfg.gamma),
            Evidence::Exact { tolerance, .. } => (2.0 * tolerance, 2.0 * tolerance),
        }
    }

    fn exact_law(&mut self, scm: &Scm, iv: &Intervention, vars: VertexSet) -> Result<Dataset> {
        let key = (iv.clone(), vars);
        if let Some(d) = self.laws.get(&key) {
            return Ok(Dataset::Exact(d.clone()));
        }
        let list: Vec<VarId> = vars.iter().collect();
        let d = ExactOracle::new(scm).marginal(iv, &list)?;
        self.laws.insert(key, d.clone());
        Ok(Dataset::Exact(d))
    }

    fn draw_into_store(&mut self, iv: &Intervention, count: u64, stage: Stage) -> Result<Tally> {
        let mut tally = Tally::new(self.skeleton.domains());
        let mut raw = Vec::new();
        let keep = self.store.retains_raw();
        self.env.draw(iv, count, &mut |s| {
            tally.add(s);
            if keep {
                raw.extend_from_slice(s);
            }
        })?;
        self.store.record(iv, stage, &tally, &raw);
        Ok(tally)
    }

    /// `count` new samples; the test sees only these.
    fn fresh(
        &mut self,
        iv: &Intervention,
        count: u64,
        stage: Stage,
        vars: VertexSet,
    ) -> Result<Dataset> {
        match self.evidence {
            Evidence::Empirical => Ok(Dataset::Counts(self.draw_into_store(iv, count, stage)?)),
            Evidence::Exact { scm, .. } => {
                scm.check_intervention(iv)?;
                self.store.charge(iv, stage, count);
                self.exact_law(scm, iv, vars)
            }
        }
    }

    /// Everything stored under `iv` after topping it up to `target` samples.
    fn topped_up(
        &mut self,
        iv: &Intervention,
        target: u64,
        stage: Stage,
        vars: VertexSet,
    ) -> Result<Dataset> {
        let missing = target.saturating_sub(self.store.count(iv));
        match self.evidence {
            Evidence::Empirical => {
                if missing > 0 {
                    self.draw_into_store(iv, missing, stage)?;
                }
                let entry = self.store.get(iv).expect("dataset was just filled");
                Ok(Dataset::Counts(
                    entry.tally.clone().expect("drawn data has counts"),
                ))
            }
            Evidence::Exact { scm, .. } => {
                scm.check_intervention(iv)?;
                if missing > 0 {
                    self.store.charge(iv, stage, missing);
                }
                self.exact_law(scm, iv, vars)
            }
        }
    }

    /// Transitive closure of `G_{do(w)}` restricted to `scope \ w`, with
    /// `w` held at all zeros. Draws `b` samples of `do(w)` and `a` of every
    /// `do(x = value, w)` for each non-reward `x` in `scope \ w`. Edges that
    /// would close a cycle are dropped.
    pub fn learn_transitive_closure(
        &mut self,
        scope: VertexSet,
        w: VertexSet,
        a: u64,
        b: u64,
        stage: Stage,
    ) -> Result<Admg> {
        let y = self.skeleton.reward();
        if !w.is_subset(scope) {
            return Err(Error::domain("background must lie inside the scope"));
        }
        if w.contains(y) {
            return Err(Error::domain("the reward cannot be part of a background"));
        }
        let (epsilon, _) = self.gaps();
        let free = scope.difference(w);
        let background = Intervention::constant(w, 0);
        let base = self.fresh(&background, b, stage, free)?;
        let mut found = Vec::new();
        for xi in free.without(y) {
            let mut ints = Vec::new();
            for x in 0..self.skeleton.domain(xi) {
                let iv = background.clone().with(xi, x);
                ints.push(self.fresh(&iv, a, stage, free)?);
            }
            for xj in free.without(xi) {
                let dom = self.skeleton.domain(xj);
                if ancestrality_test(&base, &ints, xj, dom, epsilon) {
                    found.push((xi, xj));
                }
            }
        }
        let mut closure = self.skeleton.clone();
        for (u, v) in found {
            let _ = closure.add_edge(u, v);
        }
        Ok(closure)
    }

    /// Union of transitive reductions of closures learned under random
    /// backgrounds. Each non-reward vertex joins a background with
    /// probability `1 - 1/(2 d_max)`.
    pub fn learn_observable_graph(
        &mut self,
        scope: VertexSet,
        budget: &SampleBudget,
    ) -> Result<Admg> {
        let y = self.skeleton.reward();
        let candidates = scope.without(y);
        let keep = 1.0 - 1.0 / (2.0 * self.cfg.d_max as f64);
        let mut g = self.skeleton.clone();
        let mut visited = BTreeSet::new();
        for round in 0..budget.rounds as usize {
            let w: VertexSet = candidates
                .iter()
                .filter(|_| self.rng.random_bool(keep))
                .collect();
            visited.insert(w);
            self.observe_round(scope, w, round, budget, &mut g)?;
        }
        if self.coverage == Coverage::Exhaustive {
            let mut round = budget.rounds as usize;
            for w in candidates.subsets() {
                if visited.insert(w) {
                    self.observe_round(scope, w, round, budget, &mut g)?;
                    round += 1;
                }
            }
        }
        Ok(g)
    }

    fn observe_round(
        &mut self,
        scope: VertexSet,
        w: VertexSet,
        round: usize,
        budget: &SampleBudget,
        g: &mut Admg,
    ) -> Result<()> {
        let closure =
            self.learn_transitive_closure(scope, w, budget.a, budget.b, Stage::Observable(round))?;
        for (u, v) in closure.transitive_reduction().directed_edges() {
            if !g.has_edge(u, v) {
                let _ = g.add_edge(u, v);
            }
        }
        Ok(())
    }

    /// Tests one pair for a confounder and adds `a <-> b` to `g` on success.
    ///
    /// The pair is ordered so the second vertex is not a learned ancestor of
    /// the first. The background is the stored all-zero dataset with the
    /// most samples whose targets cover the pair's other parents and avoid
    /// the pair, or a fresh one on exactly those parents. It is topped up to
    /// `c` samples and each single intervention on the first vertex to `a`.
    pub fn detect_latent_confounder(
        &mut self,
        g: &mut Admg,
        a: VarId,
        b: VarId,
        budget: &SampleBudget,
    ) -> Result<bool> {
        if a == b {
            return Err(Error::domain("a confounder test needs two vertices"));
        }
        let y = self.skeleton.reward();
        let (xi, xj) = if a == y || g.ancestors(a).contains(b) {
            (b, a)
        } else {
            (a, b)
        };
        if xi == y {
            return Ok(false);
        }
        let stage = Stage::Latent(a.min(b), a.max(b));
        let required = g.parents(xi).union(g.parents(xj)).without(xi);
        let pair = VertexSet::singleton(xi).with(xj);
        let mut background = Intervention::constant(required, 0);
        let mut most = 0;
        for (iv, count) in self.store.backgrounds(required, pair) {
            if count > most {
                most = count;
                background = iv.clone();
            }
        }
        let base = self.topped_up(&background, budget.c, stage, pair)?;
        let mut ints = Vec::new();
        for x in 0..self.skeleton.domain(xi) {
            let iv = background.clone().with(xi, x);
            ints.push(self.topped_up(&iv, budget.a, stage, pair)?);
        }
        let (_, gamma) = self.gaps();
        let confounded = latent_test(&ints, &base, xi, xj, self.skeleton.domain(xj), gamma);
        if confounded {
            g.add_bidirected(xi, xj)?;
        }
        Ok(confounded)
    }

    /// Observable graph over every vertex followed by a confounder test on
    /// every unordered pair.
    pub fn learn_causal_graph(&mut self) -> Result<Admg> {
        let scope = self.skeleton.vertices();
        let budget = compute_budgets(&self.cfg, BudgetMode::FullGraph, scope.len());
        let mut g = self.learn_observable_graph(scope, &budget)?;
        for a in scope {
            for b in scope {
                if a < b {
                    self.detect_latent_confounder(&mut g, a, b, &budget)?;
                }
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admg::fixtures::set;
    use crate::discovery::SimulatedEnvironment;
    use crate::examples::{four_vertex_graph, xor_scm};
    use crate::scm::{random_scm, GapParams};

    type Edges = Vec<(VarId, VarId)>;

    fn edges(g: &Admg) -> (Edges, Edges) {
        (g.directed_edges(), g.bidirected_edges())
    }

    #[test]
    fn xor_closure_at_empty_background() {
        let scm = xor_scm();
        let mut env = SimulatedEnvironment::new(scm.clone(), 5);
        let cfg = DiscoveryConfig::default();
        let budget = compute_budgets(&cfg, BudgetMode::ClosureOnly, 3);
        let mut d = Discovery::new(&mut env, cfg, 1).unwrap();
        let all = scm.graph().vertices();
        let closure = d
            .learn_transitive_closure(all, VertexSet::empty(), budget.a, budget.b, Stage::Ancestry)
            .unwrap();
        // X2's law does not move under do(X1) and Y's does not move under do(X2)
        assert_eq!(closure.directed_edges(), vec![(0, 2)]);
        assert_eq!(d.samples_spent(), 2 * budget.a * 2 + budget.b);
        assert_eq!(env.total_pulls(), 2 * budget.a * 2 + budget.b);
    }

    #[test]
    fn reward_only_scope() {
        let scm = xor_scm();
        let mut env = SimulatedEnvironment::new(scm, 5);
        let mut d = Discovery::new(&mut env, DiscoveryConfig::default(), 1).unwrap();
        let g = d
            .learn_transitive_closure(
                VertexSet::singleton(2),
                VertexSet::empty(),
                10,
                7,
                Stage::Ancestry,
            )
            .unwrap();
        assert!(g.directed_edges().is_empty());
        assert_eq!(d.samples_spent(), 7);
    }

    #[test]
    fn reward_in_background_is_rejected() {
        let scm = xor_scm();
        let mut env = SimulatedEnvironment::new(scm, 5);
        let mut d = Discovery::new(&mut env, DiscoveryConfig::default(), 1).unwrap();
        let all = VertexSet::full(3);
        assert!(d
            .learn_transitive_closure(all, VertexSet::singleton(2), 1, 1, Stage::Ancestry)
            .is_err());
    }

    #[test]
    fn xor_pairs_at_oracle_scale() {
        let scm = xor_scm();
        let mut env = SimulatedEnvironment::new(scm.clone(), 5);
        let budget = compute_budgets(&DiscoveryConfig::default(), BudgetMode::FullGraph, 3);
        let mut d = Discovery::new(&mut env, DiscoveryConfig::default(), 1)
            .unwrap()
            .with_evidence(Evidence::Exact {
                scm: &scm,
                tolerance: 1e-9,
            });
        let mut g = scm.graph().empty_like();
        g.add_edge(0, 2).unwrap();
        g.add_edge(1, 2).unwrap();
        assert!(d.detect_latent_confounder(&mut g, 1, 2, &budget).unwrap());
        assert!(!d.detect_latent_confounder(&mut g, 0, 1, &budget).unwrap());
        let before = g.clone();
        assert!(d.detect_latent_confounder(&mut g, 2, 1, &budget).unwrap());
        assert_eq!(g, before);
        assert_eq!(g.bidirected_edges(), vec![(1, 2)]);
        assert_eq!(env.total_pulls(), 0);
    }

    #[test]
    fn xor_causal_graph_at_oracle_scale() {
        let scm = xor_scm();
        let mut env = SimulatedEnvironment::new(scm.clone(), 5);
        let mut d = Discovery::new(&mut env, DiscoveryConfig::default(), 1)
            .unwrap()
            .with_evidence(Evidence::Exact {
                scm: &scm,
                tolerance: 1e-9,
            })
            .with_coverage(Coverage::Exhaustive);
        let g = d.learn_causal_graph().unwrap();
        // X1 -> X2 is invisible under every background, so the closure at
        // the empty background contributes X1 -> Y
        assert_eq!(edges(&g), (vec![(0, 2), (1, 2)], vec![(1, 2)]));
    }

    #[test]
    fn four_vertex_graph_is_recovered_from_samples() {
        let truth = four_vertex_graph();
        let scm = random_scm(&truth, &GapParams::default(), 3).unwrap();
        let cfg = DiscoveryConfig {
            d_max: truth.max_directed_degree(),
            ..Default::default()
        };
        let mut env = SimulatedEnvironment::new(scm, 21);
        let mut d = Discovery::new(&mut env, cfg, 4).unwrap();
        let g = d.learn_causal_graph().unwrap();
        assert_eq!(edges(&g), edges(&truth));
        assert_eq!(d.samples_spent(), env.total_pulls());
        assert_eq!(set(&truth, &["V1", "V2", "V3", "Y"]), g.vertices());
    }

    #[test]
    fn markovian_graph_gains_no_confounders() {
        let truth = crate::experiment::random_graph(5, 0.4, 0.0, 8).unwrap();
        let scm = random_scm(&truth, &GapParams::default(), 8).unwrap();
        let mut env = SimulatedEnvironment::new(scm.clone(), 2);
        let cfg = DiscoveryConfig {
            d_max: truth.max_directed_degree(),
            ..Default::default()
        };
        let mut d = Discovery::new(&mut env, cfg, 2)
            .unwrap()
            .with_evidence(Evidence::Exact {
                scm: &scm,
                tolerance: 1e-9,
            });
        let g = d.learn_causal_graph().unwrap();
        assert!(g.bidirected_edges().is_empty());
    }
}
