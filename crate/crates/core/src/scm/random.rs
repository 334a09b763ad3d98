use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ExactOracle, Intervention, Mechanism, MechanismInputs, Scm};
use crate::admg::{Admg, VarId, VertexSet};
use crate::error::{Error, Result};

/// Gap requirements a generated instance must meet, and how hard to look
/// for one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub eta: f64,
    pub max_retries: usize,
    /// Up to this many vertices every background set is checked; above it
    /// only the backgrounds the learners start from.
    pub exhaustive_up_to: usize,
    /// Exogenous guard handed to the exact oracle while checking.
    pub exogenous_limit: u128,
    /// Check every vertex instead of the reward's ancestors only.
    pub whole_graph: bool,
}

impl Default for GapParams {
    fn default() -> Self {
        GapParams {
            epsilon: 0.1,
            gamma: 0.1,
            eta: 0.2,
            max_retries: 1000,
            exhaustive_up_to: 7,
            exogenous_limit: 1 << 40,
            whole_graph: false,
        }
    }
}

/// One violated gap requirement, all backgrounds held at zero.
#[derive(Debug, Clone, PartialEq)]
pub enum GapCheck {
    /// `cause` is an ancestor of `effect` once `background` is intervened
    /// on, yet no marginal of `effect` moves by more than epsilon.
    Ancestrality {
        cause: VarId,
        effect: VarId,
        background: VertexSet,
        gap: f64,
    },
    /// `a <-> b` exists but interventional and conditional laws of `b`
    /// differ by at most gamma.
    Latent {
        a: VarId,
        b: VarId,
        background: VertexSet,
        gap: f64,
    },
    /// `P(var = value | do(background))` lies strictly between 0 and eta.
    Floor {
        var: VarId,
        value: u32,
        background: VertexSet,
        prob: f64,
    },
}

impl GapCheck {
    pub fn assumption(&self) -> &'static str {
        match self {
            GapCheck::Ancestrality { .. } => "ancestrality gap",
            GapCheck::Latent { .. } => "latent gap",
            GapCheck::Floor { .. } => "support floor",
        }
    }
}

/// Counts of violations per assumption over a generation run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GapReport {
    pub attempts: usize,
    pub violations: BTreeMap<&'static str, usize>,
}

impl GapReport {
    fn most_violated(&self) -> String {
        self.violations
            .iter()
            .max_by_key(|(_, &c)| c)
            .map(|(name, c)| format!("{name} ({c} of {} attempts)", self.attempts))
            .unwrap_or_else(|| "no attempts".into())
    }
}

fn all_marginals(o: &ExactOracle, iv: &Intervention) -> Result<Vec<Vec<f64>>> {
    let n = o.scm().n();
    let vars: Vec<VarId> = (0..n).collect();
    let joint = o.marginal(iv, &vars)?;
    Ok(vars.iter().map(|&v| joint.marginal(v)).collect())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Vertices the checks cover: `An(Y) ∪ {Y}`, the part of the graph the
/// POMIS learner works on, or everything.
fn checked_scope(g: &Admg, whole_graph: bool) -> VertexSet {
    if whole_graph {
        g.vertices()
    } else {
        g.ancestors(g.reward()).with(g.reward())
    }
}

/// A latent check on an ordered pair under each listed background.
type LatentCheck = (VarId, VarId, Vec<VertexSet>);

/// Backgrounds for the ancestrality and latent checks within `scope`.
fn backgrounds(g: &Admg, scope: VertexSet, exhaustive: bool) -> (Vec<VertexSet>, Vec<LatentCheck>) {
    let y = g.reward();
    let pool = scope.without(y);
    let closure = g.transitive_closure();
    let mut anc = Vec::new();
    if exhaustive {
        anc.extend(pool.subsets());
    } else {
        anc.push(VertexSet::empty());
        for (u, v) in g.directed_edges() {
            if scope.contains(v) {
                anc.push(g.parents(v).without(u));
            }
        }
        anc.sort();
        anc.dedup();
    }
    let mut latent = Vec::new();
    for a in scope {
        for b in scope {
            if b <= a {
                continue;
            }
            let (i, j) = if closure.has_edge(b, a) || a == y {
                (b, a)
            } else {
                (a, b)
            };
            if i == y {
                continue;
            }
            let minimal = g.parents(i).union(g.parents(j)).without(i);
            let free = pool.without(i).without(j).difference(minimal);
            let sets = if exhaustive {
                free.subsets().map(|extra| minimal.union(extra)).collect()
            } else {
                vec![minimal]
            };
            latent.push((i, j, sets));
        }
    }
    (anc, latent)
}

/// First gap violation of `scm`, if any, with every background held at 0.
///
/// Only quantities over `An(Y) ∪ {Y}` are checked unless
/// `params.whole_graph`: ancestrality between every ordered pair under
/// every background avoiding the reward, the support floor for every
/// pair's latent test and the latent gap for every confounded pair. Above
/// `exhaustive_up_to` vertices the backgrounds shrink to the empty set and
/// each edge's co-parents.
pub fn check_gaps(scm: &Scm, params: &GapParams) -> Result<Option<GapCheck>> {
    let g = scm.graph();
    let o = ExactOracle::with_limit(scm, params.exogenous_limit);
    let y = g.reward();
    let scope = checked_scope(g, params.whole_graph);
    let (anc, latent) = backgrounds(g, scope, scope.len() <= params.exhaustive_up_to);
    for w in anc {
        let base_iv = Intervention::constant(w, 0);
        let base = all_marginals(&o, &base_iv)?;
        let mutilated = g.do_graph(w);
        for u in scope.without(y).difference(w) {
            let effects = mutilated.descendants(u).intersection(scope).difference(w);
            if effects.is_empty() {
                continue;
            }
            let mut gaps = vec![0.0f64; g.n()];
            for x in 0..g.domain(u) {
                let moved = all_marginals(&o, &base_iv.clone().with(u, x))?;
                for v in effects {
                    gaps[v] = gaps[v].max(max_abs_diff(&base[v], &moved[v]));
                }
            }
            if let Some(v) = effects.iter().find(|&v| gaps[v] <= params.epsilon) {
                return Ok(Some(GapCheck::Ancestrality {
                    cause: u,
                    effect: v,
                    background: w,
                    gap: gaps[v],
                }));
            }
        }
    }
    for (i, j, sets) in latent {
        let confounded = g.has_bidirected(i, j);
        for w in sets {
            let base_iv = Intervention::constant(w, 0);
            let joint = o.marginal(&base_iv, &[i, j])?;
            let pi = joint.marginal(i);
            for (x, &p) in pi.iter().enumerate() {
                if p > 0.0 && p < params.eta {
                    return Ok(Some(GapCheck::Floor {
                        var: i,
                        value: x as u32,
                        background: w,
                        prob: p,
                    }));
                }
            }
            if !confounded {
                continue;
            }
            let mut gap = 0.0f64;
            for (x, &p) in pi.iter().enumerate() {
                let acted = o.marginal(&base_iv.clone().with(i, x as u32), &[j])?;
                for xj in 0..g.domain(j) {
                    let seen = if p > 0.0 {
                        joint.prob(&[x as u32, xj]) / p
                    } else {
                        0.0
                    };
                    let done = if p > 0.0 { acted.prob(&[xj]) } else { 0.0 };
                    gap = gap.max((done - seen).abs());
                }
            }
            if gap <= params.gamma {
                return Ok(Some(GapCheck::Latent {
                    a: i,
                    b: j,
                    background: w,
                    gap,
                }));
            }
        }
    }
    Ok(None)
}

/// Monotone threshold mechanism xor own noise: with inputs `z_1..z_m`
/// (parents then confounders), `v = [#{k : z_k != 0} >= t] xor noise`.
/// `t` is 1 (an OR) most of the time and otherwise at most `ceil(m / 2)`,
/// which keeps single inputs pivotal against an all-zero background.
fn random_mechanism(inputs: &MechanismInputs, rng: &mut ChaCha8Rng) -> Mechanism {
    let noise_slot = inputs.parents.len();
    let m = inputs.radices.len() - 1;
    let threshold = if m <= 1 || rng.random_bool(0.7) {
        1
    } else {
        rng.random_range(1..=m.div_ceil(2))
    };
    let table = (0..inputs.rows())
        .map(|row| {
            let vals = inputs.decode(row);
            let active = vals
                .iter()
                .enumerate()
                .filter(|&(k, &x)| k != noise_slot && x != 0)
                .count();
            let fired = m > 0 && active >= threshold;
            (fired ^ (vals[noise_slot] != 0)) as u32
        })
        .collect();
    Mechanism { table }
}

/// Mutable parameters of an instance under construction.
struct Draft<'g> {
    graph: &'g Admg,
    layout: Scm,
    noise: Vec<Vec<f64>>,
    confounders: Vec<Vec<f64>>,
    mechanisms: Vec<Mechanism>,
}

impl<'g> Draft<'g> {
    fn new(graph: &'g Admg) -> Result<Self> {
        let n = graph.n();
        let noise = vec![vec![0.5, 0.5]; n];
        let confounders = vec![vec![0.5, 0.5]; graph.bidirected_edges().len()];
        let placeholder = vec![Mechanism { table: vec![] }; n];
        let layout = Scm::from_parts(
            graph.clone(),
            noise.clone(),
            confounders.clone(),
            placeholder,
        )?;
        Ok(Draft {
            graph,
            layout,
            noise,
            confounders,
            mechanisms: vec![Mechanism { table: vec![] }; n],
        })
    }

    fn redraw_node(&mut self, v: VarId, eta: f64, rng: &mut ChaCha8Rng) {
        let q = if self.graph.parents(v).is_empty() {
            rng.random_range(eta..=ROOT_NOISE_MAX.max(eta))
        } else {
            0.0
        };
        self.noise[v] = vec![1.0 - q, q];
        self.mechanisms[v] = random_mechanism(self.layout.inputs(v), rng);
    }

    fn redraw_confounder(&mut self, c: usize, rng: &mut ChaCha8Rng) {
        let p = rng.random_range(CONFOUNDER_MIN..=CONFOUNDER_MAX);
        self.confounders[c] = vec![1.0 - p, p];
    }

    fn redraw_all(&mut self, eta: f64, rng: &mut ChaCha8Rng) {
        for v in 0..self.graph.n() {
            self.redraw_node(v, eta, rng);
        }
        for c in 0..self.confounders.len() {
            self.redraw_confounder(c, rng);
        }
    }

    /// Redraws the parameters the violated check depends on most directly.
    fn repair(&mut self, violation: &GapCheck, eta: f64, rng: &mut ChaCha8Rng) {
        let g = self.graph;
        match *violation {
            GapCheck::Ancestrality { cause, effect, .. } => {
                let between = g.descendants(cause).intersection(g.ancestors(effect));
                for v in between.with(effect) {
                    self.redraw_node(v, eta, rng);
                }
            }
            GapCheck::Latent { a, b, .. } => {
                let c = self.confounder_index(a, b);
                self.redraw_confounder(c, rng);
                self.redraw_node(a, eta, rng);
                self.redraw_node(b, eta, rng);
            }
            GapCheck::Floor { var, .. } => {
                self.redraw_node(var, eta, rng);
                for c in self.layout.inputs(var).confounders.clone() {
                    self.redraw_confounder(c, rng);
                }
            }
        }
    }

    fn confounder_index(&self, a: VarId, b: VarId) -> usize {
        let key = (a.min(b), a.max(b));
        self.layout
            .confounders()
            .iter()
            .position(|c| (c.a, c.b) == key)
            .expect("confounded pair")
    }

    fn build(&self) -> Result<Scm> {
        Scm::from_parts(
            self.graph.clone(),
            self.noise.clone(),
            self.confounders.clone(),
            self.mechanisms.clone(),
        )
    }
}

/// Root noise is drawn from `[eta, ROOT_NOISE_MAX]`, confounders from
/// `[CONFOUNDER_MIN, CONFOUNDER_MAX]`.
const ROOT_NOISE_MAX: f64 = 0.4;
const CONFOUNDER_MIN: f64 = 0.05;
const CONFOUNDER_MAX: f64 = 0.25;

/// Repairs attempted on one draft before starting over from scratch.
const REPAIRS_PER_DRAFT: usize = 25;

/// Random binary SCM over `g` satisfying the gap requirements.
///
/// Root noise and confounders are biased towards 0 and non-root vertices
/// are deterministic given their inputs. Each attempt checks the current
/// draft; a violation redraws the parameters it involves, and every
/// `REPAIRS_PER_DRAFT` attempts the whole draft is redrawn. Deterministic
/// given `seed`.
pub fn random_scm(g: &Admg, params: &GapParams, seed: u64) -> Result<Scm> {
    random_scm_with_report(g, params, seed).map(|(scm, _)| scm)
}

/// As [`random_scm`], also returning how many attempts each assumption
/// rejected.
pub fn random_scm_with_report(g: &Admg, params: &GapParams, seed: u64) -> Result<(Scm, GapReport)> {
    if !(params.eta > 0.0 && params.eta < 0.5) {
        return Err(Error::Config(format!(
            "generation needs 0 < eta < 0.5, got {}",
            params.eta
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GapReport::default();
    let mut draft = Draft::new(g)?;
    for attempt in 0..params.max_retries.max(1) {
        if attempt % REPAIRS_PER_DRAFT == 0 {
            draft.redraw_all(params.eta, &mut rng);
        }
        report.attempts += 1;
        let scm = draft.build()?;
        match check_gaps(&scm, params)? {
            None => return Ok((scm, report)),
            Some(v) => {
                *report.violations.entry(v.assumption()).or_default() += 1;
                draft.repair(&v, params.eta, &mut rng);
            }
        }
    }
    Err(Error::Generation {
        attempts: report.attempts,
        violated: report.most_violated(),
    })
}
