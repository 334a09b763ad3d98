use std::collections::HashMap;

use super::{Intervention, Scm};
use crate::admg::{enumerate_pomis, VarId, VertexSet};
use crate::bandit::build_arm_set;
use crate::error::{Error, Result};

/// Default cap on the product of exogenous domain sizes an exact query may
/// range over.
pub const DEFAULT_EXOGENOUS_LIMIT: u128 = 1 << 24;

/// Exact joint law of a few observed variables, stored densely in
/// row-major order over their domains.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    vars: Vec<VarId>,
    radices: Vec<usize>,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of the joint assignment `values`, ordered as [`Self::vars`].
    pub fn prob(&self, values: &[u32]) -> f64 {
        let idx = values
            .iter()
            .zip(&self.radices)
            .fold(0, |acc, (&v, &r)| acc * r + v as usize);
        self.probs[idx]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Marginal table of one of the variables.
    pub fn marginal(&self, var: VarId) -> Vec<f64> {
        let pos = self
            .vars
            .iter()
            .position(|&v| v == var)
            .expect("variable not in distribution");
        let stride: usize = self.radices[pos + 1..].iter().product();
        let mut out = vec![0.0; self.radices[pos]];
        for (idx, p) in self.probs.iter().enumerate() {
            out[(idx / stride) % self.radices[pos]] += p;
        }
        out
    }

    /// Iterates `(assignment, probability)` over the support.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(mut idx, &p)| {
                let mut vals = vec![0u32; self.radices.len()];
                for (slot, &r) in vals.iter_mut().zip(&self.radices).rev() {
                    *slot = (idx % r) as u32;
                    idx /= r;
                }
                (vals, p)
            })
    }
}

/// Exact interventional probabilities by enumeration of the exogenous
/// variables.
///
/// Nodes are eliminated in topological order over the ancestral set of the
/// queried variables in the mutilated graph. Each confounder is summed in
/// when its first child is reached and marginalized after its last one, so
/// the working table stays small even when the exogenous product is large.
#[derive(Debug, Clone, Copy)]
pub struct ExactOracle<'a> {
    scm: &'a Scm,
    limit: u128,
}

const UNSET: u32 = u32::MAX;

impl<'a> ExactOracle<'a> {
    pub fn new(scm: &'a Scm) -> Self {
        Self::with_limit(scm, DEFAULT_EXOGENOUS_LIMIT)
    }

    pub fn with_limit(scm: &'a Scm, limit: u128) -> Self {
        ExactOracle { scm, limit }
    }

    pub fn scm(&self) -> &'a Scm {
        self.scm
    }

    /// Joint law of `vars` under `do(iv)`.
    pub fn marginal(&self, iv: &Intervention, vars: &[VarId]) -> Result<Distribution> {
        let scm = self.scm;
        let g = scm.graph();
        scm.check_intervention(iv)?;
        if let Some(&v) = vars.iter().find(|&&v| v >= g.n()) {
            return Err(Error::domain(format!("unknown vertex {v}")));
        }
        let targets = iv.targets();
        let keep: VertexSet = vars.iter().copied().collect();
        let mutilated = g.do_graph(targets);
        let relevant = mutilated.ancestral_closure(keep);
        let free = relevant.difference(targets);

        let nconf = scm.confounders().len();
        let conf_live: Vec<bool> = scm
            .confounders()
            .iter()
            .map(|c| free.contains(c.a) || free.contains(c.b))
            .collect();
        let mut exogenous: u128 = 1;
        for v in free {
            exogenous = exogenous.saturating_mul(scm.noise(v).len() as u128);
        }
        for (c, live) in scm.confounders().iter().zip(&conf_live) {
            if *live {
                exogenous = exogenous.saturating_mul(c.probs.len() as u128);
            }
        }
        if exogenous > self.limit {
            return Err(Error::Capacity {
                what: "exogenous configurations",
                required: exogenous,
                limit: self.limit,
            });
        }

        let order: Vec<VarId> = scm
            .topological_order()
            .iter()
            .copied()
            .filter(|&v| relevant.contains(v))
            .collect();
        // last position at which each node / confounder is still read
        let mut node_last = vec![usize::MAX; g.n()];
        let mut conf_last = vec![usize::MAX; nconf];
        for (pos, &v) in order.iter().enumerate() {
            if targets.contains(v) {
                continue;
            }
            for p in mutilated.parents(v) {
                node_last[p] = pos;
            }
            for &c in &scm.inputs(v).confounders {
                conf_last[c] = pos;
            }
        }

        let mut introduced = vec![false; nconf];
        let mut table: HashMap<Vec<u32>, f64> = HashMap::new();
        table.insert(vec![UNSET; g.n() + nconf], 1.0);
        let mut slots = Vec::new();
        for (pos, &v) in order.iter().enumerate() {
            let mut next: HashMap<Vec<u32>, f64> = HashMap::with_capacity(table.len() * 2);
            if let Some(x) = iv.get(v) {
                for (mut state, p) in table {
                    state[v] = x;
                    *next.entry(state).or_default() += p;
                }
            } else {
                let inputs = scm.inputs(v);
                let mech = &scm.mechanism(v).table;
                // introduce confounders first read here
                let mut expanded = table;
                for &c in &inputs.confounders {
                    if introduced[c] {
                        continue;
                    }
                    introduced[c] = true;
                    let probs = &scm.confounders()[c].probs;
                    let mut grown = HashMap::with_capacity(expanded.len() * probs.len());
                    for (state, p) in expanded {
                        for (val, &q) in probs.iter().enumerate() {
                            if q == 0.0 {
                                continue;
                            }
                            let mut s = state.clone();
                            s[g.n() + c] = val as u32;
                            *grown.entry(s).or_default() += p * q;
                        }
                    }
                    expanded = grown;
                }
                let noise = scm.noise(v);
                for (state, p) in expanded {
                    for (e, &q) in noise.iter().enumerate() {
                        if q == 0.0 {
                            continue;
                        }
                        slots.clear();
                        slots.extend(inputs.parents.iter().map(|&u| state[u] as usize));
                        slots.push(e);
                        slots.extend(
                            inputs
                                .confounders
                                .iter()
                                .map(|&c| state[g.n() + c] as usize),
                        );
                        let mut s = state.clone();
                        s[v] = mech[inputs.encode(&slots)];
                        *next.entry(s).or_default() += p * q;
                    }
                }
            }
            // forget what no later node reads
            let mut forget: Vec<usize> = Vec::new();
            for &u in &order[..=pos] {
                if !keep.contains(u) && (node_last[u] == usize::MAX || node_last[u] <= pos) {
                    forget.push(u);
                }
            }
            for c in 0..nconf {
                if conf_live[c] && conf_last[c] == pos {
                    forget.push(g.n() + c);
                }
            }
            table = if forget.is_empty() {
                next
            } else {
                let mut merged = HashMap::with_capacity(next.len());
                for (mut state, p) in next {
                    for &i in &forget {
                        state[i] = UNSET;
                    }
                    *merged.entry(state).or_default() += p;
                }
                merged
            };
        }

        let radices: Vec<usize> = vars.iter().map(|&v| g.domain(v) as usize).collect();
        let mut probs = vec![0.0; radices.iter().product()];
        for (state, p) in table {
            let idx = vars
                .iter()
                .zip(&radices)
                .fold(0, |acc, (&v, &r)| acc * r + state[v] as usize);
            probs[idx] += p;
        }
        Ok(Distribution {
            vars: vars.to_vec(),
            radices,
            probs,
        })
    }

    /// Full joint law of all observed variables under `do(iv)`.
    pub fn exact_distribution(&self, iv: &Intervention) -> Result<Distribution> {
        let all: Vec<VarId> = (0..self.scm.n()).collect();
        self.marginal(iv, &all)
    }

    /// `P(var = value | do(iv))`.
    pub fn probability(&self, iv: &Intervention, var: VarId, value: u32) -> Result<f64> {
        Ok(self.marginal(iv, &[var])?.prob(&[value]))
    }

    /// `P(target | given, do(iv))`.
    pub fn exact_conditional(
        &self,
        target: (VarId, u32),
        given: (VarId, u32),
        iv: &Intervention,
    ) -> Result<f64> {
        if target.0 == given.0 {
            let p = self.probability(iv, given.0, given.1)?;
            if p <= 0.0 {
                return Err(Error::domain("conditioning event has probability zero"));
            }
            return Ok(if target.1 == given.1 { 1.0 } else { 0.0 });
        }
        let joint = self.marginal(iv, &[given.0, target.0])?;
        let denom = joint.marginal(given.0)[given.1 as usize];
        if denom <= 0.0 {
            return Err(Error::domain("conditioning event has probability zero"));
        }
        Ok(joint.prob(&[given.1, target.1]) / denom)
    }

    /// `E[Y | do(iv)] = P(Y = 1 | do(iv))`.
    pub fn expected_reward(&self, iv: &Intervention) -> Result<f64> {
        self.probability(iv, self.scm.graph().reward(), 1)
    }

    /// Best arm over all value assignments of the true graph's POMISs.
    /// Ties go to the earliest arm in arm-set order.
    pub fn oracle_optimum(&self) -> Result<(f64, Intervention)> {
        let family = enumerate_pomis(self.scm.graph())?;
        let arms = build_arm_set(&family, self.scm.graph())?;
        let mut best: Option<(f64, Intervention)> = None;
        for arm in arms {
            let mu = self.expected_reward(&arm.intervention)?;
            if best.as_ref().is_none_or(|(b, _)| mu > *b) {
                best = Some((mu, arm.intervention));
            }
        }
        best.ok_or_else(|| Error::domain("empty arm set"))
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::xor_scm;
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn xor_rewards() {
        let scm = xor_scm();
        let o = ExactOracle::new(&scm);
        let r = |iv: Intervention| o.expected_reward(&iv).unwrap();
        assert!((r(Intervention::new([(0, 1)])) - 1.0).abs() < TOL);
        assert!(r(Intervention::new([(0, 0)])).abs() < TOL);
        assert!((r(Intervention::new([(1, 0)])) - 0.5).abs() < TOL);
        assert!((r(Intervention::new([(1, 1)])) - 0.5).abs() < TOL);
        assert!((r(Intervention::observational()) - 0.5).abs() < TOL);
    }

    #[test]
    fn xor_do_see_difference() {
        let scm = xor_scm();
        let o = ExactOracle::new(&scm);
        let do_x1 = Intervention::new([(0, 1)]);
        let see = o.exact_conditional((2, 1), (1, 1), &do_x1).unwrap();
        assert!((see - 1.0).abs() < TOL);
        let act = o.expected_reward(&do_x1.clone().with(1, 1)).unwrap();
        assert!((act - 0.5).abs() < TOL);
    }

    #[test]
    fn xor_marginals_do_not_move_at_empty_background() {
        // X1 -> X2 and X2 -> Y leave no trace in single-variable marginals
        // when nothing else is held fixed
        let scm = xor_scm();
        let o = ExactOracle::new(&scm);
        for x in 0..2 {
            let p = o.probability(&Intervention::new([(0, x)]), 1, 1).unwrap();
            assert!((p - 0.5).abs() < TOL);
        }
        assert!((o.probability(&Intervention::observational(), 1, 1).unwrap() - 0.5).abs() < TOL);
    }

    #[test]
    fn distributions_sum_to_one() {
        let scm = xor_scm();
        let o = ExactOracle::new(&scm);
        for iv in [
            Intervention::observational(),
            Intervention::new([(0, 0)]),
            Intervention::new([(1, 1)]),
            Intervention::new([(0, 1), (1, 0)]),
        ] {
            let d = o.exact_distribution(&iv).unwrap();
            assert!((d.total() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn observational_joint_is_y_equals_x1() {
        let scm = xor_scm();
        let d = ExactOracle::new(&scm)
            .exact_distribution(&Intervention::observational())
            .unwrap();
        for (vals, _) in d.iter() {
            assert_eq!(vals[0], vals[2]);
        }
    }

    #[test]
    fn zero_probability_condition_rejected() {
        let scm = xor_scm();
        let o = ExactOracle::new(&scm);
        let iv = Intervention::new([(0, 1)]);
        assert!(o.exact_conditional((2, 1), (0, 0), &iv).is_err());
    }

    #[test]
    fn capacity_guard() {
        let scm = xor_scm();
        let o = ExactOracle::with_limit(&scm, 2);
        assert!(matches!(
            o.expected_reward(&Intervention::observational()),
            Err(Error::Capacity { .. })
        ));
        // do(X2) cuts X1 and the confounder out of Y's relevant set
        assert!(o.expected_reward(&Intervention::new([(1, 0)])).is_ok());
    }

    #[test]
    fn xor_optimum() {
        let scm = xor_scm();
        let (mu, arm) = ExactOracle::new(&scm).oracle_optimum().unwrap();
        assert!((mu - 1.0).abs() < TOL);
        assert_eq!(arm, Intervention::new([(0, 1)]));
    }
}
