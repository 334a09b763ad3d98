//! Discrete semi-Markovian structural causal models.
//!
//! Every observed node `i` has its own noise variable and one shared
//! confounder variable per incident bidirected edge. Mechanisms are total
//! lookup tables over the input tuple
//! `(parents in index order, own noise, incident confounders in canonical edge order)`,
//! flattened row-major with the first input most significant.

mod exact;
mod random;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::admg::{Admg, VarId, VertexSet};
use crate::error::{Error, Result};

pub use exact::{Distribution, ExactOracle, DEFAULT_EXOGENOUS_LIMIT};
pub use random::{check_gaps, random_scm, random_scm_with_report, GapCheck, GapParams, GapReport};
pub use text::{parse_scm, write_scm};

/// Tolerance for probability tables summing to one.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// Hard intervention: a partial assignment of observed variables.
/// The empty intervention is the observational regime.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Intervention(BTreeMap<VarId, u32>);

impl Intervention {
    pub fn observational() -> Self {
        Intervention(BTreeMap::new())
    }

    pub fn new(assignments: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        Intervention(assignments.into_iter().collect())
    }

    /// Every member of `targets` fixed to `value`.
    pub fn constant(targets: VertexSet, value: u32) -> Self {
        Intervention(targets.iter().map(|v| (v, value)).collect())
    }

    pub fn with(mut self, var: VarId, value: u32) -> Self {
        self.0.insert(var, value);
        self
    }

    pub fn get(&self, var: VarId) -> Option<u32> {
        self.0.get(&var).copied()
    }

    pub fn targets(&self) -> VertexSet {
        self.0.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, u32)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    /// Human-readable key such as `do(X1=1,X2=0)`; `do()` when empty.
    pub fn key(&self, g: &Admg) -> String {
        let parts: Vec<String> = self
            .iter()
            .map(|(v, x)| format!("{}={}", g.name(v), x))
            .collect();
        format!("do({})", parts.join(","))
    }
}

impl fmt::Debug for Intervention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "do(")?;
        for (i, (v, x)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}={x}")?;
        }
        write!(f, ")")
    }
}

/// One full assignment of the observed variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sample(pub Vec<u32>);

impl Sample {
    pub fn get(&self, var: VarId) -> u32 {
        self.0[var]
    }
}

/// Latent variable shared by the two endpoints of a bidirected edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Confounder {
    pub a: VarId,
    pub b: VarId,
    pub probs: Vec<f64>,
}

/// Deterministic lookup table for one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mechanism {
    pub table: Vec<u32>,
}

/// Input layout of one node's mechanism, derived from the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismInputs {
    pub parents: Vec<VarId>,
    /// Indices into [`Scm::confounders`].
    pub confounders: Vec<usize>,
    /// Radix of each input: parents, own noise, confounders.
    pub radices: Vec<usize>,
}

impl MechanismInputs {
    pub fn rows(&self) -> usize {
        self.radices.iter().product()
    }

    /// Decodes a flat row index into per-input values.
    pub fn decode(&self, mut row: usize) -> Vec<usize> {
        let mut out = vec![0; self.radices.len()];
        for (slot, &r) in out.iter_mut().zip(&self.radices).rev() {
            *slot = row % r;
            row /= r;
        }
        out
    }

    pub fn encode(&self, values: &[usize]) -> usize {
        values
            .iter()
            .zip(&self.radices)
            .fold(0, |acc, (&v, &r)| acc * r + v)
    }
}

/// Structural causal model over a ground-truth ADMG.
#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    graph: Admg,
    noise: Vec<Vec<f64>>,
    confounders: Vec<Confounder>,
    mechanisms: Vec<Mechanism>,
    inputs: Vec<MechanismInputs>,
    topo: Vec<VarId>,
}

impl Scm {
    /// Assembles a model without validating it; see [`Scm::validate`].
    ///
    /// `confounders` must follow `graph.bidirected_edges()` order.
    pub fn from_parts(
        graph: Admg,
        noise: Vec<Vec<f64>>,
        confounder_probs: Vec<Vec<f64>>,
        mechanisms: Vec<Mechanism>,
    ) -> Result<Scm> {
        let n = graph.n();
        let edges = graph.bidirected_edges();
        if noise.len() != n || mechanisms.len() != n {
            return Err(Error::domain(
                "one noise table and one mechanism per node required",
            ));
        }
        if confounder_probs.len() != edges.len() {
            return Err(Error::domain(format!(
                "{} confounder tables for {} bidirected edges",
                confounder_probs.len(),
                edges.len()
            )));
        }
        let confounders: Vec<Confounder> = edges
            .iter()
            .zip(confounder_probs)
            .map(|(&(a, b), probs)| Confounder { a, b, probs })
            .collect();
        let inputs = (0..n)
            .map(|v| {
                let parents: Vec<VarId> = graph.parents(v).iter().collect();
                let conf: Vec<usize> = confounders
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.a == v || c.b == v)
                    .map(|(i, _)| i)
                    .collect();
                let mut radices: Vec<usize> =
                    parents.iter().map(|&p| graph.domain(p) as usize).collect();
                radices.push(noise[v].len().max(1));
                radices.extend(conf.iter().map(|&c| confounders[c].probs.len().max(1)));
                MechanismInputs {
                    parents,
                    confounders: conf,
                    radices,
                }
            })
            .collect();
        let topo = graph.topological_order().expect("Admg is acyclic");
        Ok(Scm {
            graph,
            noise,
            confounders,
            mechanisms,
            inputs,
            topo,
        })
    }

    pub fn graph(&self) -> &Admg {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn noise(&self, v: VarId) -> &[f64] {
        &self.noise[v]
    }

    pub fn confounders(&self) -> &[Confounder] {
        &self.confounders
    }

    pub fn mechanism(&self, v: VarId) -> &Mechanism {
        &self.mechanisms[v]
    }

    pub fn inputs(&self, v: VarId) -> &MechanismInputs {
        &self.inputs[v]
    }

    pub fn topological_order(&self) -> &[VarId] {
        &self.topo
    }

    /// Checks every model invariant. On success returns warnings about
    /// declared inputs the mechanism never reads.
    pub fn validate(&self) -> std::result::Result<Vec<String>, Vec<String>> {
        let g = &self.graph;
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        let check_table = |what: String, probs: &[f64], errors: &mut Vec<String>| {
            if probs.is_empty() {
                errors.push(format!("{what}: empty probability table"));
                return;
            }
            if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                errors.push(format!("{what}: invalid probability {p}"));
            }
            let s: f64 = probs.iter().sum();
            if (s - 1.0).abs() > PROB_TOLERANCE {
                errors.push(format!("{what}: probabilities sum to {s}, not 1"));
            }
        };
        if g.domain(g.reward()) != 2 {
            errors.push(format!(
                "reward {} must be binary, has domain {}",
                g.name(g.reward()),
                g.domain(g.reward())
            ));
        }
        for v in 0..g.n() {
            check_table(
                format!("noise of {}", g.name(v)),
                &self.noise[v],
                &mut errors,
            );
        }
        for c in &self.confounders {
            let what = format!("confounder {}<->{}", g.name(c.a), g.name(c.b));
            check_table(what.clone(), &c.probs, &mut errors);
            if !g.has_bidirected(c.a, c.b) {
                errors.push(format!("{what}: no matching bidirected edge"));
            }
        }
        for v in 0..g.n() {
            let inputs = &self.inputs[v];
            let table = &self.mechanisms[v].table;
            if table.len() != inputs.rows() {
                errors.push(format!(
                    "mechanism of {} is not total: {} rows for {} input combinations",
                    g.name(v),
                    table.len(),
                    inputs.rows()
                ));
                continue;
            }
            if let Some(x) = table.iter().find(|&&x| x >= g.domain(v)) {
                errors.push(format!(
                    "mechanism of {} outputs {} outside domain {}",
                    g.name(v),
                    x,
                    g.domain(v)
                ));
            }
            for (slot, label) in self.input_labels(v).into_iter().enumerate() {
                if inputs.radices[slot] > 1 && !self.reads_input(v, slot) {
                    warnings.push(format!("mechanism of {} ignores {}", g.name(v), label));
                }
            }
        }
        if errors.is_empty() {
            Ok(warnings)
        } else {
            Err(errors)
        }
    }

    /// Human-readable label per mechanism input slot.
    pub fn input_labels(&self, v: VarId) -> Vec<String> {
        let g = &self.graph;
        let inputs = &self.inputs[v];
        let mut labels: Vec<String> = inputs
            .parents
            .iter()
            .map(|&p| format!("parent {}", g.name(p)))
            .collect();
        labels.push("own noise".into());
        for &c in &inputs.confounders {
            let c = &self.confounders[c];
            labels.push(format!("confounder {}<->{}", g.name(c.a), g.name(c.b)));
        }
        labels
    }

    /// Whether changing input `slot` alone ever changes the output.
    fn reads_input(&self, v: VarId, slot: usize) -> bool {
        let inputs = &self.inputs[v];
        let table = &self.mechanisms[v].table;
        (0..inputs.rows()).any(|row| {
            let mut vals = inputs.decode(row);
            if vals[slot] != 0 {
                return false;
            }
            (1..inputs.radices[slot]).any(|x| {
                vals[slot] = x;
                table[inputs.encode(&vals)] != table[row]
            })
        })
    }

    /// Reward never intervened, targets known, values within domain.
    pub fn check_intervention(&self, iv: &Intervention) -> Result<()> {
        let g = &self.graph;
        for (v, x) in iv.iter() {
            if v >= g.n() {
                return Err(Error::domain(format!("intervention on unknown vertex {v}")));
            }
            if v == g.reward() {
                return Err(Error::domain("the reward cannot be intervened on"));
            }
            if x >= g.domain(v) {
                return Err(Error::domain(format!(
                    "value {x} outside domain of {}",
                    g.name(v)
                )));
            }
        }
        Ok(())
    }

    /// `count` i.i.d. samples under `do(iv)`.
    pub fn draw<R: Rng + ?Sized>(
        &self,
        iv: &Intervention,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<Sample>> {
        let mut out = Vec::with_capacity(count);
        self.draw_with(iv, count as u64, rng, |s| out.push(Sample(s.to_vec())))?;
        Ok(out)
    }

    /// Streaming form of [`Scm::draw`]; `sink` sees each sample in turn.
    pub fn draw_with<R: Rng + ?Sized>(
        &self,
        iv: &Intervention,
        count: u64,
        rng: &mut R,
        sink: impl FnMut(&[u32]),
    ) -> Result<()> {
        self.draw_with_scratch(iv, count, rng, &mut Scratch::default(), sink)
    }

    /// As [`Scm::draw_with`], reusing buffers across calls.
    pub fn draw_with_scratch<R: Rng + ?Sized>(
        &self,
        iv: &Intervention,
        count: u64,
        rng: &mut R,
        scratch: &mut Scratch,
        mut sink: impl FnMut(&[u32]),
    ) -> Result<()> {
        self.check_intervention(iv)?;
        let n = self.n();
        let Scratch {
            fixed,
            values,
            conf,
            slots,
        } = scratch;
        fixed.clear();
        fixed.extend((0..n).map(|v| iv.get(v)));
        values.clear();
        values.resize(n, 0);
        conf.clear();
        conf.resize(self.confounders.len(), 0);
        for _ in 0..count {
            for (c, slot) in self.confounders.iter().zip(conf.iter_mut()) {
                *slot = sample_index(&c.probs, rng.random());
            }
            for &v in &self.topo {
                if let Some(x) = fixed[v] {
                    values[v] = x;
                    continue;
                }
                let inputs = &self.inputs[v];
                slots.clear();
                slots.extend(inputs.parents.iter().map(|&p| values[p] as usize));
                slots.push(sample_index(&self.noise[v], rng.random()));
                slots.extend(inputs.confounders.iter().map(|&c| conf[c]));
                values[v] = self.mechanisms[v].table[inputs.encode(slots)];
            }
            sink(values);
        }
        Ok(())
    }
}

/// Reusable buffers for repeated small draws.
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    fixed: Vec<Option<u32>>,
    values: Vec<u32>,
    conf: Vec<usize>,
    slots: Vec<usize>,
}

/// Inverse-CDF lookup of a uniform draw in a finite table.
fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len().saturating_sub(1)
}

#[cfg(test)]
pub(crate) mod fixtures {
    pub use crate::examples::xor_scm;
}

#[cfg(test)]
mod tests {
    use super::fixtures::xor_scm;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn xor_scm_validates() {
        assert_eq!(xor_scm().validate(), Ok(vec![]));
    }

    #[test]
    fn unnormalized_table_rejected() {
        let mut scm = xor_scm();
        scm.noise[0] = vec![0.5, 0.4];
        let errs = scm.validate().unwrap_err();
        assert!(errs.iter().any(|e| e.contains("sum to 0.9")), "{errs:?}");
    }

    #[test]
    fn missing_row_rejected() {
        let mut scm = xor_scm();
        scm.mechanisms[1].table.pop();
        let errs = scm.validate().unwrap_err();
        assert!(errs.iter().any(|e| e.contains("not total")), "{errs:?}");
    }

    #[test]
    fn non_binary_reward_rejected() {
        let g =
            Admg::from_edges(vec!["A".into(), "Y".into()], vec![2, 3], 1, &[(0, 1)], &[]).unwrap();
        let scm = Scm::from_parts(
            g,
            vec![vec![1.0], vec![1.0]],
            vec![],
            vec![
                Mechanism { table: vec![0] },
                Mechanism { table: vec![0, 1] },
            ],
        )
        .unwrap();
        assert!(scm
            .validate()
            .unwrap_err()
            .iter()
            .any(|e| e.contains("binary")));
    }

    #[test]
    fn unused_input_warns() {
        let g = Admg::new(&["A", "Y"], "Y", &[("A", "Y")], &[]).unwrap();
        let scm = Scm::from_parts(
            g,
            vec![vec![0.5, 0.5], vec![1.0]],
            vec![],
            vec![
                Mechanism { table: vec![0, 1] },
                Mechanism { table: vec![1, 1] },
            ],
        )
        .unwrap();
        let warnings = scm.validate().unwrap();
        assert_eq!(
            warnings,
            vec!["mechanism of Y ignores parent A".to_string()]
        );
    }

    #[test]
    fn xor_do_x1_gives_reward_one() {
        let scm = xor_scm();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples = scm
            .draw(&Intervention::new([(0, 1)]), 500, &mut rng)
            .unwrap();
        assert!(samples.iter().all(|s| s.get(2) == 1));
    }

    #[test]
    fn xor_observational_y_equals_x1() {
        let scm = xor_scm();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let samples = scm
            .draw(&Intervention::observational(), 1000, &mut rng)
            .unwrap();
        assert!(samples.iter().all(|s| s.get(2) == s.get(0)));
    }

    #[test]
    fn full_intervention_fixes_coordinates() {
        let scm = xor_scm();
        let iv = Intervention::new([(0, 1), (1, 0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in scm.draw(&iv, 200, &mut rng).unwrap() {
            assert_eq!((s.get(0), s.get(1)), (1, 0));
        }
    }

    #[test]
    fn draws_are_deterministic() {
        let scm = xor_scm();
        let a = scm
            .draw(
                &Intervention::observational(),
                50,
                &mut ChaCha8Rng::seed_from_u64(9),
            )
            .unwrap();
        let b = scm
            .draw(
                &Intervention::observational(),
                50,
                &mut ChaCha8Rng::seed_from_u64(9),
            )
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_interventions_rejected() {
        let scm = xor_scm();
        assert!(scm
            .check_intervention(&Intervention::new([(2, 1)]))
            .is_err());
        assert!(scm
            .check_intervention(&Intervention::new([(0, 2)]))
            .is_err());
        assert!(scm
            .check_intervention(&Intervention::new([(7, 0)]))
            .is_err());
    }
}
