use std::collections::HashMap;

use crate::admg::VarId;
use crate::scm::{Distribution, Sample, PROB_TOLERANCE};

/// Cells up to this count are stored densely.
const DENSE_CELLS: u128 = 1 << 12;

/// Joint histogram of full samples. This is a sufficient statistic for
/// every estimate the tests need.
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    radices: Vec<u32>,
    strides: Vec<u128>,
    count: u64,
    cells: Cells,
}

#[derive(Debug, Clone, PartialEq)]
enum Cells {
    Dense(Vec<u64>),
    Sparse(HashMap<u128, u64>),
}

impl Tally {
    pub fn new(domains: &[u32]) -> Self {
        let mut strides = Vec::with_capacity(domains.len());
        let mut total: u128 = 1;
        for &d in domains {
            strides.push(total);
            total = total.saturating_mul(d as u128);
        }
        let cells = if total <= DENSE_CELLS {
            Cells::Dense(vec![0; total as usize])
        } else {
            Cells::Sparse(HashMap::new())
        };
        Tally {
            radices: domains.to_vec(),
            strides,
            count: 0,
            cells,
        }
    }

    fn code(&self, values: &[u32]) -> u128 {
        values
            .iter()
            .zip(&self.strides)
            .map(|(&x, &s)| x as u128 * s)
            .sum()
    }

    fn value(&self, code: u128, var: VarId) -> u32 {
        ((code / self.strides[var]) % self.radices[var] as u128) as u32
    }

    pub fn add(&mut self, values: &[u32]) {
        self.add_many(values, 1);
    }

    fn add_many(&mut self, values: &[u32], times: u64) {
        let code = self.code(values);
        self.add_code(code, times);
    }

    fn add_code(&mut self, code: u128, times: u64) {
        match &mut self.cells {
            Cells::Dense(v) => v[code as usize] += times,
            Cells::Sparse(m) => *m.entry(code).or_insert(0) += times,
        }
        self.count += times;
    }

    pub fn merge(&mut self, other: &Tally) {
        for (code, c) in other.cells() {
            self.add_code(code, c);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn cells(&self) -> Box<dyn Iterator<Item = (u128, u64)> + '_> {
        match &self.cells {
            Cells::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| (i as u128, c)),
            ),
            Cells::Sparse(m) => Box::new(m.iter().map(|(&k, &c)| (k, c))),
        }
    }

    /// Occurrence counts of each value of `var`.
    pub fn marginal(&self, var: VarId) -> Vec<u64> {
        let mut out = vec![0; self.radices[var] as usize];
        for (code, c) in self.cells() {
            out[self.value(code, var) as usize] += c;
        }
        out
    }

    /// Number of samples with `a = x` and `b = y`.
    pub fn joint(&self, a: (VarId, u32), b: (VarId, u32)) -> u64 {
        self.cells()
            .filter(|&(code, _)| self.value(code, a.0) == a.1 && self.value(code, b.0) == b.1)
            .map(|(_, c)| c)
            .sum()
    }
}

/// An empirical or exact probability with the number of samples it rests on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub support: u64,
}

impl Estimate {
    const EMPTY: Estimate = Estimate {
        value: 0.0,
        support: 0,
    };
}

/// Anything that can answer `P(target | given)` within one regime.
pub trait Frequencies {
    fn frequency(&self, target: (VarId, u32), given: Option<(VarId, u32)>) -> Estimate;
}

impl Frequencies for Tally {
    fn frequency(&self, target: (VarId, u32), given: Option<(VarId, u32)>) -> Estimate {
        let (hits, support) = match given {
            None => (self.marginal(target.0)[target.1 as usize], self.count),
            Some(g) => (self.joint(g, target), self.marginal(g.0)[g.1 as usize]),
        };
        if support == 0 {
            return Estimate::EMPTY;
        }
        Estimate {
            value: hits as f64 / support as f64,
            support,
        }
    }
}

/// Exact laws report unbounded support for events of positive probability.
impl Frequencies for Distribution {
    fn frequency(&self, target: (VarId, u32), given: Option<(VarId, u32)>) -> Estimate {
        let pos = |v: VarId| {
            self.vars()
                .iter()
                .position(|&u| u == v)
                .expect("variable not covered by distribution")
        };
        let t = pos(target.0);
        let Some(g) = given else {
            return Estimate {
                value: self.marginal(target.0)[target.1 as usize],
                support: u64::MAX,
            };
        };
        let gi = pos(g.0);
        let (mut num, mut den) = (0.0, 0.0);
        for (values, p) in self.iter() {
            if values[gi] == g.1 {
                den += p;
                if values[t] == target.1 {
                    num += p;
                }
            }
        }
        if den <= PROB_TOLERANCE {
            return Estimate::EMPTY;
        }
        Estimate {
            value: num / den,
            support: u64::MAX,
        }
    }
}

/// Empirical `P̂(target)` or `P̂(target | condition)`. A condition that never
/// occurs yields estimate 0 with support 0.
pub fn estimate(
    samples: &[Sample],
    target: (VarId, u32),
    condition: Option<(VarId, u32)>,
) -> Estimate {
    let mut support = 0u64;
    let mut hits = 0u64;
    for s in samples {
        if condition.is_some_and(|(v, x)| s.get(v) != x) {
            continue;
        }
        support += 1;
        if s.get(target.0) == target.1 {
            hits += 1;
        }
    }
    if support == 0 {
        return Estimate::EMPTY;
    }
    Estimate {
        value: hits as f64 / support as f64,
        support,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::xor_scm;
    use crate::scm::{ExactOracle, Intervention};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn all_ones() {
        let samples = vec![Sample(vec![0, 1]); 5];
        assert_eq!(estimate(&samples, (1, 1), None).value, 1.0);
    }

    #[test]
    fn empty_condition() {
        let samples = vec![Sample(vec![0, 1]); 5];
        assert_eq!(estimate(&samples, (1, 1), Some((0, 1))), Estimate::EMPTY);
    }

    #[test]
    fn xor_reward_under_do_x1() {
        let scm = xor_scm();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let iv = Intervention::new([(0, 1)]);
        let samples = scm.draw(&iv, 10_000, &mut rng).unwrap();
        let p = estimate(&samples, (2, 1), None).value;
        assert!((0.99..=1.0).contains(&p));
    }

    #[test]
    fn tally_agrees_with_sample_estimates() {
        let scm = xor_scm();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples = scm
            .draw(&Intervention::observational(), 2000, &mut rng)
            .unwrap();
        let mut dense = Tally::new(&[2, 2, 2]);
        // 13 binary coordinates forces the sparse layout
        let mut sparse = Tally::new(&[2; 13]);
        for s in &samples {
            dense.add(&s.0);
            let mut wide = s.0.clone();
            wide.resize(13, 0);
            sparse.add(&wide);
        }
        for (t, g) in [
            ((2, 1), None),
            ((1, 0), Some((0, 1))),
            ((2, 1), Some((1, 0))),
        ] {
            let e = estimate(&samples, t, g);
            assert_eq!(dense.frequency(t, g), e);
            assert_eq!(sparse.frequency(t, g), e);
        }
        let mut merged = Tally::new(&[2, 2, 2]);
        merged.merge(&dense);
        merged.merge(&dense);
        assert_eq!(merged.count(), 4000);
        assert_eq!(
            merged.frequency((2, 1), None).value,
            dense.frequency((2, 1), None).value
        );
    }

    #[test]
    fn exact_frequencies() {
        let scm = xor_scm();
        let oracle = ExactOracle::new(&scm);
        let d = oracle
            .marginal(&Intervention::observational(), &[1, 2])
            .unwrap();
        let e = d.frequency((2, 1), Some((1, 1)));
        assert!((e.value - 0.5).abs() < 1e-12);
        assert_eq!(e.support, u64::MAX);
        let d = oracle
            .marginal(&Intervention::new([(0, 1)]), &[0, 2])
            .unwrap();
        assert_eq!(d.frequency((2, 1), Some((0, 0))).support, 0);
    }
}
