use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::tally::Tally;
use crate::admg::{Admg, VarId, VertexSet};
use crate::scm::Intervention;

/// Which part of a run produced a batch of samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    /// Ancestor search at the empty background.
    Ancestry,
    /// One random-background round of observable-graph learning.
    Observable(usize),
    /// A confounder test between two vertices.
    Latent(VarId, VarId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    /// Absent when evidence comes from exact laws.
    pub tally: Option<Tally>,
    pub count: u64,
    pub provenance: Vec<(Stage, u64)>,
    /// Row-major raw samples, kept only when retention is enabled.
    pub raw: Vec<u32>,
}

/// Every sample drawn during a run, grouped by intervention. Nothing is
/// ever discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionalStore {
    domains: Vec<u32>,
    entries: BTreeMap<Intervention, Entry>,
    retain_raw: bool,
    total: u64,
}

impl InterventionalStore {
    pub fn new(domains: &[u32]) -> Self {
        InterventionalStore {
            domains: domains.to_vec(),
            entries: BTreeMap::new(),
            retain_raw: false,
            total: 0,
        }
    }

    /// Keep every raw sample for [`InterventionalStore::to_csv`].
    pub fn retaining_raw(mut self) -> Self {
        self.retain_raw = true;
        self
    }

    pub fn retains_raw(&self) -> bool {
        self.retain_raw
    }

    pub fn get(&self, iv: &Intervention) -> Option<&Entry> {
        self.entries.get(iv)
    }

    pub fn count(&self, iv: &Intervention) -> u64 {
        self.entries.get(iv).map_or(0, |e| e.count)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Intervention, &Entry)> {
        self.entries.iter()
    }

    /// Samples attributed to `stage`.
    pub fn spent_on(&self, stage: impl Fn(Stage) -> bool) -> u64 {
        self.entries
            .values()
            .flat_map(|e| &e.provenance)
            .filter(|(s, _)| stage(*s))
            .map(|(_, c)| c)
            .sum()
    }

    fn entry(&mut self, iv: &Intervention, counted: bool) -> &mut Entry {
        let domains = &self.domains;
        self.entries.entry(iv.clone()).or_insert_with(|| Entry {
            tally: counted.then(|| Tally::new(domains)),
            count: 0,
            provenance: Vec::new(),
            raw: Vec::new(),
        })
    }

    fn note(entry: &mut Entry, stage: Stage, count: u64) {
        match entry.provenance.last_mut() {
            Some((s, c)) if *s == stage => *c += count,
            _ => entry.provenance.push((stage, count)),
        }
        entry.count += count;
    }

    /// Adds drawn samples.
    pub fn record(&mut self, iv: &Intervention, stage: Stage, batch: &Tally, raw: &[u32]) {
        let retain = self.retain_raw;
        let domains = self.domains.clone();
        let entry = self.entry(iv, true);
        entry
            .tally
            .get_or_insert_with(|| Tally::new(&domains))
            .merge(batch);
        if retain {
            entry.raw.extend_from_slice(raw);
        }
        Self::note(entry, stage, batch.count());
        self.total += batch.count();
    }

    /// Charges samples that were never materialized.
    pub fn charge(&mut self, iv: &Intervention, stage: Stage, count: u64) {
        let entry = self.entry(iv, false);
        Self::note(entry, stage, count);
        self.total += count;
    }

    /// All-zero background datasets whose targets contain `required` and
    /// avoid `excluded`, with their sample counts.
    pub fn backgrounds(
        &self,
        required: VertexSet,
        excluded: VertexSet,
    ) -> Vec<(&Intervention, u64)> {
        self.entries
            .iter()
            .filter(|(iv, _)| {
                let t = iv.targets();
                required.is_subset(t) && t.is_disjoint(excluded) && iv.iter().all(|(_, x)| x == 0)
            })
            .map(|(iv, e)| (iv, e.count))
            .collect()
    }

    /// `intervention_key,sample_index,var,value`, one row per coordinate of
    /// every retained sample.
    pub fn to_csv(&self, g: &Admg) -> String {
        let mut out = String::from("intervention_key,sample_index,var,value\n");
        let n = self.domains.len();
        for (iv, e) in &self.entries {
            let key = iv.key(g);
            for (i, sample) in e.raw.chunks(n.max(1)).enumerate() {
                for (v, x) in sample.iter().enumerate() {
                    let _ = writeln!(out, "\"{key}\",{i},{},{x}", g.name(v));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::xor_scm;

    fn batch(rows: &[[u32; 3]]) -> (Tally, Vec<u32>) {
        let mut t = Tally::new(&[2, 2, 2]);
        let mut raw = Vec::new();
        for r in rows {
            t.add(r);
            raw.extend_from_slice(r);
        }
        (t, raw)
    }

    #[test]
    fn accumulates_without_loss() {
        let mut store = InterventionalStore::new(&[2, 2, 2]);
        let iv = Intervention::new([(0, 1)]);
        let (t, raw) = batch(&[[1, 0, 1], [1, 1, 1]]);
        store.record(&iv, Stage::Ancestry, &t, &raw);
        store.record(&iv, Stage::Observable(0), &t, &raw);
        store.record(&iv, Stage::Observable(0), &t, &raw);
        let e = store.get(&iv).unwrap();
        assert_eq!(e.count, 6);
        assert_eq!(e.tally.as_ref().unwrap().count(), 6);
        assert_eq!(
            e.provenance,
            vec![(Stage::Ancestry, 2), (Stage::Observable(0), 4)]
        );
        assert_eq!(store.total(), 6);
        assert_eq!(store.spent_on(|s| matches!(s, Stage::Observable(_))), 4);
        assert!(e.raw.is_empty());
    }

    #[test]
    fn background_search() {
        let mut store = InterventionalStore::new(&[2, 2, 2]);
        for iv in [
            Intervention::observational(),
            Intervention::new([(0, 0)]),
            Intervention::new([(0, 1)]),
            Intervention::new([(0, 0), (1, 0)]),
        ] {
            store.charge(&iv, Stage::Ancestry, 1);
        }
        let found: Vec<_> = store
            .backgrounds(VertexSet::singleton(0), VertexSet::singleton(1))
            .into_iter()
            .map(|(iv, _)| iv.clone())
            .collect();
        assert_eq!(found, vec![Intervention::new([(0, 0)])]);
    }

    #[test]
    fn csv_export() {
        let scm = xor_scm();
        let mut store = InterventionalStore::new(&[2, 2, 2]).retaining_raw();
        let (t, raw) = batch(&[[1, 0, 1]]);
        store.record(&Intervention::new([(0, 1)]), Stage::Ancestry, &t, &raw);
        let csv = store.to_csv(scm.graph());
        assert_eq!(
            csv,
            "intervention_key,sample_index,var,value\n\
             \"do(X1=1)\",0,X1,1\n\"do(X1=1)\",0,X2,0\n\"do(X1=1)\",0,Y,1\n"
        );
    }
}
