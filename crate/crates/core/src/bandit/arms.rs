use crate::admg::{Admg, PomisFamily, VarId};
use crate::error::{Error, Result};
use crate::scm::Intervention;

/// Default cap on the size of an arm set.
pub const DEFAULT_ARM_LIMIT: u128 = 1_000_000;

/// One POMIS with one concrete value assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arm {
    pub intervention: Intervention,
}

impl Arm {
    pub fn key(&self, g: &Admg) -> String {
        self.intervention.key(g)
    }
}

pub fn build_arm_set(family: &PomisFamily, g: &Admg) -> Result<Vec<Arm>> {
    build_arm_set_with_limit(family, g, DEFAULT_ARM_LIMIT)
}

/// Every value assignment of every member of `family`, in family order and
/// then lexicographically by value. The empty set yields the single
/// observational arm.
pub fn build_arm_set_with_limit(family: &PomisFamily, g: &Admg, limit: u128) -> Result<Vec<Arm>> {
    let total: u128 = family
        .iter()
        .map(|s| s.iter().map(|v| g.domain(v) as u128).product::<u128>())
        .fold(0u128, |a, b| a.saturating_add(b));
    if total > limit {
        return Err(Error::Capacity {
            what: "arms",
            required: total,
            limit,
        });
    }
    let mut arms = Vec::with_capacity(total as usize);
    for set in family {
        let vars: Vec<VarId> = set.iter().collect();
        let count: usize = vars.iter().map(|&v| g.domain(v) as usize).product();
        for mut idx in 0..count {
            // last variable varies fastest
            let mut values = vec![0u32; vars.len()];
            for k in (0..vars.len()).rev() {
                let r = g.domain(vars[k]) as usize;
                values[k] = (idx % r) as u32;
                idx /= r;
            }
            arms.push(Arm {
                intervention: Intervention::new(vars.iter().copied().zip(values)),
            });
        }
    }
    let mut seen = std::collections::HashSet::new();
    arms.retain(|a| seen.insert(a.intervention.clone()));
    Ok(arms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admg::{enumerate_pomis, VertexSet};
    use crate::examples::four_vertex_graph;

    #[test]
    fn counts() {
        let g = four_vertex_graph();
        let fam: PomisFamily = [
            VertexSet::empty(),
            VertexSet::singleton(0),
            [0, 1].into_iter().collect(),
        ]
        .into_iter()
        .collect();
        let arms = build_arm_set(&fam, &g).unwrap();
        assert_eq!(arms.len(), 7);
        assert_eq!(arms[0].intervention, Intervention::observational());
        assert_eq!(arms[1].intervention, Intervention::new([(0, 0)]));
        assert_eq!(arms[3].intervention, Intervention::new([(0, 0), (1, 0)]));
        assert_eq!(arms[4].intervention, Intervention::new([(0, 0), (1, 1)]));

        let full = enumerate_pomis(&g).unwrap();
        assert_eq!(build_arm_set(&full, &g).unwrap().len(), 11);

        let only_empty: PomisFamily = [VertexSet::empty()].into_iter().collect();
        assert_eq!(build_arm_set(&only_empty, &g).unwrap().len(), 1);
    }

    #[test]
    fn guard() {
        let g = four_vertex_graph();
        let full = enumerate_pomis(&g).unwrap();
        assert!(matches!(
            build_arm_set_with_limit(&full, &g, 10),
            Err(Error::Capacity { required: 11, .. })
        ));
    }
}
