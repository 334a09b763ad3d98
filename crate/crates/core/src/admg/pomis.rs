use std::collections::BTreeSet;

use super::{Admg, VarId, VertexSet};
use crate::error::{Error, Result};

/// Deduplicated collection of POMISs, ordered by [`VertexSet`]'s ordering.
pub type PomisFamily = BTreeSet<VertexSet>;

/// Default cap on the number of vertices whose subsets are enumerated.
pub const DEFAULT_POMIS_LIMIT: usize = 22;

/// Minimal unobserved-confounder territory of `y`.
///
/// Inside `H = G[An(y) ∪ {y}]`, start from `{y}` and alternately close
/// under c-components and descendants until nothing changes.
pub fn muct(g: &Admg, y: VarId) -> VertexSet {
    let h = g.ancestral_closure(VertexSet::singleton(y));
    let mut t = VertexSet::singleton(y);
    loop {
        let grown = g.descendants_within(g.c_component_within(t, h), h);
        if grown == t {
            return t;
        }
        t = grown;
    }
}

/// `Pa(T) \ T` for `T = muct(g, y)`.
pub fn interventional_border(g: &Admg, y: VarId) -> VertexSet {
    let t = muct(g, y);
    g.parents_of(t).difference(t)
}

/// All POMISs of `g` with respect to its reward vertex, using the default
/// enumeration guard.
pub fn enumerate_pomis(g: &Admg) -> Result<PomisFamily> {
    enumerate_pomis_with_limit(g, DEFAULT_POMIS_LIMIT)
}

/// `{ IB(G_{do(W)}, Y) : W ⊆ V \ {Y} }`.
///
/// Intervening on non-ancestors of `Y` cannot change the induced subgraph
/// on `An(Y) ∪ {Y}`, so only subsets of `An(Y)` are walked; `limit` caps
/// `|An(Y)|`.
pub fn enumerate_pomis_with_limit(g: &Admg, limit: usize) -> Result<PomisFamily> {
    let y = g.reward();
    let an = g.ancestors(y);
    if an.len() > limit {
        return Err(Error::Capacity {
            what: "POMIS enumeration vertices",
            required: an.len() as u128,
            limit: limit as u128,
        });
    }
    let mut family = PomisFamily::new();
    for w in an.subsets() {
        family.insert(interventional_border(&g.do_graph(w), y));
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{four_vertex, set};
    use super::*;

    fn family(g: &Admg, sets: &[&[&str]]) -> PomisFamily {
        sets.iter().map(|s| set(g, s)).collect()
    }

    #[test]
    fn muct_examples() {
        let g = four_vertex();
        let y = g.reward();
        assert_eq!(muct(&g, y), g.vertices());
        let v1 = set(&g, &["V1"]);
        assert_eq!(muct(&g.do_graph(v1), y), set(&g, &["Y", "V2"]));

        let plain = Admg::new(&["A", "B", "Y"], "Y", &[("A", "Y"), ("B", "Y")], &[]).unwrap();
        assert_eq!(muct(&plain, 2), VertexSet::singleton(2));
    }

    #[test]
    fn border_examples() {
        let g = four_vertex();
        let y = g.reward();
        assert_eq!(interventional_border(&g, y), VertexSet::empty());
        let v1 = set(&g, &["V1"]);
        assert_eq!(interventional_border(&g.do_graph(v1), y), v1);
        let plain = Admg::new(&["A", "B", "Y"], "Y", &[("A", "Y"), ("B", "Y")], &[]).unwrap();
        assert_eq!(interventional_border(&plain, 2), plain.parents(2));
    }

    #[test]
    fn four_vertex_families() {
        let g = four_vertex();
        let expected = family(&g, &[&[], &["V1"], &["V2"], &["V3"], &["V1", "V2"]]);
        assert_eq!(enumerate_pomis(&g).unwrap(), expected);

        let (v1, v2, v3, y) = (0, 1, 2, 3);
        let g1 = g.with_bidirected(&[(v1, v2), (v1, v3), (v3, y)]);
        assert_eq!(
            enumerate_pomis(&g1).unwrap(),
            family(&g, &[&[], &["V2"], &["V1", "V2"]])
        );
        let g2 = g.with_bidirected(&[(v1, v3), (v2, y), (v3, y)]);
        assert_eq!(
            enumerate_pomis(&g2).unwrap(),
            family(&g, &[&[], &["V1"], &["V2"], &["V1", "V2"]])
        );
        let g3 = g.with_bidirected(&[(v1, v2), (v2, y), (v3, y)]);
        assert_eq!(enumerate_pomis(&g3).unwrap(), expected);
    }

    #[test]
    fn guard_is_enforced() {
        let g = four_vertex();
        assert!(matches!(
            enumerate_pomis_with_limit(&g, 2),
            Err(Error::Capacity { .. })
        ));
    }
}
