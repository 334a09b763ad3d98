use crate::admg::{muct, Admg, VarId, VertexSet};
use crate::error::{Error, Result};

/// Why a sparser graph yields a different POMIS family than the true one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceWitness {
    /// `Z <-> Y` is present in the true graph and missing in the sparse one.
    RewardConfounder(VarId),
    /// Neither graph has `Z <-> Y`, and `X` lies in
    /// `MUCT(G'_{do(Pa(Z) ∪ Bi(Z, G'))}, Y)` while `X <-> Z` is missing in `G'`.
    TerritoryConfounder { z: VarId, x: VarId },
}

/// `Bi(v, g)`: bidirected neighbours of `v`, excluding the reward.
pub fn bi(g: &Admg, v: VarId) -> VertexSet {
    g.spouses(v).without(g.reward())
}

/// The confounder-relevant territory for `z`:
/// `MUCT(G_{do(Pa(z) ∪ Bi(z, G))}, Y)`.
pub fn territory_of(g: &Admg, z: VarId) -> VertexSet {
    let w = g.parents(z).union(bi(g, z));
    muct(&g.do_graph(w), g.reward())
}

/// Checks whether dropping bidirected edges from `g_true` down to
/// `g_sparse` changes the POMIS family, returning the first witness in
/// (Z, then X) order.
pub fn pomis_divergence_witness(
    g_true: &Admg,
    g_sparse: &Admg,
) -> Result<Option<DivergenceWitness>> {
    if g_true.n() != g_sparse.n()
        || g_true.reward() != g_sparse.reward()
        || g_true.directed_edges() != g_sparse.directed_edges()
    {
        return Err(Error::domain(
            "graphs must share vertices, reward and directed edges",
        ));
    }
    for v in 0..g_true.n() {
        if !g_sparse.spouses(v).is_subset(g_true.spouses(v)) {
            return Err(Error::domain(
                "sparse bidirected edges must be a subset of the true ones",
            ));
        }
    }
    let y = g_true.reward();
    let an = g_true.ancestors(y);
    for z in an {
        if g_true.has_bidirected(z, y) && !g_sparse.has_bidirected(z, y) {
            return Ok(Some(DivergenceWitness::RewardConfounder(z)));
        }
    }
    for z in an {
        if g_true.has_bidirected(z, y) {
            continue;
        }
        let territory = territory_of(g_sparse, z);
        let missing = g_true.spouses(z).difference(g_sparse.spouses(z));
        if let Some(x) = territory.intersection(missing).first() {
            return Ok(Some(DivergenceWitness::TerritoryConfounder { z, x }));
        }
    }
    Ok(None)
}
