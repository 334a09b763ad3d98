//! Acyclic directed mixed graphs and the purely graphical machinery built
//! on them: ancestral relations, closure/reduction, post-intervention
//! graphs, c-components and POMIS enumeration.

mod pomis;
mod set;
pub(crate) mod text;

pub use pomis::{
    enumerate_pomis, enumerate_pomis_with_limit, interventional_border, muct, PomisFamily,
    DEFAULT_POMIS_LIMIT,
};
pub use set::{Iter, Subsets, VarId, VertexSet, MAX_VERTICES};
pub use text::{parse_graph, write_graph};

use crate::error::{Error, Result};

/// Which directed relation [`Admg::relation`] should compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Parents,
    Children,
    Ancestors,
    Descendants,
}

/// Acyclic directed mixed graph with a designated reward vertex.
///
/// Directed edges encode direct causation, bidirected edges encode a latent
/// confounder with exactly two observed children. Bidirected edges are stored
/// symmetrically and reported canonically as `(min, max)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Admg {
    names: Vec<String>,
    domains: Vec<u32>,
    reward: VarId,
    parents: Vec<VertexSet>,
    children: Vec<VertexSet>,
    spouses: Vec<VertexSet>,
}

impl std::fmt::Debug for Admg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let d: Vec<String> = self
            .directed_edges()
            .into_iter()
            .map(|(a, b)| format!("{}->{}", self.names[a], self.names[b]))
            .collect();
        let b: Vec<String> = self
            .bidirected_edges()
            .into_iter()
            .map(|(a, b)| format!("{}<->{}", self.names[a], self.names[b]))
            .collect();
        f.debug_struct("Admg")
            .field("reward", &self.names[self.reward])
            .field("directed", &d)
            .field("bidirected", &b)
            .finish()
    }
}

impl Admg {
    /// Builds a graph over named vertices. Every vertex gets domain size 2
    /// unless set through [`AdmgBuilder::node`].
    pub fn new(
        names: &[&str],
        reward: &str,
        directed: &[(&str, &str)],
        bidirected: &[(&str, &str)],
    ) -> Result<Admg> {
        let mut b = AdmgBuilder::default();
        for n in names {
            b.node(n, 2)?;
        }
        b.reward(reward)?;
        for (t, h) in directed {
            b.edge(t, h)?;
        }
        for (x, y) in bidirected {
            b.bidirected(x, y)?;
        }
        b.build()
    }

    /// Index-based constructor.
    pub fn from_edges(
        names: Vec<String>,
        domains: Vec<u32>,
        reward: VarId,
        directed: &[(VarId, VarId)],
        bidirected: &[(VarId, VarId)],
    ) -> Result<Admg> {
        let n = names.len();
        if n == 0 {
            return Err(Error::domain("graph has no vertices"));
        }
        if n > MAX_VERTICES {
            return Err(Error::Capacity {
                what: "graph vertices",
                required: n as u128,
                limit: MAX_VERTICES as u128,
            });
        }
        if domains.len() != n {
            return Err(Error::domain("one domain size per vertex required"));
        }
        if let Some(v) = domains.iter().position(|&k| k < 1) {
            return Err(Error::domain(format!(
                "vertex {} has empty domain",
                names[v]
            )));
        }
        if reward >= n {
            return Err(Error::domain(format!("reward index {reward} out of range")));
        }
        let mut parents = vec![VertexSet::empty(); n];
        let mut children = vec![VertexSet::empty(); n];
        let mut spouses = vec![VertexSet::empty(); n];
        for &(t, h) in directed {
            if t >= n || h >= n {
                return Err(Error::domain(format!("edge ({t},{h}) out of range")));
            }
            if t == h {
                return Err(Error::domain(format!("self-loop on {}", names[t])));
            }
            parents[h].insert(t);
            children[t].insert(h);
        }
        for &(a, b) in bidirected {
            if a >= n || b >= n {
                return Err(Error::domain(format!("bidirected ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::domain(format!(
                    "bidirected self-loop on {}",
                    names[a]
                )));
            }
            spouses[a].insert(b);
            spouses[b].insert(a);
        }
        let g = Admg {
            names,
            domains,
            reward,
            parents,
            children,
            spouses,
        };
        if g.topological_order().is_none() {
            return Err(Error::domain("directed part contains a cycle"));
        }
        Ok(g)
    }

    /// Same vertices and reward, no edges.
    pub fn empty_like(&self) -> Admg {
        let n = self.n();
        Admg {
            names: self.names.clone(),
            domains: self.domains.clone(),
            reward: self.reward,
            parents: vec![VertexSet::empty(); n],
            children: vec![VertexSet::empty(); n],
            spouses: vec![VertexSet::empty(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    pub fn reward(&self) -> VarId {
        self.reward
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn domain(&self, v: VarId) -> u32 {
        self.domains[v]
    }

    pub fn domains(&self) -> &[u32] {
        &self.domains
    }

    pub fn parents(&self, v: VarId) -> VertexSet {
        self.parents[v]
    }

    pub fn children(&self, v: VarId) -> VertexSet {
        self.children[v]
    }

    /// Vertices joined to `v` by a bidirected edge.
    pub fn spouses(&self, v: VarId) -> VertexSet {
        self.spouses[v]
    }

    /// Union of parents over a set.
    pub fn parents_of(&self, set: VertexSet) -> VertexSet {
        set.iter()
            .fold(VertexSet::empty(), |acc, v| acc.union(self.parents[v]))
    }

    /// Strict ancestors: `v` itself is excluded.
    pub fn ancestors(&self, v: VarId) -> VertexSet {
        reach(&self.parents, VertexSet::singleton(v), self.vertices()).without(v)
    }

    /// Strict descendants: `v` itself is excluded.
    pub fn descendants(&self, v: VarId) -> VertexSet {
        reach(&self.children, VertexSet::singleton(v), self.vertices()).without(v)
    }

    /// `set` together with all of its ancestors.
    pub fn ancestral_closure(&self, set: VertexSet) -> VertexSet {
        reach(&self.parents, set, self.vertices())
    }

    /// `set` together with all descendants reachable inside `within`.
    pub fn descendants_within(&self, set: VertexSet, within: VertexSet) -> VertexSet {
        reach(&self.children, set.intersection(within), within)
    }

    /// Checked relation query; unknown vertices are a domain error.
    pub fn relation(&self, v: VarId, kind: Relation) -> Result<VertexSet> {
        if v >= self.n() {
            return Err(Error::domain(format!("unknown vertex index {v}")));
        }
        Ok(match kind {
            Relation::Parents => self.parents(v),
            Relation::Children => self.children(v),
            Relation::Ancestors => self.ancestors(v),
            Relation::Descendants => self.descendants(v),
        })
    }

    pub fn has_edge(&self, tail: VarId, head: VarId) -> bool {
        self.parents[head].contains(tail)
    }

    pub fn has_bidirected(&self, a: VarId, b: VarId) -> bool {
        self.spouses[a].contains(b)
    }

    /// Directed edges sorted by (tail, head).
    pub fn directed_edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for t in 0..self.n() {
            for h in self.children[t] {
                out.push((t, h));
            }
        }
        out
    }

    /// Bidirected edges as canonical `(min, max)` pairs, sorted.
    pub fn bidirected_edges(&self) -> Vec<(VarId, VarId)> {
        let mut out = Vec::new();
        for a in 0..self.n() {
            for b in self.spouses[a] {
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n())
            .map(|v| {
                self.parents[v]
                    .union(self.children[v])
                    .union(self.spouses[v])
                    .len()
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest number of directed neighbours of any vertex.
    pub fn max_directed_degree(&self) -> usize {
        (0..self.n())
            .map(|v| self.parents[v].union(self.children[v]).len())
            .max()
            .unwrap_or(0)
    }

    /// Kahn order, smallest index first among ready vertices.
    /// `None` when the directed part is cyclic.
    pub fn topological_order(&self) -> Option<Vec<VarId>> {
        let n = self.n();
        let mut remaining: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut ready: VertexSet = (0..n).filter(|&v| remaining[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.first() {
            ready.remove(v);
            order.push(v);
            for c in self.children[v] {
                remaining[c] -= 1;
                if remaining[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Adds a directed edge; fails if it would create a cycle.
    pub fn add_edge(&mut self, tail: VarId, head: VarId) -> Result<()> {
        if tail == head {
            return Err(Error::domain("self-loop"));
        }
        if self.ancestors(tail).contains(head) {
            return Err(Error::domain(format!(
                "edge {}->{} closes a cycle",
                self.names[tail], self.names[head]
            )));
        }
        self.parents[head].insert(tail);
        self.children[tail].insert(head);
        Ok(())
    }

    pub fn add_bidirected(&mut self, a: VarId, b: VarId) -> Result<()> {
        if a == b || a >= self.n() || b >= self.n() {
            return Err(Error::domain("invalid bidirected edge"));
        }
        self.spouses[a].insert(b);
        self.spouses[b].insert(a);
        Ok(())
    }

    pub fn remove_bidirected(&mut self, a: VarId, b: VarId) {
        self.spouses[a].remove(b);
        self.spouses[b].remove(a);
    }

    /// Same vertices and directed edges, bidirected edges replaced.
    pub fn with_bidirected(&self, bidirected: &[(VarId, VarId)]) -> Admg {
        let mut g = self.clone();
        g.spouses = vec![VertexSet::empty(); self.n()];
        for &(a, b) in bidirected {
            g.spouses[a].insert(b);
            g.spouses[b].insert(a);
        }
        g
    }

    /// Directed edge `(u, v)` iff `u` is an ancestor of `v`; bidirected
    /// edges are copied unchanged.
    pub fn transitive_closure(&self) -> Admg {
        let mut g = self.clone();
        for v in 0..self.n() {
            g.parents[v] = self.ancestors(v);
        }
        g.rebuild_children();
        g
    }

    /// Unique minimal directed edge set with the same closure. Bidirected
    /// edges are copied unchanged.
    pub fn transitive_reduction(&self) -> Admg {
        let mut g = self.clone();
        let ancestors: Vec<VertexSet> = (0..self.n()).map(|v| self.ancestors(v)).collect();
        for v in 0..self.n() {
            // u -> v is redundant iff u reaches v through another parent
            let indirect = ancestors[v]
                .iter()
                .fold(VertexSet::empty(), |acc, w| acc.union(ancestors[w]));
            g.parents[v] = ancestors[v].difference(indirect);
        }
        g.rebuild_children();
        g
    }

    /// Post-intervention graph: drop directed edges into `w` and every
    /// bidirected edge touching `w`.
    pub fn do_graph(&self, w: VertexSet) -> Admg {
        let mut g = self.clone();
        for v in w {
            if v < self.n() {
                g.parents[v] = VertexSet::empty();
                g.spouses[v] = VertexSet::empty();
            }
        }
        for v in 0..self.n() {
            g.spouses[v] = g.spouses[v].difference(w);
        }
        g.rebuild_children();
        g
    }

    /// Keep only edges with both endpoints in `keep`. Vertex indices are
    /// preserved; vertices outside `keep` become isolated.
    pub fn restrict_to(&self, keep: VertexSet) -> Admg {
        let mut g = self.clone();
        for v in 0..self.n() {
            if keep.contains(v) {
                g.parents[v] = g.parents[v].intersection(keep);
                g.spouses[v] = g.spouses[v].intersection(keep);
            } else {
                g.parents[v] = VertexSet::empty();
                g.spouses[v] = VertexSet::empty();
            }
        }
        g.rebuild_children();
        g
    }

    /// Maximal bidirected-connected component containing `v` (includes `v`).
    pub fn c_component(&self, v: VarId) -> VertexSet {
        reach(&self.spouses, VertexSet::singleton(v), self.vertices())
    }

    /// Union of c-components of `set`, with bidirected paths confined to `within`.
    pub fn c_component_within(&self, set: VertexSet, within: VertexSet) -> VertexSet {
        reach(&self.spouses, set.intersection(within), within)
    }

    fn rebuild_children(&mut self) {
        let n = self.n();
        self.children = vec![VertexSet::empty(); n];
        for h in 0..n {
            for t in self.parents[h] {
                self.children[t].insert(h);
            }
        }
    }
}

/// Closure of `start` under `adj`, never leaving `within`.
fn reach(adj: &[VertexSet], start: VertexSet, within: VertexSet) -> VertexSet {
    let mut seen = start;
    let mut frontier = start;
    while !frontier.is_empty() {
        let mut next = VertexSet::empty();
        for v in frontier {
            next = next.union(adj[v]);
        }
        next = next.intersection(within).difference(seen);
        seen = seen.union(next);
        frontier = next;
    }
    seen
}

/// Incremental builder keyed by vertex names.
#[derive(Debug, Default, Clone)]
pub struct AdmgBuilder {
    names: Vec<String>,
    domains: Vec<u32>,
    reward: Option<VarId>,
    directed: Vec<(VarId, VarId)>,
    bidirected: Vec<(VarId, VarId)>,
}

impl AdmgBuilder {
    pub fn node(&mut self, name: &str, domain: u32) -> Result<VarId> {
        if self.names.iter().any(|n| n == name) {
            return Err(Error::domain(format!("duplicate vertex {name}")));
        }
        if domain < 1 {
            return Err(Error::domain(format!("vertex {name} has empty domain")));
        }
        self.names.push(name.to_string());
        self.domains.push(domain);
        Ok(self.names.len() - 1)
    }

    pub fn index(&self, name: &str) -> Result<VarId> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::domain(format!("unknown vertex {name}")))
    }

    pub fn reward(&mut self, name: &str) -> Result<()> {
        self.reward = Some(self.index(name)?);
        Ok(())
    }

    pub fn edge(&mut self, tail: &str, head: &str) -> Result<()> {
        let e = (self.index(tail)?, self.index(head)?);
        self.directed.push(e);
        Ok(())
    }

    pub fn bidirected(&mut self, a: &str, b: &str) -> Result<()> {
        let e = (self.index(a)?, self.index(b)?);
        self.bidirected.push(e);
        Ok(())
    }

    pub fn build(self) -> Result<Admg> {
        let reward = self
            .reward
            .ok_or_else(|| Error::domain("no reward vertex declared"))?;
        Admg::from_edges(
            self.names,
            self.domains,
            reward,
            &self.directed,
            &self.bidirected,
        )
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub use crate::examples::four_vertex_graph as four_vertex;

    pub fn set(g: &Admg, names: &[&str]) -> VertexSet {
        names.iter().map(|n| g.index_of(n).unwrap()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn chain() -> Admg {
        Admg::new(&["A", "B", "C"], "C", &[("A", "B"), ("B", "C")], &[]).unwrap()
    }

    #[test]
    fn chain_ancestors() {
        let g = chain();
        assert_eq!(g.ancestors(2), set(&g, &["A", "B"]));
        assert!(!g.ancestors(2).contains(2));
        assert_eq!(g.descendants(0), set(&g, &["B", "C"]));
    }

    #[test]
    fn four_vertex_relations() {
        let g = four_vertex();
        let y = g.reward();
        assert_eq!(
            g.relation(y, Relation::Parents).unwrap(),
            set(&g, &["V1", "V2"])
        );
        assert_eq!(
            g.relation(y, Relation::Ancestors).unwrap(),
            set(&g, &["V1", "V2", "V3"])
        );
        assert_eq!(
            g.relation(y, Relation::Children).unwrap(),
            VertexSet::empty()
        );
        assert!(matches!(
            g.relation(9, Relation::Parents),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn construction_rejects_bad_graphs() {
        assert!(Admg::new(&["A", "B"], "B", &[("A", "B"), ("B", "A")], &[]).is_err());
        assert!(Admg::new(&["A"], "A", &[("A", "A")], &[]).is_err());
        assert!(Admg::new(&["A", "B"], "B", &[], &[("A", "A")]).is_err());
        assert!(Admg::new(&["A", "B"], "Z", &[], &[]).is_err());
    }

    #[test]
    fn bidirected_is_canonical() {
        let a = Admg::new(&["A", "B"], "B", &[], &[("B", "A")]).unwrap();
        let b = Admg::new(&["A", "B"], "B", &[], &[("A", "B")]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bidirected_edges(), vec![(0, 1)]);
    }

    #[test]
    fn closure_of_chain_and_four_vertex() {
        let g = chain().transitive_closure();
        assert_eq!(g.directed_edges(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(g.transitive_closure(), g);

        let f = four_vertex();
        let fc = f.transitive_closure();
        let v3 = f.index_of("V3").unwrap();
        assert!(fc.has_edge(v3, f.reward()));
        assert_eq!(fc.directed_edges().len(), f.directed_edges().len() + 1);
        assert_eq!(fc.bidirected_edges(), f.bidirected_edges());
    }

    #[test]
    fn reduction_removes_shortcut() {
        let g = Admg::new(
            &["A", "B", "C"],
            "C",
            &[("A", "B"), ("B", "C"), ("A", "C")],
            &[],
        )
        .unwrap();
        assert_eq!(
            g.transitive_reduction().directed_edges(),
            vec![(0, 1), (1, 2)]
        );
        let e = Admg::new(&["A", "B"], "B", &[], &[]).unwrap();
        assert_eq!(e.transitive_reduction(), e);
    }

    #[test]
    fn do_graph_four_vertex() {
        let g = four_vertex();
        let v1 = g.index_of("V1").unwrap();
        let d = g.do_graph(VertexSet::singleton(v1));
        assert!(!d.has_edge(g.index_of("V3").unwrap(), v1));
        assert!(d.spouses(v1).is_empty());
        assert!(d.has_edge(v1, g.reward()));
        assert_eq!(d.bidirected_edges().len(), 2);
        assert_eq!(g.do_graph(VertexSet::empty()), g);

        let all_but_y = g.vertices().without(g.reward());
        let d = g.do_graph(all_but_y);
        assert!(d.bidirected_edges().is_empty());
        assert_eq!(d.directed_edges(), vec![(0, 3), (1, 3)]);
    }

    #[test]
    fn c_components() {
        let g = Admg::new(&["X", "Y", "Z"], "Y", &[], &[("X", "Y"), ("Y", "Z")]).unwrap();
        assert_eq!(g.c_component(0), g.vertices());
        let iso = Admg::new(&["A", "B"], "B", &[("A", "B")], &[]).unwrap();
        assert_eq!(iso.c_component(0), VertexSet::singleton(0));
        let f = four_vertex();
        assert_eq!(f.c_component(f.reward()), f.vertices());
    }

    #[test]
    fn add_edge_rejects_cycles() {
        let mut g = chain();
        assert!(g.add_edge(2, 0).is_err());
        assert!(g.add_edge(0, 2).is_ok());
    }
}
