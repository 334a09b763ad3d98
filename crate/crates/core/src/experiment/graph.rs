use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::admg::{Admg, VarId, VertexSet};
use crate::error::{Error, Result};

/// Random chordal ADMG.
///
/// Vertices are visited in a uniformly random order σ. The m-th vertex
/// (m ≥ 2) draws `max(1, Bin(m − 1, rho))` parents uniformly from its
/// predecessors. The skeleton is then chordalized by eliminating vertices
/// in reverse σ order, fill edges oriented along σ. Each unordered pair
/// gets a bidirected edge with probability `rho_l`. The σ-last vertex is
/// the reward `Y`; the others are named `V0..` by index.
pub fn random_graph(n: usize, rho: f64, rho_l: f64, seed: u64) -> Result<Admg> {
    if n < 2 {
        return Err(Error::Config("random graphs need n >= 2".into()));
    }
    if !(rho > 0.0 && rho <= 1.0) || !(0.0..=1.0).contains(&rho_l) {
        return Err(Error::Config(format!(
            "densities must satisfy 0 < rho <= 1 and 0 <= rho_l <= 1 (got {rho}, {rho_l})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigma: Vec<VarId> = (0..n).collect();
    sigma.shuffle(&mut rng);
    let mut position = vec![0; n];
    for (p, &v) in sigma.iter().enumerate() {
        position[v] = p;
    }

    // undirected adjacency; orientation is always by σ position
    let mut adj = vec![VertexSet::empty(); n];
    for m in 1..n {
        let child = sigma[m];
        let draw = Binomial::new(m as u64, rho)
            .map_err(|e| Error::Config(e.to_string()))?
            .sample(&mut rng) as usize;
        let indegree = draw.max(1);
        for p in index::sample(&mut rng, m, indegree) {
            let parent = sigma[p];
            adj[parent].insert(child);
            adj[child].insert(parent);
        }
    }

    let mut eliminated = VertexSet::empty();
    for &v in sigma.iter().rev() {
        let remaining: Vec<VarId> = adj[v].difference(eliminated).iter().collect();
        for (i, &a) in remaining.iter().enumerate() {
            for &b in &remaining[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        eliminated.insert(v);
    }

    let mut directed = Vec::new();
    for a in 0..n {
        for b in adj[a] {
            if position[a] < position[b] {
                directed.push((a, b));
            }
        }
    }
    let mut bidirected = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(rho_l) {
                bidirected.push((a, b));
            }
        }
    }
    let reward = sigma[n - 1];
    let names = (0..n)
        .map(|v| {
            if v == reward {
                "Y".to_string()
            } else {
                format!("V{v}")
            }
        })
        .collect();
    Admg::from_edges(names, vec![2; n], reward, &directed, &bidirected)
}

/// Every cycle of length ≥ 4 in the undirected skeleton has a chord.
///
/// Checked by maximum cardinality search followed by a perfect elimination
/// ordering test.
pub fn skeleton_is_chordal(g: &Admg) -> bool {
    let n = g.n();
    let adj: Vec<VertexSet> = (0..n).map(|v| g.parents(v).union(g.children(v))).collect();
    let mut weight = vec![0usize; n];
    let mut numbered = VertexSet::empty();
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !numbered.contains(v))
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("vertex left");
        numbered.insert(v);
        order.push(v);
        for u in adj[v].difference(numbered) {
            weight[u] += 1;
        }
    }
    // reverse MCS order is a perfect elimination ordering iff chordal
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    for &v in &order {
        let earlier: Vec<VarId> = adj[v].iter().filter(|&u| pos[u] < pos[v]).collect();
        if let Some(&parent) = earlier.iter().max_by_key(|&&u| pos[u]) {
            for &u in &earlier {
                if u != parent && !adj[parent].contains(u) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_nodes_always_single_edge() {
        for seed in 0..20 {
            let g = random_graph(2, 0.3, 0.0, seed).unwrap();
            assert_eq!(g.directed_edges().len(), 1);
            let (t, h) = g.directed_edges()[0];
            assert_eq!(h, g.reward());
            assert_eq!(g.name(t), "V".to_string() + &t.to_string());
        }
    }

    #[test]
    fn acyclic_chordal_and_reward_is_sink() {
        for seed in 0..100 {
            for n in [3, 5, 8, 10] {
                let g = random_graph(n, 0.4, 0.3, seed).unwrap();
                assert!(g.topological_order().is_some());
                assert!(skeleton_is_chordal(&g), "seed {seed} n {n}");
                assert!(g.children(g.reward()).is_empty());
                assert!(!g.ancestors(g.reward()).is_empty());
            }
        }
    }

    #[test]
    fn zero_confounder_density() {
        for seed in 0..10 {
            assert!(random_graph(7, 0.5, 0.0, seed)
                .unwrap()
                .bidirected_edges()
                .is_empty());
        }
    }

    #[test]
    fn chordality_checker_detects_square() {
        let g = Admg::new(
            &["A", "B", "C", "D"],
            "D",
            &[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")],
            &[],
        )
        .unwrap();
        assert!(!skeleton_is_chordal(&g));
        let chorded = Admg::new(
            &["A", "B", "C", "D"],
            "D",
            &[("A", "B"), ("A", "C"), ("B", "D"), ("C", "D"), ("B", "C")],
            &[],
        )
        .unwrap();
        assert!(skeleton_is_chordal(&chorded));
    }

    #[test]
    fn deterministic_given_seed() {
        assert_eq!(
            random_graph(8, 0.3, 0.3, 42).unwrap(),
            random_graph(8, 0.3, 0.3, 42).unwrap()
        );
    }
}
