//! Uniform random walks and their anonymization.
//!
//! An anonymous walk replaces each node by the position of its first
//! appearance among the distinct nodes of the walk, so `A B C A E` becomes
//! `0 1 2 0 3`. Walks from node `v` draw from ChaCha stream `v` of the
//! configured seed, which makes every per-node batch reproducible no matter
//! which thread runs it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TpmError};
use crate::graph::Graph;

/// Walk sampling parameters: `walks_per_node` walks of `walk_length` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            walks_per_node: 20,
            walk_length: 10,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn new(walks_per_node: usize, walk_length: usize, seed: u64) -> Result<Self> {
        let config = Self {
            walks_per_node,
            walk_length,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node == 0 {
            return Err(TpmError::Config("walks_per_node must be >= 1".into()));
        }
        if self.walk_length == 0 {
            return Err(TpmError::Config("walk_length must be >= 1".into()));
        }
        Ok(())
    }

    /// Side length of the per-node matrix, `walk_length + 1`.
    pub fn steps(&self) -> usize {
        self.walk_length + 1
    }

    /// Length of a flattened embedding vector, `(walk_length + 1)^2`.
    pub fn dim(&self) -> usize {
        self.steps() * self.steps()
    }

    /// The generator for walks started at `node`.
    pub fn node_rng(&self, node: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(node as u64);
        rng
    }
}

/// Node sequence of a walk, start node included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub nodes: Vec<usize>,
}

/// First-occurrence indices of a walk.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnonymousWalk {
    pub indices: Vec<usize>,
}

impl AnonymousWalk {
    /// Number of distinct nodes the walk visited.
    pub fn distinct(&self) -> usize {
        self.indices.iter().max().map_or(0, |&k| k + 1)
    }
}

/// Writes a `length`-step walk from `start` into `out` (cleared first).
/// Each step picks uniformly among the current node's neighbors. An isolated
/// start stays in place.
pub fn walk_into<R: Rng + ?Sized>(
    graph: &Graph,
    start: usize,
    length: usize,
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    out.clear();
    out.push(start);
    if graph.degree(start) == 0 {
        out.resize(length + 1, start);
        return;
    }
    let mut current = start;
    for _ in 0..length {
        let neighbors = graph.neighbors(current);
        current = neighbors[rng.random_range(0..neighbors.len())];
        out.push(current);
    }
}

pub fn random_walk<R: Rng + ?Sized>(
    graph: &Graph,
    start: usize,
    length: usize,
    rng: &mut R,
) -> Walk {
    let mut nodes = Vec::with_capacity(length + 1);
    walk_into(graph, start, length, rng, &mut nodes);
    Walk { nodes }
}

/// Anonymizes `nodes` into `out`, using `seen` as scratch space.
pub(crate) fn anonymize_into(nodes: &[usize], seen: &mut Vec<usize>, out: &mut Vec<usize>) {
    seen.clear();
    out.clear();
    for &node in nodes {
        let index = match seen.iter().position(|&s| s == node) {
            Some(i) => i,
            None => {
                seen.push(node);
                seen.len() - 1
            }
        };
        out.push(index);
    }
}

pub fn anonymize(walk: &Walk) -> AnonymousWalk {
    let mut seen = Vec::new();
    let mut indices = Vec::with_capacity(walk.nodes.len());
    anonymize_into(&walk.nodes, &mut seen, &mut indices);
    AnonymousWalk { indices }
}

/// The `walks_per_node` anonymous walks started at `start`.
pub fn walk_batch(graph: &Graph, start: usize, config: &WalkConfig) -> Vec<AnonymousWalk> {
    let mut rng = config.node_rng(start);
    let mut nodes = Vec::with_capacity(config.steps());
    let mut seen = Vec::with_capacity(config.steps());
    (0..config.walks_per_node)
        .map(|_| {
            walk_into(graph, start, config.walk_length, &mut rng, &mut nodes);
            let mut indices = Vec::with_capacity(config.steps());
            anonymize_into(&nodes, &mut seen, &mut indices);
            AnonymousWalk { indices }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;
    use proptest::prelude::*;

    fn walk_of(ids: &crate::graph::NodeIdMap, names: &str) -> Walk {
        Walk {
            nodes: names.split(',').map(|n| ids.get(n).unwrap()).collect(),
        }
    }

    #[test]
    fn anonymizes_example_walks() {
        let (_, ids) = example_graph();
        let w1 = anonymize(&walk_of(&ids, "A,B,C,A,E"));
        let w2 = anonymize(&walk_of(&ids, "A,C,D,C,A"));
        let w3 = anonymize(&walk_of(&ids, "A,B,D,B,A"));
        assert_eq!(w1.indices, vec![0, 1, 2, 0, 3]);
        assert_eq!(w2.indices, vec![0, 1, 2, 1, 0]);
        assert_eq!(w2, w3);
        assert_eq!(w1.distinct(), 4);
    }

    #[test]
    fn forced_walk_on_an_edge() {
        let g = Graph::from_edges(2, [(0, 1)]).0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_walk(&g, 0, 3, &mut rng).nodes, vec![0, 1, 0, 1]);
        let config = WalkConfig::new(3, 3, 9).unwrap();
        let batch = walk_batch(&g, 0, &config);
        assert_eq!(batch.len(), 3);
        assert!(batch.iter().all(|w| w.indices == [0, 1, 0, 1]));
    }

    #[test]
    fn isolated_start_stays_put() {
        let g = Graph::empty(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_walk(&g, 0, 3, &mut rng).nodes, vec![0, 0, 0, 0]);
        let batch = walk_batch(&g, 0, &WalkConfig::new(2, 3, 0).unwrap());
        assert!(batch.iter().all(|w| w.indices == [0, 0, 0, 0]));
    }

    #[test]
    fn example_walks_are_admissible() {
        let (g, _) = example_graph();
        let config = WalkConfig::new(500, 4, 3).unwrap();
        let mut rng = config.node_rng(0);
        for _ in 0..500 {
            let w = random_walk(&g, 0, 4, &mut rng);
            assert_eq!(w.nodes.len(), 5);
            assert!(w.nodes.windows(2).all(|p| g.has_edge(p[0], p[1])));
        }
    }

    #[test]
    fn batches_are_deterministic() {
        let (g, _) = example_graph();
        let config = WalkConfig::new(50, 6, 42).unwrap();
        assert_eq!(walk_batch(&g, 2, &config), walk_batch(&g, 2, &config));
        let other = WalkConfig { seed: 43, ..config };
        assert_ne!(walk_batch(&g, 2, &config), walk_batch(&g, 2, &other));
    }

    #[test]
    fn return_fraction_matches_exact_value() {
        // from A the walk is back at A after two steps with probability 5/9
        let (g, _) = example_graph();
        let config = WalkConfig::new(10_000, 2, 2024).unwrap();
        let batch = walk_batch(&g, 0, &config);
        let back = batch.iter().filter(|w| w.indices[2] == 0).count();
        let frac = back as f64 / batch.len() as f64;
        assert!((frac - 5.0 / 9.0).abs() <= 0.02, "fraction {frac}");
    }

    #[test]
    fn rejects_zero_parameters() {
        assert!(WalkConfig::new(0, 3, 0).is_err());
        assert!(WalkConfig::new(3, 0, 0).is_err());
    }

    proptest! {
        #[test]
        fn anonymous_walk_invariants(nodes in prop::collection::vec(0usize..6, 1..30)) {
            let a = anonymize(&Walk { nodes: nodes.clone() });
            prop_assert_eq!(a.indices.len(), nodes.len());
            prop_assert_eq!(a.indices[0], 0);
            let mut max = 0;
            for (t, &i) in a.indices.iter().enumerate() {
                prop_assert!(i <= t);
                prop_assert!(i <= max + 1);
                max = max.max(i);
            }
            // indices used are exactly 0..=max
            let mut used: Vec<_> = a.indices.clone();
            used.sort_unstable();
            used.dedup();
            prop_assert_eq!(used, (0..=max).collect::<Vec<_>>());
            // same node <=> same index
            for s in 0..nodes.len() {
                for t in 0..nodes.len() {
                    prop_assert_eq!(nodes[s] == nodes[t], a.indices[s] == a.indices[t]);
                }
            }
        }

        #[test]
        fn relabeling_nodes_preserves_anonymous_walk(
            nodes in prop::collection::vec(0usize..8, 1..20),
            shift in 1usize..100,
        ) {
            let relabeled: Vec<_> = nodes.iter().map(|&v| (v * 7 + shift) % 1000).collect();
            prop_assert_eq!(
                anonymize(&Walk { nodes }),
                anonymize(&Walk { nodes: relabeled })
            );
        }
    }
}
