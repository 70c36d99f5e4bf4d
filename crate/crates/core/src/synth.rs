//! Random graph generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TpmError};
use crate::graph::{Graph, LabeledDataset};
use crate::seed::stream_rng;

/// Preferential-attachment growth: `n` nodes, `alpha` edges per arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaSpec {
    pub n: usize,
    pub alpha: usize,
    pub seed: u64,
}

impl BaSpec {
    pub fn validate(&self) -> Result<()> {
        if self.alpha == 0 || self.alpha >= self.n {
            return Err(TpmError::Config(format!(
                "need 1 <= alpha < n, got alpha={} n={}",
                self.alpha, self.n
            )));
        }
        Ok(())
    }

    /// Edges in the generated graph: the `alpha`-clique core plus `alpha`
    /// per arriving node.
    pub fn expected_edges(&self) -> usize {
        self.alpha * (self.alpha - 1) / 2 + self.alpha * (self.n - self.alpha)
    }
}

/// Barabási–Albert graph.
///
/// Growth starts from a clique on the first `alpha` nodes. Each later node
/// picks `alpha` distinct existing targets with probability proportional to
/// their current degree, then links to all of them.
pub fn generate_ba(spec: &BaSpec) -> Result<Graph> {
    spec.validate()?;
    let BaSpec { n, alpha, seed } = *spec;
    let mut rng = stream_rng(seed, "ba", 0);
    let mut edges = Vec::with_capacity(spec.expected_edges());
    // every edge endpoint once, so a uniform pick is degree-proportional
    let mut endpoints = Vec::with_capacity(2 * spec.expected_edges());
    for u in 0..alpha {
        for v in u + 1..alpha {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(alpha);
    for new in alpha..n {
        targets.clear();
        if new == alpha {
            // core nodes may be isolated when alpha == 1
            targets.extend(0..alpha);
        } else {
            while targets.len() < alpha {
                let t = endpoints[rng.random_range(0..endpoints.len())];
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.extend([t, new]);
        }
    }
    Ok(Graph::from_edges(n, edges).0)
}

/// Planted partition: `communities` blocks of `nodes_per_community` nodes,
/// edges inside a block with probability `p_in`, across blocks with `p_out`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedPartitionSpec {
    pub communities: usize,
    pub nodes_per_community: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl PlantedPartitionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.communities < 2 || self.nodes_per_community == 0 {
            return Err(TpmError::Config(
                "need at least 2 non-empty communities".into(),
            ));
        }
        // p_out == p_in is allowed: it is the structure-free null model
        if !(0.0 <= self.p_out && self.p_out <= self.p_in && self.p_in <= 1.0) {
            return Err(TpmError::Config(format!(
                "need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        Ok(())
    }
}

pub fn generate_planted(spec: &PlantedPartitionSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let n = spec.communities * spec.nodes_per_community;
    let labels: Vec<usize> = (0..n).map(|v| v / spec.nodes_per_community).collect();
    let mut rng = stream_rng(spec.seed, "planted", 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] {
                spec.p_in
            } else {
                spec.p_out
            };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_edges(n, edges).0;
    LabeledDataset::new(graph, labels, spec.communities)
}

/// Erdős–Rényi `G(n, p)`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(TpmError::Config(format!(
            "edge probability {p} not in [0, 1]"
        )));
    }
    let mut rng = stream_rng(seed, "er", 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::from_edges(n, edges).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_connected(g: &Graph) -> bool {
        let mut seen = vec![false; g.node_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    #[test]
    fn ba_structure() {
        let spec = BaSpec {
            n: 1000,
            alpha: 6,
            seed: 3,
        };
        let g = generate_ba(&spec).unwrap();
        g.validate().unwrap();
        assert_eq!(g.edge_count(), 6 * 994 + 15);
        assert_eq!(g.edge_count(), spec.expected_edges());
        assert!((0..g.node_count()).all(|v| g.degree(v) >= 6));
        assert!((0..g.node_count()).any(|v| g.degree(v) >= 12));
        assert!(is_connected(&g));
    }

    #[test]
    fn ba_minimal_size_is_complete() {
        let g = generate_ba(&BaSpec {
            n: 7,
            alpha: 6,
            seed: 0,
        })
        .unwrap();
        assert_eq!(g.edge_count(), 21);
        let star = generate_ba(&BaSpec {
            n: 2,
            alpha: 1,
            seed: 0,
        })
        .unwrap();
        assert_eq!(star.edge_count(), 1);
    }

    #[test]
    fn ba_is_deterministic_and_rejects_bad_specs() {
        let spec = BaSpec {
            n: 300,
            alpha: 3,
            seed: 11,
        };
        assert_eq!(generate_ba(&spec).unwrap(), generate_ba(&spec).unwrap());
        let other = generate_ba(&BaSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(generate_ba(&spec).unwrap(), other);
        assert!(generate_ba(&BaSpec {
            n: 5,
            alpha: 5,
            seed: 0
        })
        .is_err());
        assert!(generate_ba(&BaSpec {
            n: 5,
            alpha: 0,
            seed: 0
        })
        .is_err());
    }

    #[test]
    fn ba_hubs_grow_with_n() {
        let mean_max = |n: usize| {
            (0..5)
                .map(|s| {
                    generate_ba(&BaSpec {
                        n,
                        alpha: 6,
                        seed: s,
                    })
                    .unwrap()
                    .max_degree() as f64
                })
                .sum::<f64>()
                / 5.0
        };
        assert!(mean_max(10_000) > mean_max(1000));
    }

    #[test]
    fn planted_extremes() {
        let d = generate_planted(&PlantedPartitionSpec {
            communities: 3,
            nodes_per_community: 5,
            p_in: 1.0,
            p_out: 0.0,
            seed: 1,
        })
        .unwrap();
        assert_eq!(d.graph.edge_count(), 30);
        assert_eq!(d.class_sizes(), vec![5, 5, 5]);
        for (u, v) in d.graph.edges() {
            assert_eq!(d.labels[u], d.labels[v]);
        }
        assert!((0..15).all(|v| d.graph.degree(v) == 4));
    }

    #[test]
    fn planted_rejects_bad_probabilities() {
        let spec = PlantedPartitionSpec {
            communities: 2,
            nodes_per_community: 4,
            p_in: 0.2,
            p_out: 0.3,
            seed: 0,
        };
        assert!(generate_planted(&spec).is_err());
        assert!(generate_planted(&PlantedPartitionSpec { p_out: 0.2, ..spec }).is_ok());
        assert!(generate_planted(&PlantedPartitionSpec { p_in: 1.5, ..spec }).is_err());
    }

    #[test]
    fn er_density() {
        let g = generate_er(400, 0.05, 9).unwrap();
        let expected = 0.05 * g.max_edges() as f64;
        assert!((g.edge_count() as f64 - expected).abs() < 0.1 * expected);
        assert_eq!(generate_er(10, 1.0, 0).unwrap().edge_count(), 45);
    }
}
