//! Exact anonymous-walk step distributions by exhaustive enumeration.
//!
//! Every `m`-step walk from the start node is visited depth-first with its
//! probability `prod 1/degree`, and its anonymous index at each step is
//! credited with that probability. This is the ground truth the sampled
//! matrices converge to. Cost grows like `degree^m`, so a walk budget guards
//! every call.

use crate::error::{Result, TpmError};
use crate::graph::Graph;
use crate::tpm::TpmEmbedding;

/// Default cap on the number of enumerated walks.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Exact transition probability matrix of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactTpm {
    pub node: usize,
    steps: usize,
    values: Vec<f64>,
}

impl ExactTpm {
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn get(&self, step: usize, index: usize) -> f64 {
        self.values[step * self.steps + index]
    }

    pub fn row(&self, step: usize) -> &[f64] {
        &self.values[step * self.steps..(step + 1) * self.steps]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Number of `length`-step walks from `node` (saturating).
pub fn walk_count(graph: &Graph, node: usize, length: usize) -> u128 {
    if graph.degree(node) == 0 {
        return 1;
    }
    // counts[v] = number of k-step walks starting at v
    let mut counts = vec![1u128; graph.node_count()];
    for _ in 0..length {
        counts = (0..graph.node_count())
            .map(|v| {
                graph
                    .neighbors(v)
                    .iter()
                    .fold(0u128, |acc, &u| acc.saturating_add(counts[u]))
            })
            .collect();
    }
    counts[node]
}

struct Enumeration<'a> {
    graph: &'a Graph,
    steps: usize,
    seen: Vec<usize>,
    acc: Vec<f64>,
}

impl Enumeration<'_> {
    fn descend(&mut self, current: usize, step: usize, prob: f64) {
        if step + 1 == self.steps {
            return;
        }
        let neighbors = self.graph.neighbors(current);
        let share = prob / neighbors.len() as f64;
        for &next in neighbors {
            let (index, fresh) = match self.seen.iter().position(|&s| s == next) {
                Some(i) => (i, false),
                None => {
                    self.seen.push(next);
                    (self.seen.len() - 1, true)
                }
            };
            self.acc[(step + 1) * self.steps + index] += share;
            self.descend(next, step + 1, share);
            if fresh {
                self.seen.pop();
            }
        }
    }
}

/// Exact matrix for `node` with walks of length `walk_length`, using
/// [`DEFAULT_BUDGET`].
pub fn exact_tpm(graph: &Graph, node: usize, walk_length: usize) -> Result<ExactTpm> {
    exact_tpm_with_budget(graph, node, walk_length, DEFAULT_BUDGET)
}

pub fn exact_tpm_with_budget(
    graph: &Graph,
    node: usize,
    walk_length: usize,
    budget: u128,
) -> Result<ExactTpm> {
    if node >= graph.node_count() {
        return Err(TpmError::Config(format!(
            "node {node} out of range for {} nodes",
            graph.node_count()
        )));
    }
    let walks = walk_count(graph, node, walk_length);
    if walks > budget {
        return Err(TpmError::BudgetExceeded { walks, budget });
    }
    let steps = walk_length + 1;
    let mut values = vec![0.0; steps * steps];
    values[0] = 1.0;
    if graph.degree(node) == 0 {
        for t in 1..steps {
            values[t * steps] = 1.0;
        }
        return Ok(ExactTpm {
            node,
            steps,
            values,
        });
    }
    let mut walk = Enumeration {
        graph,
        steps,
        seen: vec![node],
        acc: values,
    };
    walk.descend(node, 0, 1.0);
    Ok(ExactTpm {
        node,
        steps,
        values: walk.acc,
    })
}

/// Largest absolute entrywise difference between a sampled and an exact matrix.
pub fn compare(empirical: &TpmEmbedding, exact: &ExactTpm) -> Result<f64> {
    if empirical.steps() != exact.steps() {
        return Err(TpmError::Shape(format!(
            "{0}x{0} sampled vs {1}x{1} exact",
            empirical.steps(),
            exact.steps()
        )));
    }
    Ok(empirical
        .as_slice()
        .iter()
        .zip(exact.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;
    use crate::tpm::build_tpm;
    use crate::walk::WalkConfig;

    #[test]
    fn example_graph_two_steps() {
        let (g, _) = example_graph();
        let exact = exact_tpm(&g, 0, 2).unwrap();
        assert!((exact.get(2, 0) - 5.0 / 9.0).abs() < 1e-15);
        assert!((exact.get(2, 2) - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(exact.get(2, 1), 0.0);
        assert_eq!(exact.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(exact.row(1), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn forced_and_isolated() {
        let edge = Graph::from_edges(2, [(0, 1)]).0;
        let exact = exact_tpm(&edge, 1, 3).unwrap();
        for (t, j) in [(0, 0), (1, 1), (2, 0), (3, 1)] {
            assert_eq!(exact.get(t, j), 1.0);
            assert_eq!(exact.row(t).iter().sum::<f64>(), 1.0);
        }
        let lonely = exact_tpm(&Graph::empty(1), 0, 2).unwrap();
        assert_eq!(
            lonely.as_slice(),
            &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn triangle_returns_half_the_time() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).0;
        for v in 0..3 {
            let exact = exact_tpm(&g, v, 2).unwrap();
            assert_eq!(exact.get(2, 0), 0.5);
            assert_eq!(exact.get(2, 2), 0.5);
        }
    }

    #[test]
    fn walk_count_matches_brute_force() {
        let (g, _) = example_graph();
        // A has 3 neighbors, then B:3 C:3 E:1 -> 7 two-step walks
        assert_eq!(walk_count(&g, 0, 1), 3);
        assert_eq!(walk_count(&g, 0, 2), 7);
    }

    #[test]
    fn budget_guard() {
        let (g, _) = example_graph();
        let err = exact_tpm_with_budget(&g, 0, 2, 6).unwrap_err();
        assert!(matches!(
            err,
            TpmError::BudgetExceeded {
                walks: 7,
                budget: 6
            }
        ));
        assert!(exact_tpm_with_budget(&g, 0, 2, 7).is_ok());
    }

    /// Step-3 row assembled from the hand-derived branch formulas for a
    /// three-step walk `v0 -> v1 -> v2 -> ?`, summed over all two-step prefixes.
    #[test]
    fn step_three_matches_branch_formulas() {
        let (g, _) = example_graph();
        let d = |v: usize| g.degree(v) as f64;
        for v0 in 0..g.node_count() {
            let mut row = [0.0f64; 4];
            for &v1 in g.neighbors(v0) {
                let p1 = 1.0 / d(v0);
                for &v2 in g.neighbors(v1) {
                    let p2 = p1 / d(v1);
                    if v2 == v0 {
                        // back at a0: a1 again, or a new node a2
                        row[1] += p2 / d(v0);
                        row[2] += p2 * (d(v0) - 1.0) / d(v0);
                    } else {
                        let delta = if g.has_edge(v2, v0) { 1.0 } else { 0.0 };
                        row[0] += p2 * delta / d(v2);
                        row[1] += p2 / d(v2);
                        row[3] += p2 * ((d(v2) - 2.0) / d(v2) + (1.0 - delta) / d(v2));
                    }
                }
            }
            let exact = exact_tpm(&g, v0, 3).unwrap();
            for (j, want) in row.iter().enumerate() {
                assert!((exact.get(3, j) - want).abs() < 1e-12, "node {v0} col {j}");
            }
        }
    }

    #[test]
    fn compare_basics() {
        let (g, _) = example_graph();
        let exact = exact_tpm(&g, 0, 3).unwrap();
        let same = TpmEmbedding::from_rows(0, 4, exact.as_slice().to_vec());
        assert_eq!(compare(&same, &exact).unwrap(), 0.0);

        let e0 = TpmEmbedding::from_rows(0, 2, vec![1.0, 0.0, 1.0, 0.0]);
        let e1 = ExactTpm {
            node: 0,
            steps: 2,
            values: vec![1.0, 0.0, 0.0, 1.0],
        };
        assert_eq!(compare(&e0, &e1).unwrap(), 1.0);

        let small = TpmEmbedding::from_rows(0, 2, vec![1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(compare(&small, &exact), Err(TpmError::Shape(_))));
    }

    #[test]
    fn sampled_matrix_converges() {
        let (g, _) = example_graph();
        let exact = exact_tpm(&g, 0, 3).unwrap();
        let sampled = build_tpm(&g, 0, &WalkConfig::new(100_000, 3, 5).unwrap());
        assert!(compare(&sampled, &exact).unwrap() <= 0.01);
    }
}
