//! Undirected simple graphs over contiguous node indices.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Result, TpmError};

/// Counts reported while normalizing a raw edge stream into a simple graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CleanStats {
    /// Edge records seen, before any cleaning.
    pub raw_edges: usize,
    pub self_loops: usize,
    /// Records whose unordered pair had already been seen.
    pub duplicates: usize,
    /// Records dropped because an endpoint was unknown (citation data only).
    pub unknown_endpoints: usize,
}

/// Immutable undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on `node_count` nodes from an arbitrary edge stream.
    /// Self-loops are dropped and repeated pairs (in either orientation)
    /// collapse to one edge.
    ///
    /// # Panics
    /// If an endpoint is `>= node_count`.
    pub fn from_edges<I>(node_count: usize, edges: I) -> (Graph, CleanStats)
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut stats = CleanStats::default();
        let mut adjacency = vec![Vec::new(); node_count];
        for (u, v) in edges {
            stats.raw_edges += 1;
            assert!(
                u < node_count && v < node_count,
                "edge ({u}, {v}) out of range for {node_count} nodes"
            );
            if u == v {
                stats.self_loops += 1;
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut half_edges = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            half_edges += list.len();
        }
        let edge_count = half_edges / 2;
        stats.duplicates = stats.raw_edges - stats.self_loops - edge_count;
        (
            Graph {
                adjacency,
                edge_count,
            },
            stats,
        )
    }

    /// Graph with no edges.
    pub fn empty(node_count: usize) -> Graph {
        Graph {
            adjacency: vec![Vec::new(); node_count],
            edge_count: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Maximum number of undirected edges on this node set, `N(N-1)/2`.
    pub fn max_edges(&self) -> u64 {
        let n = self.node_count() as u64;
        n * n.saturating_sub(1) / 2
    }

    /// Each edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// `hist[d]` = number of nodes with degree `d`.
    pub fn degree_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.max_degree() + 1];
        for list in &self.adjacency {
            hist[list.len()] += 1;
        }
        hist
    }

    /// Copy of this graph with the given unordered pairs removed. Pairs that
    /// are not edges are ignored.
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Graph {
        let mut adjacency = self.adjacency.clone();
        let mut edge_count = self.edge_count;
        for &(u, v) in removed {
            if let Ok(i) = adjacency[u].binary_search(&v) {
                adjacency[u].remove(i);
                let j = adjacency[v]
                    .binary_search(&u)
                    .expect("adjacency is symmetric");
                adjacency[v].remove(j);
                edge_count -= 1;
            }
        }
        Graph {
            adjacency,
            edge_count,
        }
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.node_count());
        Graph::from_edges(
            self.node_count(),
            self.edges().map(|(u, v)| (perm[u], perm[v])),
        )
        .0
    }

    /// Checks every structural invariant. Used by tests and after ingestion.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.node_count();
        let mut half = 0;
        for (u, list) in self.adjacency.iter().enumerate() {
            half += list.len();
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("adjacency of {u} not strictly sorted"));
                }
            }
            for &v in list {
                if v >= n {
                    return Err(format!("neighbor {v} of {u} out of range"));
                }
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if self.adjacency[v].binary_search(&u).is_err() {
                    return Err(format!("edge {u}-{v} not mirrored"));
                }
            }
        }
        if half != 2 * self.edge_count {
            return Err(format!(
                "degree sum {half} != 2 * edge_count {}",
                self.edge_count
            ));
        }
        Ok(())
    }
}

/// Bijection between external node identifiers and internal indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeIdMap {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl NodeIdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of `name`, assigning the next free index if it is new.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Identity map `"0" .. "n-1"`, used for generated graphs.
    pub fn numeric(n: usize) -> Self {
        let mut map = Self::new();
        for i in 0..n {
            map.intern(&i.to_string());
        }
        map
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// A graph whose nodes each carry one class label in `0..class_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub graph: Graph,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl LabeledDataset {
    pub fn new(graph: Graph, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if labels.len() != graph.node_count() {
            return Err(TpmError::Dataset(format!(
                "{} labels for {} nodes",
                labels.len(),
                graph.node_count()
            )));
        }
        if class_count < 2 {
            return Err(TpmError::Dataset(format!(
                "need at least 2 classes, got {class_count}"
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(TpmError::Dataset(format!(
                "label {bad} outside 0..{class_count}"
            )));
        }
        Ok(Self {
            graph,
            labels,
            class_count,
        })
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// The five-node example graph with edges A-B, B-C, C-A, A-E, C-D, B-D.
/// Node order is A=0, B=1, C=2, D=3, E=4.
pub fn example_graph() -> (Graph, NodeIdMap) {
    let mut ids = NodeIdMap::new();
    let pairs = [
        ("A", "B"),
        ("B", "C"),
        ("C", "A"),
        ("A", "E"),
        ("C", "D"),
        ("B", "D"),
    ];
    for name in ["A", "B", "C", "D", "E"] {
        ids.intern(name);
    }
    let edges: Vec<_> = pairs
        .iter()
        .map(|(a, b)| (ids.get(a).unwrap(), ids.get(b).unwrap()))
        .collect();
    (Graph::from_edges(5, edges).0, ids)
}
