//! Transition probability matrices and the node embedding built from them.
//!
//! For node `v`, entry `[t][j]` of its matrix is the fraction of the
//! `walks_per_node` anonymous walks from `v` that occupy anonymous index `j`
//! at step `t`. The embedding of `v` is that matrix flattened row-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Result, TpmError};
use crate::graph::{Graph, NodeIdMap};
use crate::par::{self, Execution};
use crate::walk::{anonymize_into, walk_into, WalkConfig};

/// Square row-stochastic matrix indexed by `(step, anonymous index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TpmEmbedding {
    pub node: usize,
    steps: usize,
    values: Vec<f64>,
}

impl TpmEmbedding {
    pub fn from_rows(node: usize, steps: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), steps * steps, "matrix must be square");
        Self {
            node,
            steps,
            values,
        }
    }

    /// Number of rows (and columns): `walk_length + 1`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn get(&self, step: usize, index: usize) -> f64 {
        self.values[step * self.steps + index]
    }

    pub fn row(&self, step: usize) -> &[f64] {
        &self.values[step * self.steps..(step + 1) * self.steps]
    }

    /// Row-major flattening.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// Raw per-step occupancy counts for one node, written into `counts`
/// (length `steps * steps`).
fn count_into(graph: &Graph, node: usize, config: &WalkConfig, counts: &mut [u32]) {
    let steps = config.steps();
    counts.fill(0);
    let mut rng = config.node_rng(node);
    let mut nodes = Vec::with_capacity(steps);
    let mut seen = Vec::with_capacity(steps);
    let mut indices = Vec::with_capacity(steps);
    for _ in 0..config.walks_per_node {
        walk_into(graph, node, config.walk_length, &mut rng, &mut nodes);
        anonymize_into(&nodes, &mut seen, &mut indices);
        for (t, &j) in indices.iter().enumerate() {
            counts[t * steps + j] += 1;
        }
    }
}

fn normalize_into(counts: &[u32], walks: usize, out: &mut [f64]) {
    let eta = walks as f64;
    for (o, &c) in out.iter_mut().zip(counts) {
        *o = f64::from(c) / eta;
    }
}

/// Estimates the transition probability matrix of `node`.
///
/// # Panics
/// If `node` is out of range or `config` is invalid.
pub fn build_tpm(graph: &Graph, node: usize, config: &WalkConfig) -> TpmEmbedding {
    config.validate().expect("invalid walk config");
    let mut counts = vec![0u32; config.dim()];
    count_into(graph, node, config, &mut counts);
    let mut values = vec![0.0; config.dim()];
    normalize_into(&counts, config.walks_per_node, &mut values);
    TpmEmbedding::from_rows(node, config.steps(), values)
}

/// Flattened matrices for every node, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub vectors: Array2<f64>,
    pub config: WalkConfig,
}

impl EmbeddingMatrix {
    pub fn node_count(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vector(&self, node: usize) -> &[f64] {
        self.vectors
            .row(node)
            .to_slice()
            .expect("embedding rows are contiguous")
    }

    pub fn tpm(&self, node: usize) -> TpmEmbedding {
        TpmEmbedding::from_rows(node, self.config.steps(), self.vector(node).to_vec())
    }

    /// Writes the embedding CSV: a header `node_id,dim=..,eta=..,m=..,seed=..`
    /// followed by `name,v0,v1,...` per node. Floats use shortest round-trip
    /// formatting, so reading back is exact.
    pub fn write_csv(&self, path: impl AsRef<Path>, ids: &NodeIdMap) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::with_capacity(self.node_count() * self.dim() * 8);
        writeln!(
            out,
            "node_id,dim={},eta={},m={},seed={}",
            self.dim(),
            self.config.walks_per_node,
            self.config.walk_length,
            self.config.seed
        )
        .expect("write to vec");
        for v in 0..self.node_count() {
            out.extend_from_slice(ids.name(v).as_bytes());
            for x in self.vector(v) {
                write!(out, ",{x}").expect("write to vec");
            }
            out.push(b'\n');
        }
        fs::write(path, out).map_err(|e| TpmError::io(path, e))
    }

    /// Reads a file written by [`EmbeddingMatrix::write_csv`].
    pub fn read_csv(path: impl AsRef<Path>) -> Result<(EmbeddingMatrix, NodeIdMap)> {
        let path = path.as_ref();
        let parse_err = |line: usize, reason: String| TpmError::Parse {
            path: path.to_owned(),
            line,
            reason,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_path(path)?;
        let mut records = reader.records();
        let header = records
            .next()
            .ok_or_else(|| parse_err(1, "missing header".into()))??;
        if header.get(0) != Some("node_id") || header.len() != 5 {
            return Err(parse_err(1, "header must be node_id,dim,eta,m,seed".into()));
        }
        let mut meta = [0u64; 4];
        for (slot, (field, key)) in meta
            .iter_mut()
            .zip(header.iter().skip(1).zip(["dim", "eta", "m", "seed"]))
        {
            *slot = field
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| parse_err(1, format!("bad header field {field:?}")))?;
        }
        let [dim, eta, m, seed] = meta;
        let config = WalkConfig::new(eta as usize, m as usize, seed)?;
        if config.dim() as u64 != dim {
            return Err(parse_err(1, format!("dim {dim} inconsistent with m={m}")));
        }
        let dim = dim as usize;
        let mut ids = NodeIdMap::new();
        let mut flat = Vec::new();
        for (i, record) in records.enumerate() {
            let record = record?;
            let line = i + 2;
            if record.len() != dim + 1 {
                return Err(parse_err(
                    line,
                    format!("expected {} fields, got {}", dim + 1, record.len()),
                ));
            }
            let name = &record[0];
            if ids.get(name).is_some() {
                return Err(parse_err(line, format!("duplicate node {name:?}")));
            }
            ids.intern(name);
            for field in record.iter().skip(1) {
                flat.push(
                    field
                        .parse::<f64>()
                        .map_err(|_| parse_err(line, format!("bad float {field:?}")))?,
                );
            }
        }
        let vectors = Array2::from_shape_vec((ids.len(), dim), flat)
            .map_err(|e| TpmError::Shape(e.to_string()))?;
        Ok((EmbeddingMatrix { vectors, config }, ids))
    }
}

/// Embeds every node using the default execution policy.
pub fn embed_all(graph: &Graph, config: &WalkConfig) -> Result<EmbeddingMatrix> {
    embed_all_with(graph, config, Execution::default())
}

/// Embeds every node. Output does not depend on `exec`.
pub fn embed_all_with(
    graph: &Graph,
    config: &WalkConfig,
    exec: Execution,
) -> Result<EmbeddingMatrix> {
    config.validate()?;
    if graph.is_empty() {
        return Err(TpmError::EmptyGraph);
    }
    let dim = config.dim();
    let mut flat = vec![0.0; graph.node_count() * dim];
    par::for_each_chunk_mut(&mut flat, dim, exec, |node, row| {
        let mut counts = vec![0u32; dim];
        count_into(graph, node, config, &mut counts);
        normalize_into(&counts, config.walks_per_node, row);
    });
    let vectors = Array2::from_shape_vec((graph.node_count(), dim), flat)
        .expect("buffer sized node_count * dim");
    Ok(EmbeddingMatrix {
        vectors,
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;

    fn unit(steps: usize, j: usize) -> Vec<f64> {
        let mut r = vec![0.0; steps];
        r[j] = 1.0;
        r
    }

    #[test]
    fn forced_walk_matrix() {
        let g = Graph::from_edges(2, [(0, 1)]).0;
        for eta in [1, 7, 100] {
            for node in 0..2 {
                let tpm = build_tpm(&g, node, &WalkConfig::new(eta, 3, 5).unwrap());
                for (t, j) in [(0, 0), (1, 1), (2, 0), (3, 1)] {
                    assert_eq!(tpm.row(t), unit(4, j).as_slice());
                }
            }
        }
    }

    #[test]
    fn isolated_node_matrix() {
        let g = Graph::empty(1);
        let tpm = build_tpm(&g, 0, &WalkConfig::new(4, 2, 0).unwrap());
        for t in 0..3 {
            assert_eq!(tpm.row(t), unit(3, 0).as_slice());
        }
    }

    #[test]
    fn example_graph_step_two() {
        let (g, _) = example_graph();
        let tpm = build_tpm(&g, 0, &WalkConfig::new(100_000, 3, 17).unwrap());
        assert!((tpm.get(2, 0) - 5.0 / 9.0).abs() <= 0.01);
        assert!((tpm.get(2, 2) - 4.0 / 9.0).abs() <= 0.01);
        assert_eq!(tpm.get(2, 1), 0.0);
    }

    #[test]
    fn entries_are_multiples_of_one_over_eta() {
        let (g, _) = example_graph();
        let eta = 37;
        let tpm = build_tpm(&g, 1, &WalkConfig::new(eta, 5, 3).unwrap());
        for &x in tpm.as_slice() {
            let k = x * eta as f64;
            assert!((k - k.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn triangle_nodes_share_a_vector() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).0;
        let emb = embed_all(&g, &WalkConfig::new(200_000, 2, 1).unwrap()).unwrap();
        for v in 1..3 {
            for (a, b) in emb.vector(0).iter().zip(emb.vector(v)) {
                assert!((a - b).abs() < 0.01);
            }
        }
    }

    #[test]
    fn dimension_is_steps_squared() {
        let (g, _) = example_graph();
        let emb = embed_all(&g, &WalkConfig::new(5, 10, 0).unwrap()).unwrap();
        assert_eq!(emb.dim(), 121);
        assert_eq!(emb.node_count(), 5);
    }

    #[test]
    fn rows_match_build_tpm_and_execution_policy() {
        let (g, _) = example_graph();
        let config = WalkConfig::new(30, 4, 99).unwrap();
        let par = embed_all_with(&g, &config, Execution::Parallel).unwrap();
        let seq = embed_all_with(&g, &config, Execution::Sequential).unwrap();
        assert_eq!(par, seq);
        for v in 0..g.node_count() {
            assert_eq!(par.tpm(v), build_tpm(&g, v, &config));
        }
    }

    #[test]
    fn empty_graph_is_rejected() {
        assert!(embed_all(&Graph::empty(0), &WalkConfig::default()).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let (g, ids) = example_graph();
        let emb = embed_all(&g, &WalkConfig::new(13, 3, 8).unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("emb.csv");
        emb.write_csv(&p, &ids).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("node_id,dim=16,eta=13,m=3,seed=8\nA,1,0,"));
        let (back, back_ids) = EmbeddingMatrix::read_csv(&p).unwrap();
        assert_eq!(back, emb);
        assert_eq!(back_ids, ids);
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "node_id,dim=4,eta=1,m=1,seed=0\nA,1,0,0\n").unwrap();
        assert!(matches!(
            EmbeddingMatrix::read_csv(&p),
            Err(TpmError::Parse { line: 2, .. })
        ));
    }
}
