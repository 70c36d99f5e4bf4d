//! Link prediction: edge sampling, pair features, AUC, and the single-graph
//! and cross-network protocols.
//!
//! Embeddings are always computed on the residual graph (test positives
//! removed), so walk statistics never see the held-out edges.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TpmError};
use crate::graph::Graph;
use crate::model::{train_classifier, Classifier, ClassifierSpec};
use crate::par::{self, Execution};
use crate::report::{EvalReport, RunRecord, Task};
use crate::seed::{derive_seed, stream_rng};
use crate::tpm::{embed_all, EmbeddingMatrix};
use crate::walk::WalkConfig;

pub type NodePair = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSampleSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for LinkSampleSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.1,
            seed: 0,
        }
    }
}

/// Held-out and training pairs for one run, plus the residual graph.
#[derive(Debug, Clone)]
pub struct LinkSample {
    pub test_pos: Vec<NodePair>,
    pub test_neg: Vec<NodePair>,
    pub train_pos: Vec<NodePair>,
    pub train_neg: Vec<NodePair>,
    pub residual: Graph,
}

fn ordered(u: usize, v: usize) -> NodePair {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// `count` distinct non-edges of `graph`, uniformly at random.
fn sample_non_edges<R: Rng>(graph: &Graph, count: usize, rng: &mut R) -> Result<Vec<NodePair>> {
    let available = graph.max_edges() - graph.edge_count() as u64;
    if count as u64 > available {
        return Err(TpmError::TooDense {
            needed: count as u64,
            available,
        });
    }
    let n = graph.node_count();
    if 2 * count as u64 >= available {
        // dense regime: enumerate and shuffle
        let mut all: Vec<NodePair> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !graph.has_edge(u, v))
            .collect();
        all.shuffle(rng);
        all.truncate(count);
        return Ok(all);
    }
    let mut chosen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || graph.has_edge(u, v) {
            continue;
        }
        let pair = ordered(u, v);
        if chosen.insert(pair) {
            out.push(pair);
        }
    }
    Ok(out)
}

/// Holds out `round(test_fraction * |E|)` edges and as many non-edges for
/// testing; all remaining edges and an equal number of further non-edges
/// form the training set.
pub fn sample_links(graph: &Graph, spec: &LinkSampleSpec) -> Result<LinkSample> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(TpmError::Config(format!(
            "test fraction {} not in (0, 1)",
            spec.test_fraction
        )));
    }
    let edge_count = graph.edge_count();
    if edge_count < 10 {
        return Err(TpmError::Config(format!(
            "need at least 10 edges, graph has {edge_count}"
        )));
    }
    let mut rng = stream_rng(spec.seed, "links", 0);
    let test_count = ((spec.test_fraction * edge_count as f64).round() as usize).max(1);
    let mut edges: Vec<NodePair> = graph.edges().collect();
    edges.shuffle(&mut rng);
    let train_pos = edges.split_off(test_count);
    let test_pos = edges;
    let mut negatives = sample_non_edges(graph, edge_count, &mut rng)?;
    let train_neg = negatives.split_off(test_count);
    let test_neg = negatives;
    let residual = graph.without_edges(&test_pos);
    Ok(LinkSample {
        test_pos,
        test_neg,
        train_pos,
        train_neg,
        residual,
    })
}

/// Binary operators turning two node vectors into one pair vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkOperator {
    #[default]
    Hadamard,
    Average,
    WeightedL1,
    WeightedL2,
}

impl LinkOperator {
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            LinkOperator::Hadamard => a * b,
            LinkOperator::Average => 0.5 * (a + b),
            LinkOperator::WeightedL1 => (a - b).abs(),
            LinkOperator::WeightedL2 => (a - b) * (a - b),
        }
    }

    pub fn combine(self, fu: &[f64], fv: &[f64]) -> Result<Vec<f64>> {
        if fu.len() != fv.len() {
            return Err(TpmError::Shape(format!(
                "pair vectors of length {} and {}",
                fu.len(),
                fv.len()
            )));
        }
        Ok(fu.iter().zip(fv).map(|(&a, &b)| self.apply(a, b)).collect())
    }
}

/// Elementwise product of two node vectors.
pub fn hadamard(fu: &[f64], fv: &[f64]) -> Result<Vec<f64>> {
    LinkOperator::Hadamard.combine(fu, fv)
}

/// Pairwise outcome counts behind the AUC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AucComparison {
    pub n: u64,
    pub wins: u64,
    pub ties: u64,
}

impl AucComparison {
    pub fn auc(&self) -> f64 {
        (self.wins as f64 + 0.5 * self.ties as f64) / self.n as f64
    }
}

/// Compares every positive score with every negative score.
pub fn auc_comparison(pos: &[f64], neg: &[f64]) -> Result<AucComparison> {
    if pos.is_empty() || neg.is_empty() {
        return Err(TpmError::Shape(
            "AUC needs positive and negative scores".into(),
        ));
    }
    if pos.iter().chain(neg).any(|s| s.is_nan()) {
        return Err(TpmError::NonFinite("scores".into()));
    }
    let mut sorted = neg.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut wins, mut ties) = (0u64, 0u64);
    for &s in pos {
        let below = sorted.partition_point(|&x| x < s);
        let not_above = sorted.partition_point(|&x| x <= s);
        wins += below as u64;
        ties += (not_above - below) as u64;
    }
    Ok(AucComparison {
        n: pos.len() as u64 * neg.len() as u64,
        wins,
        ties,
    })
}

/// Probability that a positive outscores a negative, ties counting half.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    Ok(auc_comparison(pos, neg)?.auc())
}

/// Feature matrix for `pairs`, one row per pair.
pub fn pair_features(
    embeddings: &EmbeddingMatrix,
    pairs: &[NodePair],
    op: LinkOperator,
) -> Array2<f64> {
    let dim = embeddings.dim();
    let mut x = Array2::zeros((pairs.len(), dim));
    for (mut row, &(u, v)) in x.rows_mut().into_iter().zip(pairs) {
        let (fu, fv) = (embeddings.vector(u), embeddings.vector(v));
        for (k, out) in row.iter_mut().enumerate() {
            *out = op.apply(fu[k], fv[k]);
        }
    }
    x
}

/// Positive-class probability for each pair.
pub fn score_pairs(
    model: &Classifier,
    embeddings: &EmbeddingMatrix,
    pairs: &[NodePair],
    op: LinkOperator,
) -> Vec<f64> {
    let x = pair_features(embeddings, pairs, op);
    model.predict_proba(x.view()).column(1).to_vec()
}

/// A sampled graph together with its residual embedding.
struct Prepared {
    sample: LinkSample,
    embeddings: EmbeddingMatrix,
    sample_seed: u64,
}

fn prepare(
    graph: &Graph,
    index: usize,
    walk: &WalkConfig,
    links: &LinkSampleSpec,
) -> Result<Prepared> {
    let sample_seed = derive_seed(links.seed, "links", index as u64);
    let sample = sample_links(
        graph,
        &LinkSampleSpec {
            seed: sample_seed,
            ..*links
        },
    )?;
    let walk = WalkConfig {
        seed: derive_seed(walk.seed, "walks", index as u64),
        ..*walk
    };
    let embeddings = embed_all(&sample.residual, &walk)?;
    Ok(Prepared {
        sample,
        embeddings,
        sample_seed,
    })
}

/// Training matrix and labels pooled over prepared graphs.
fn training_set(prepared: &[&Prepared], op: LinkOperator) -> (Array2<f64>, Vec<usize>) {
    let rows: usize = prepared
        .iter()
        .map(|p| p.sample.train_pos.len() + p.sample.train_neg.len())
        .sum();
    let dim = prepared[0].embeddings.dim();
    let mut x = Array2::zeros((0, dim));
    x.reserve_rows(rows).expect("row reservation");
    let mut y = Vec::with_capacity(rows);
    for p in prepared {
        for (pairs, label) in [(&p.sample.train_pos, 1), (&p.sample.train_neg, 0)] {
            let block = pair_features(&p.embeddings, pairs, op);
            x.append(ndarray::Axis(0), block.view())
                .expect("same width");
            y.extend(std::iter::repeat_n(label, pairs.len()));
        }
    }
    (x, y)
}

/// Scored test pairs of one run: `(u, v, label, score)`.
pub type ScoredPairs = Vec<(usize, usize, u8, f64)>;

fn score_test(model: &Classifier, p: &Prepared, op: LinkOperator) -> Result<(f64, ScoredPairs)> {
    let pos = score_pairs(model, &p.embeddings, &p.sample.test_pos, op);
    let neg = score_pairs(model, &p.embeddings, &p.sample.test_neg, op);
    let value = auc(&pos, &neg)?;
    let scored = p
        .sample
        .test_pos
        .iter()
        .zip(&pos)
        .map(|(&(u, v), &s)| (u, v, 1, s))
        .chain(
            p.sample
                .test_neg
                .iter()
                .zip(&neg)
                .map(|(&(u, v), &s)| (u, v, 0, s)),
        )
        .collect();
    Ok((value, scored))
}

/// Settings shared by both link-prediction protocols.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkEvalConfig {
    pub walk: WalkConfig,
    pub links: LinkSampleSpec,
    pub classifier: ClassifierSpec,
    pub operator: LinkOperator,
}

impl LinkEvalConfig {
    pub fn new(walk: WalkConfig, classifier: ClassifierSpec) -> Self {
        Self {
            walk,
            links: LinkSampleSpec::default(),
            classifier,
            operator: LinkOperator::Hadamard,
        }
    }

    fn report(&self, task: Task, name: &str, runs: Vec<RunRecord>) -> EvalReport {
        let mut report = EvalReport {
            task,
            dataset: name.to_owned(),
            walk: self.walk,
            classifier: self.classifier.clone(),
            split: None,
            links: Some(self.links),
            operator: Some(self.operator),
            runs,
            micro_f1: None,
            macro_f1: None,
            auc: None,
        };
        report.summarize();
        report
    }
}

/// Single-graph protocol, returning per-run test scores as well.
pub fn evaluate_link_prediction_detailed(
    name: &str,
    graph: &Graph,
    config: &LinkEvalConfig,
    runs: usize,
) -> Result<(EvalReport, Vec<ScoredPairs>)> {
    if runs == 0 {
        return Err(TpmError::Config("runs must be >= 1".into()));
    }
    let results = par::map_indices(runs, Execution::default(), |r| {
        let prepared = prepare(graph, r, &config.walk, &config.links)?;
        let clf_seed = derive_seed(config.classifier.seed, "classifier", r as u64);
        let (x, y) = training_set(&[&prepared], config.operator);
        let model = train_classifier(
            x.view(),
            &y,
            2,
            &config.classifier.clone().with_seed(clf_seed),
        )?;
        let (value, scored) = score_test(&model, &prepared, config.operator)?;
        let record = RunRecord {
            index: r,
            seeds: vec![
                ("links".into(), prepared.sample_seed),
                ("walks".into(), prepared.embeddings.config.seed),
                ("classifier".into(), clf_seed),
            ],
            train_size: y.len(),
            test_size: scored.len(),
            micro_f1: None,
            macro_f1: None,
            auc: Some(value),
        };
        Ok((record, scored))
    });
    let (records, scored): (Vec<_>, Vec<_>) = results
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok((config.report(Task::LinkPrediction, name, records), scored))
}

/// Mean AUC over `runs` independent samples of `graph`.
pub fn evaluate_link_prediction(
    name: &str,
    graph: &Graph,
    config: &LinkEvalConfig,
    runs: usize,
) -> Result<EvalReport> {
    Ok(evaluate_link_prediction_detailed(name, graph, config, runs)?.0)
}

/// Trains one link classifier on pooled examples from `train_graphs` and
/// reports its AUC on each of `test_graphs`.
pub fn cross_network_generalization(
    name: &str,
    train_graphs: &[Graph],
    test_graphs: &[Graph],
    config: &LinkEvalConfig,
) -> Result<EvalReport> {
    if train_graphs.is_empty() || test_graphs.is_empty() {
        return Err(TpmError::Config(
            "need at least one training and one test graph".into(),
        ));
    }
    let prepare_all = |graphs: &[Graph]| {
        par::map_indices(graphs.len(), Execution::default(), |i| {
            prepare(&graphs[i], i, &config.walk, &config.links)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()
    };
    let train = prepare_all(train_graphs)?;
    let (x, y) = training_set(&train.iter().collect::<Vec<_>>(), config.operator);
    let clf_seed = derive_seed(config.classifier.seed, "classifier", 0);
    let model = train_classifier(
        x.view(),
        &y,
        2,
        &config.classifier.clone().with_seed(clf_seed),
    )?;
    let test = prepare_all(test_graphs)?;
    let runs = test
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let (value, scored) = score_test(&model, p, config.operator)?;
            Ok(RunRecord {
                index: j,
                seeds: vec![
                    ("links".into(), p.sample_seed),
                    ("walks".into(), p.embeddings.config.seed),
                    ("classifier".into(), clf_seed),
                ],
                train_size: y.len(),
                test_size: scored.len(),
                micro_f1: None,
                macro_f1: None,
                auc: Some(value),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(config.report(Task::CrossNetwork, name, runs))
}

/// Writes `run,u,v,label,score` rows using external node names.
pub fn write_link_scores(
    path: impl AsRef<Path>,
    runs: &[ScoredPairs],
    ids: &crate::graph::NodeIdMap,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "run,u,v,label,score").expect("write to vec");
    for (r, scored) in runs.iter().enumerate() {
        for &(u, v, label, score) in scored {
            writeln!(out, "{r},{},{},{label},{score}", ids.name(u), ids.name(v))
                .expect("write to vec");
        }
    }
    fs::write(path, out).map_err(|e| TpmError::io(path, e))
}
