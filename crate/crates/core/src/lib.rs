//! Node embeddings from transition probability matrices of anonymous random
//! walks, with the evaluation protocols used to score them.
//!
//! Each node gets `eta` walks of length `m`. A walk is anonymized by
//! replacing every node with the index of its first occurrence, and entry
//! `(t, j)` of the node's matrix is the fraction of walks sitting at anonymous
//! index `j` after `t` steps. The flattened matrix is the embedding.

pub mod classify;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod linkpred;
pub mod model;
pub mod oracle;
pub mod par;
pub mod report;
pub mod seed;
pub mod sweep;
pub mod synth;
pub mod tpm;
pub mod walk;

pub use classify::{evaluate_classification, f1_scores, stratified_splits, F1Scores, SplitSpec};
pub use error::{Result, TpmError};
pub use graph::{example_graph, Graph, LabeledDataset, NodeIdMap};
pub use linkpred::{
    auc, cross_network_generalization, evaluate_link_prediction, hadamard, LinkEvalConfig,
    LinkOperator, LinkSampleSpec,
};
pub use model::{train_classifier, Classifier, ClassifierKind, ClassifierSpec};
pub use oracle::{exact_tpm, ExactTpm};
pub use par::Execution;
pub use report::{EvalReport, Stat};
pub use synth::{generate_ba, generate_er, generate_planted, BaSpec, PlantedPartitionSpec};
pub use tpm::{build_tpm, embed_all, embed_all_with, EmbeddingMatrix, TpmEmbedding};
pub use walk::WalkConfig;
