//! Node classification: stratified splits, F1 scores, and the repeated
//! train/test protocol.

use ndarray::Axis;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TpmError};
use crate::graph::LabeledDataset;
use crate::model::{train_classifier, ClassifierSpec};
use crate::par::{self, Execution};
use crate::report::{EvalReport, RunRecord, Task};
use crate::seed::{derive_seed, stream_rng};
use crate::tpm::EmbeddingMatrix;

/// Per-class true positive, false positive and false negative counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: Vec<u64>,
    pub fp: Vec<u64>,
    pub fn_: Vec<u64>,
}

impl ConfusionCounts {
    pub fn new(class_count: usize) -> Self {
        Self {
            tp: vec![0; class_count],
            fp: vec![0; class_count],
            fn_: vec![0; class_count],
        }
    }

    /// Tallies single-label predictions against the truth.
    pub fn from_predictions(truth: &[usize], predicted: &[usize], class_count: usize) -> Self {
        assert_eq!(truth.len(), predicted.len());
        let mut counts = Self::new(class_count);
        for (&y, &p) in truth.iter().zip(predicted) {
            if y == p {
                counts.tp[y] += 1;
            } else {
                counts.fp[p] += 1;
                counts.fn_[y] += 1;
            }
        }
        counts
    }

    pub fn class_count(&self) -> usize {
        self.tp.len()
    }

    /// Number of evaluated samples, `sum TP + sum FN`.
    pub fn samples(&self) -> u64 {
        self.tp.iter().sum::<u64>() + self.fn_.iter().sum::<u64>()
    }
}

/// Micro- and macro-averaged F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Scores {
    pub micro: f64,
    pub macro_: f64,
}

/// Macro-F1 is the unweighted mean of per-class `2TP / (2TP + FP + FN)`,
/// with classes whose denominator is zero scoring 0. Micro-F1 pools the
/// counts over classes first.
pub fn f1_scores(counts: &ConfusionCounts) -> Result<F1Scores> {
    if counts.samples() == 0 || counts.class_count() == 0 {
        return Err(TpmError::Shape("no evaluated samples".into()));
    }
    let per_class = |i: usize| {
        let denom = 2 * counts.tp[i] + counts.fp[i] + counts.fn_[i];
        if denom == 0 {
            0.0
        } else {
            (2 * counts.tp[i]) as f64 / denom as f64
        }
    };
    let c = counts.class_count();
    let macro_ = (0..c).map(per_class).sum::<f64>() / c as f64;
    let tp: u64 = counts.tp.iter().sum();
    let denom: u64 = (0..c)
        .map(|i| 2 * counts.tp[i] + counts.fp[i] + counts.fn_[i])
        .sum();
    let micro = (2 * tp) as f64 / denom as f64;
    Ok(F1Scores { micro, macro_ })
}

/// Repeated random train/test splits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub repeats: usize,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            repeats: 10,
            stratified: true,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(TpmError::Config(format!(
                "train fraction {} not in (0, 1)",
                self.train_fraction
            )));
        }
        if self.repeats == 0 {
            return Err(TpmError::Config("repeats must be >= 1".into()));
        }
        Ok(())
    }

    pub fn split_seed(&self, repeat: usize) -> u64 {
        derive_seed(self.seed, "split", repeat as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Moves `round(fraction * len)` members (kept within `1..len`) into train.
fn split_group(members: &mut [usize], fraction: f64, split: &mut Split) {
    let len = members.len();
    let train = ((fraction * len as f64).round() as usize).clamp(1, len - 1);
    split.train.extend_from_slice(&members[..train]);
    split.test.extend_from_slice(&members[train..]);
}

/// One split per repeat. With stratification every class is divided in
/// roughly the train fraction; node lists come back sorted.
pub fn stratified_splits(dataset: &LabeledDataset, spec: &SplitSpec) -> Result<Vec<Split>> {
    spec.validate()?;
    let mut groups: Vec<Vec<usize>> = if spec.stratified {
        let mut by_class = vec![Vec::new(); dataset.class_count];
        for (v, &l) in dataset.labels.iter().enumerate() {
            by_class[l].push(v);
        }
        by_class.retain(|g| !g.is_empty());
        by_class
    } else {
        vec![(0..dataset.labels.len()).collect()]
    };
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(TpmError::Dataset(format!(
            "class of node {} has a single member and cannot be split",
            g[0]
        )));
    }
    Ok((0..spec.repeats)
        .map(|r| {
            let mut rng = stream_rng(spec.split_seed(r), "split", 0);
            let mut split = Split {
                train: Vec::new(),
                test: Vec::new(),
            };
            for group in &mut groups {
                group.sort_unstable();
                group.shuffle(&mut rng);
                split_group(group, spec.train_fraction, &mut split);
            }
            split.train.sort_unstable();
            split.test.sort_unstable();
            split
        })
        .collect())
}

/// Trains on the split's training nodes and scores its test nodes.
pub fn evaluate_split(
    dataset: &LabeledDataset,
    embeddings: &EmbeddingMatrix,
    split: &Split,
    spec: &ClassifierSpec,
) -> Result<F1Scores> {
    let x_train = embeddings.vectors.select(Axis(0), &split.train);
    let y_train: Vec<usize> = split.train.iter().map(|&v| dataset.labels[v]).collect();
    let model = train_classifier(x_train.view(), &y_train, dataset.class_count, spec)?;
    let x_test = embeddings.vectors.select(Axis(0), &split.test);
    let y_test: Vec<usize> = split.test.iter().map(|&v| dataset.labels[v]).collect();
    let predicted = model.predict(x_test.view());
    f1_scores(&ConfusionCounts::from_predictions(
        &y_test,
        &predicted,
        dataset.class_count,
    ))
}

/// Mean and spread of Micro/Macro-F1 over `split.repeats` splits.
pub fn evaluate_classification(
    name: &str,
    dataset: &LabeledDataset,
    embeddings: &EmbeddingMatrix,
    split: &SplitSpec,
    classifier: &ClassifierSpec,
) -> Result<EvalReport> {
    if embeddings.node_count() != dataset.graph.node_count() {
        return Err(TpmError::Shape(format!(
            "{} embeddings for {} nodes",
            embeddings.node_count(),
            dataset.graph.node_count()
        )));
    }
    let splits = stratified_splits(dataset, split)?;
    let runs = par::map_indices(splits.len(), Execution::default(), |r| {
        let clf_seed = derive_seed(classifier.seed, "classifier", r as u64);
        let spec = classifier.clone().with_seed(clf_seed);
        let scores = evaluate_split(dataset, embeddings, &splits[r], &spec)?;
        Ok(RunRecord {
            index: r,
            seeds: vec![
                ("split".into(), split.split_seed(r)),
                ("classifier".into(), clf_seed),
                ("walk".into(), embeddings.config.seed),
            ],
            train_size: splits[r].train.len(),
            test_size: splits[r].test.len(),
            micro_f1: Some(scores.micro),
            macro_f1: Some(scores.macro_),
            auc: None,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut report = EvalReport {
        task: Task::Classification,
        dataset: name.to_owned(),
        walk: embeddings.config,
        classifier: classifier.clone(),
        split: Some(*split),
        links: None,
        operator: None,
        runs,
        micro_f1: None,
        macro_f1: None,
        auc: None,
    };
    report.summarize();
    Ok(report)
}
