//! Parameter sensitivity over walk count or walk length.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::{evaluate_classification, SplitSpec};
use crate::error::{Result, TpmError};
use crate::graph::LabeledDataset;
use crate::model::ClassifierSpec;
use crate::report::Stat;
use crate::tpm::embed_all;
use crate::walk::WalkConfig;

/// The walk setting varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    /// Walks per node.
    Eta,
    /// Walk length.
    M,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Eta => "eta",
            SweepParam::M => "m",
        }
    }

    fn apply(self, base: &WalkConfig, value: usize) -> WalkConfig {
        match self {
            SweepParam::Eta => WalkConfig {
                walks_per_node: value,
                ..*base
            },
            SweepParam::M => WalkConfig {
                walk_length: value,
                ..*base
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    pub micro_f1: Stat,
    pub macro_f1: Stat,
}

/// Re-embeds and re-evaluates the dataset for each value of `param`, all
/// other settings held at `base`.
pub fn sweep(
    dataset: &LabeledDataset,
    base: &WalkConfig,
    param: SweepParam,
    values: &[usize],
    split: &SplitSpec,
    classifier: &ClassifierSpec,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(TpmError::Config("sweep needs at least one value".into()));
    }
    values
        .iter()
        .map(|&value| {
            let walk = param.apply(base, value);
            walk.validate()?;
            let embeddings = embed_all(&dataset.graph, &walk)?;
            let report = evaluate_classification("sweep", dataset, &embeddings, split, classifier)?;
            Ok(SweepRow {
                value,
                micro_f1: report.micro_f1.expect("classification report has F1"),
                macro_f1: report.macro_f1.expect("classification report has F1"),
            })
        })
        .collect()
}

/// `param,micro_mean,micro_std,macro_mean,macro_std` rows.
pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let mut out = format!(
        "{},micro_mean,micro_std,macro_mean,macro_std\n",
        param.name()
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.value, r.micro_f1.mean, r.micro_f1.std, r.macro_f1.mean, r.macro_f1.std
        )
        .expect("write to string");
    }
    out
}

pub fn write_sweep_csv(path: impl AsRef<Path>, param: SweepParam, rows: &[SweepRow]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, sweep_csv(param, rows)).map_err(|e| TpmError::io(path, e))
}
