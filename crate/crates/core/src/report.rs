//! Evaluation reports.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::SplitSpec;
use crate::error::{Result, TpmError};
use crate::linkpred::{LinkOperator, LinkSampleSpec};
use crate::model::ClassifierSpec;
use crate::walk::WalkConfig;

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Sample standard deviation (n - 1); zero for a single value.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, std })
    }
}

/// One repeat, run, or test graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    /// Seeds actually used, by purpose.
    pub seeds: Vec<(String, u64)>,
    pub train_size: usize,
    pub test_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micro_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Classification,
    LinkPrediction,
    CrossNetwork,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub dataset: String,
    pub walk: WalkConfig,
    pub classifier: ClassifierSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub links: Option<LinkSampleSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<LinkOperator>,
    pub runs: Vec<RunRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micro_f1: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_f1: Option<Stat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<Stat>,
}

impl EvalReport {
    /// Recomputes the summary statistics from `runs`.
    pub(crate) fn summarize(&mut self) {
        let collect = |f: fn(&RunRecord) -> Option<f64>| -> Vec<f64> {
            self.runs.iter().filter_map(f).collect()
        };
        self.micro_f1 = Stat::of(&collect(|r| r.micro_f1));
        self.macro_f1 = Stat::of(&collect(|r| r.macro_f1));
        self.auc = Stat::of(&collect(|r| r.auc));
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| TpmError::io(path, e))
    }

    pub fn csv_header(&self) -> &'static str {
        match self.task {
            Task::Classification => "dataset,eta,m,seed,micro_mean,micro_std,macro_mean,macro_std",
            Task::LinkPrediction | Task::CrossNetwork => "dataset,eta,m,seed,auc_mean,auc_std",
        }
    }

    /// Summary row matching [`EvalReport::csv_header`].
    pub fn csv_row(&self) -> String {
        let stat = |s: Option<Stat>| match s {
            Some(s) => format!("{},{}", s.mean, s.std),
            None => ",".to_owned(),
        };
        let prefix = format!(
            "{},{},{},{}",
            self.dataset, self.walk.walks_per_node, self.walk.walk_length, self.walk.seed
        );
        match self.task {
            Task::Classification => {
                format!("{prefix},{},{}", stat(self.micro_f1), stat(self.macro_f1))
            }
            Task::LinkPrediction | Task::CrossNetwork => format!("{prefix},{}", stat(self.auc)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_uses_sample_std() {
        let s = Stat::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(Stat::of(&[0.7]).unwrap().std, 0.0);
        assert!(Stat::of(&[]).is_none());
    }

    #[test]
    fn json_round_trip_and_csv() {
        let mut report = EvalReport {
            task: Task::Classification,
            dataset: "toy".into(),
            walk: WalkConfig::default(),
            classifier: ClassifierSpec::logistic(),
            split: Some(SplitSpec::default()),
            links: None,
            operator: None,
            runs: vec![RunRecord {
                index: 0,
                seeds: vec![("split".into(), 5)],
                train_size: 8,
                test_size: 2,
                micro_f1: Some(0.5),
                macro_f1: Some(0.25),
                auc: None,
            }],
            micro_f1: None,
            macro_f1: None,
            auc: None,
        };
        report.summarize();
        let back = EvalReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
        assert_eq!(report.csv_row(), "toy,20,10,0,0.5,0,0.25,0");
        assert_eq!(report.csv_header().split(',').count(), 8);
    }
}
