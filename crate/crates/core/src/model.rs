//! Built-in classifiers: multinomial logistic regression and a ReLU
//! multi-layer perceptron trained with Adam. Both minimize softmax
//! cross-entropy plus an L2 penalty and are deterministic for a fixed seed.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TpmError};
use crate::seed::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    /// Softmax regression trained by full-batch gradient descent.
    Logistic,
    /// Dense ReLU network with a softmax output, trained by mini-batch Adam.
    Mlp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub hidden_layers: Vec<usize>,
    pub epochs: usize,
    /// Step size. `None` picks `1/L` for logistic regression (the smoothness
    /// bound of the loss, which makes every step a descent step) and `1e-3`
    /// for Adam.
    pub learning_rate: Option<f64>,
    pub batch_size: usize,
    pub l2: f64,
    /// Rescale features to zero mean and unit variance using training data.
    pub standardize: bool,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn logistic() -> Self {
        Self {
            kind: ClassifierKind::Logistic,
            hidden_layers: Vec::new(),
            epochs: 1000,
            learning_rate: None,
            batch_size: 0,
            l2: 1e-4,
            standardize: false,
            seed: 0,
        }
    }

    /// The 128-64 ReLU network.
    pub fn mlp() -> Self {
        Self {
            kind: ClassifierKind::Mlp,
            hidden_layers: vec![128, 64],
            epochs: 200,
            learning_rate: None,
            batch_size: 64,
            l2: 1e-4,
            standardize: false,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(TpmError::Config("epochs must be >= 1".into()));
        }
        if self.kind == ClassifierKind::Mlp && self.batch_size == 0 {
            return Err(TpmError::Config("batch_size must be >= 1".into()));
        }
        if self.hidden_layers.contains(&0) {
            return Err(TpmError::Config("hidden layers must be non-empty".into()));
        }
        if let Some(lr) = self.learning_rate {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(TpmError::Config(format!("learning rate {lr} must be > 0")));
            }
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(TpmError::Config(format!("l2 {} must be >= 0", self.l2)));
        }
        Ok(())
    }
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self::logistic()
    }
}

#[derive(Debug, Clone)]
struct Dense {
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl Dense {
    fn forward(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.weights) + &self.bias
    }
}

#[derive(Debug, Clone)]
struct Scaler {
    mean: Array1<f64>,
    scale: Array1<f64>,
}

impl Scaler {
    fn fit(x: &ArrayView2<f64>) -> Self {
        let mean = x.mean_axis(Axis(0)).expect("non-empty");
        let scale = x
            .std_axis(Axis(0), 0.0)
            .mapv(|s| if s > 1e-12 { s } else { 1.0 });
        Self { mean, scale }
    }

    fn apply(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        (x - &self.mean) / &self.scale
    }
}

/// A trained classifier.
#[derive(Debug, Clone)]
pub struct Classifier {
    layers: Vec<Dense>,
    scaler: Option<Scaler>,
    class_count: usize,
    /// Mean training loss (cross-entropy plus penalty) after each epoch.
    pub loss_history: Vec<f64>,
}

fn relu_inplace(x: &mut Array2<f64>) {
    x.mapv_inplace(|v| v.max(0.0));
}

/// Row-wise softmax, in place.
fn softmax_inplace(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

fn cross_entropy(probs: &Array2<f64>, labels: &[usize]) -> f64 {
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| -probs[[i, y]].max(1e-300).ln())
        .sum();
    total / labels.len() as f64
}

impl Classifier {
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    fn transform(&self, x: &ArrayView2<f64>) -> Option<Array2<f64>> {
        self.scaler.as_ref().map(|s| s.apply(x))
    }

    /// Class probabilities, one row per sample.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let scaled = self.transform(&x);
        let mut h = scaled.as_ref().map_or(x, |a| a.view()).to_owned();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.forward(&h.view());
            if i < last {
                relu_inplace(&mut h);
            }
        }
        softmax_inplace(&mut h);
        h
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        self.predict_proba(x)
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (j, &p)| {
                        if p > best.1 {
                            (j, p)
                        } else {
                            best
                        }
                    })
                    .0
            })
            .collect()
    }

    fn penalty(&self, l2: f64) -> f64 {
        0.5 * l2
            * self
                .layers
                .iter()
                .map(|l| l.weights.iter().map(|w| w * w).sum::<f64>())
                .sum::<f64>()
    }
}

/// Trains a classifier on `features` (one row per sample) and `labels` in
/// `0..class_count`.
pub fn train_classifier(
    features: ArrayView2<f64>,
    labels: &[usize],
    class_count: usize,
    spec: &ClassifierSpec,
) -> Result<Classifier> {
    spec.validate()?;
    if features.nrows() != labels.len() {
        return Err(TpmError::Shape(format!(
            "{} feature rows for {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(TpmError::Shape("no training samples".into()));
    }
    if class_count < 2 {
        return Err(TpmError::Config(format!(
            "need at least 2 classes, got {class_count}"
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
        return Err(TpmError::Config(format!(
            "label {bad} outside 0..{class_count}"
        )));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(TpmError::NonFinite("training features".into()));
    }
    let scaler = spec.standardize.then(|| Scaler::fit(&features));
    let scaled = scaler.as_ref().map(|s| s.apply(&features));
    let x = scaled.as_ref().map_or(features, |a| a.view());
    match spec.kind {
        ClassifierKind::Logistic => train_logistic(x, labels, class_count, spec, scaler),
        ClassifierKind::Mlp => train_mlp(x, labels, class_count, spec, scaler),
    }
}

fn one_hot(labels: &[usize], class_count: usize) -> Array2<f64> {
    let mut y = Array2::zeros((labels.len(), class_count));
    for (i, &l) in labels.iter().enumerate() {
        y[[i, l]] = 1.0;
    }
    y
}

fn check_loss(epoch: usize, loss: f64) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(TpmError::Diverged { epoch, loss })
    }
}

fn train_logistic(
    x: ArrayView2<f64>,
    labels: &[usize],
    class_count: usize,
    spec: &ClassifierSpec,
    scaler: Option<Scaler>,
) -> Result<Classifier> {
    let n = x.nrows() as f64;
    let dim = x.ncols();
    // Softmax cross-entropy is L-smooth with L <= 0.5 * lambda_max(X'X / n),
    // bounded by the mean squared row norm (bias column included).
    let mean_sq = x.rows().into_iter().map(|r| r.dot(&r) + 1.0).sum::<f64>() / n;
    let step = spec
        .learning_rate
        .unwrap_or(1.0 / (0.5 * mean_sq + spec.l2));
    let targets = one_hot(labels, class_count);
    let mut model = Classifier {
        layers: vec![Dense {
            weights: Array2::zeros((dim, class_count)),
            bias: Array1::zeros(class_count),
        }],
        scaler,
        class_count,
        loss_history: Vec::with_capacity(spec.epochs),
    };
    for epoch in 0..spec.epochs {
        let layer = &model.layers[0];
        let mut probs = layer.forward(&x);
        softmax_inplace(&mut probs);
        let loss = cross_entropy(&probs, labels) + model.penalty(spec.l2);
        check_loss(epoch, loss)?;
        model.loss_history.push(loss);
        let delta = (probs - &targets) / n;
        let grad_w = x.t().dot(&delta) + &(&layer.weights * spec.l2);
        let grad_b = delta.sum_axis(Axis(0));
        let layer = &mut model.layers[0];
        layer.weights.scaled_add(-step, &grad_w);
        layer.bias.scaled_add(-step, &grad_b);
    }
    Ok(model)
}

struct AdamSlot {
    m: Array2<f64>,
    v: Array2<f64>,
    mb: Array1<f64>,
    vb: Array1<f64>,
}

fn train_mlp(
    x: ArrayView2<f64>,
    labels: &[usize],
    class_count: usize,
    spec: &ClassifierSpec,
    scaler: Option<Scaler>,
) -> Result<Classifier> {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let lr = spec.learning_rate.unwrap_or(1e-3);
    let mut rng = stream_rng(spec.seed, "mlp", 0);

    let mut widths = vec![x.ncols()];
    widths.extend(&spec.hidden_layers);
    widths.push(class_count);
    let layers: Vec<Dense> = widths
        .windows(2)
        .map(|w| {
            // He initialization
            let bound = (6.0 / w[0] as f64).sqrt();
            Dense {
                weights: Array2::from_shape_simple_fn((w[0], w[1]), || {
                    rng.random_range(-bound..bound)
                }),
                bias: Array1::zeros(w[1]),
            }
        })
        .collect();
    let mut slots: Vec<AdamSlot> = layers
        .iter()
        .map(|l| AdamSlot {
            m: Array2::zeros(l.weights.raw_dim()),
            v: Array2::zeros(l.weights.raw_dim()),
            mb: Array1::zeros(l.bias.len()),
            vb: Array1::zeros(l.bias.len()),
        })
        .collect();
    let mut model = Classifier {
        layers,
        scaler,
        class_count,
        loss_history: Vec::with_capacity(spec.epochs),
    };

    let n = x.nrows();
    let batch = spec.batch_size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0i32;
    for epoch in 0..spec.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let xb = x.select(Axis(0), chunk);
            let yb: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let bsz = chunk.len() as f64;

            // forward, keeping post-activation outputs
            let mut acts = vec![xb];
            let last = model.layers.len() - 1;
            for (i, layer) in model.layers.iter().enumerate() {
                let mut h = layer.forward(&acts[i].view());
                if i < last {
                    relu_inplace(&mut h);
                } else {
                    softmax_inplace(&mut h);
                }
                acts.push(h);
            }
            let probs = acts.pop().expect("output layer");
            epoch_loss += cross_entropy(&probs, &yb) * bsz;

            let mut delta = probs - &one_hot(&yb, class_count);
            delta /= bsz;
            t += 1;
            let bc1 = 1.0 - BETA1.powi(t);
            let bc2 = 1.0 - BETA2.powi(t);
            for i in (0..model.layers.len()).rev() {
                let input = &acts[i];
                let grad_w = input.t().dot(&delta) + &(&model.layers[i].weights * spec.l2);
                let grad_b = delta.sum_axis(Axis(0));
                if i > 0 {
                    let mut back = delta.dot(&model.layers[i].weights.t());
                    back.zip_mut_with(input, |d, &a| {
                        if a <= 0.0 {
                            *d = 0.0;
                        }
                    });
                    delta = back;
                }
                let slot = &mut slots[i];
                let layer = &mut model.layers[i];
                slot.m
                    .zip_mut_with(&grad_w, |m, &g| *m = BETA1 * *m + (1.0 - BETA1) * g);
                slot.v
                    .zip_mut_with(&grad_w, |v, &g| *v = BETA2 * *v + (1.0 - BETA2) * g * g);
                slot.mb
                    .zip_mut_with(&grad_b, |m, &g| *m = BETA1 * *m + (1.0 - BETA1) * g);
                slot.vb
                    .zip_mut_with(&grad_b, |v, &g| *v = BETA2 * *v + (1.0 - BETA2) * g * g);
                ndarray::Zip::from(&mut layer.weights)
                    .and(&slot.m)
                    .and(&slot.v)
                    .for_each(|w, &m, &v| *w -= lr * (m / bc1) / ((v / bc2).sqrt() + EPS));
                ndarray::Zip::from(&mut layer.bias)
                    .and(&slot.mb)
                    .and(&slot.vb)
                    .for_each(|b, &m, &v| *b -= lr * (m / bc1) / ((v / bc2).sqrt() + EPS));
            }
        }
        let loss = epoch_loss / n as f64 + model.penalty(spec.l2);
        check_loss(epoch, loss)?;
        model.loss_history.push(loss);
    }
    Ok(model)
}
