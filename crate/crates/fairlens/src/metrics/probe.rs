//! Shallow predictor trained to recover the protected attribute from the
//! representations with cross-entropy. A logits-level comparison metric: low
//! probe loss is often read as bias, but an overfit probe reaches low
//! training loss even on unpaired representations, which is exactly the
//! pathology this suite demonstrates against the MI estimate.

use crate::data::RepresentationSet;
use crate::nn::{adam_step, Activation, AdamState, DenseNet};
use crate::{Error, Result};
use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Fraction of samples held out for evaluation, in [0, 1). Zero holds
    /// nothing out and evaluates on the training data (the overfit mode).
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64],
            epochs: 50,
            batch_size: 128,
            learning_rate: 1e-3,
            holdout_fraction: 0.2,
            seed: 0,
        }
    }
}

impl ProbeConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs and batch_size must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(Error::Config(format!(
                "holdout_fraction must be in [0, 1), got {}",
                self.holdout_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProbeMetrics {
    pub train_loss: f64,
    pub holdout_loss: f64,
    pub holdout_accuracy: f64,
}

/// Mean cross-entropy of softmax(logits) against integer labels, and the
/// logits gradient of that mean.
fn softmax_cross_entropy(logits: &Array2<f64>, labels: &[u32]) -> (f64, Array2<f64>) {
    let k = logits.nrows();
    let mut d_logits = logits.clone();
    let mut loss = 0.0;
    for (i, mut row) in d_logits.rows_mut().into_iter().enumerate() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        let label = labels[i] as usize;
        loss -= (row[label] / sum).ln();
        for (j, v) in row.iter_mut().enumerate() {
            let p = *v / sum;
            *v = (p - if j == label { 1.0 } else { 0.0 }) / k as f64;
        }
    }
    (loss / k as f64, d_logits)
}

fn accuracy(logits: &Array2<f64>, labels: &[u32]) -> f64 {
    let correct = logits
        .rows()
        .into_iter()
        .zip(labels)
        .filter(|(row, &label)| {
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite logits"))
                .map(|(j, _)| j)
                .unwrap_or(0);
            argmax == label as usize
        })
        .count();
    correct as f64 / labels.len() as f64
}

/// Train the probe and report train loss, holdout loss, and holdout accuracy.
/// Deterministic under the config seed.
pub fn logits_probe(data: &RepresentationSet, config: &ProbeConfig) -> Result<ProbeMetrics> {
    config.validate()?;
    if data.observed_classes() < 2 {
        return Err(Error::DegenerateAttribute(
            "probe needs at least two attribute classes".into(),
        ));
    }

    let n = data.len();
    let m = data.num_classes();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let holdout_count = ((n as f64) * config.holdout_fraction).round() as usize;
    let holdout_count = holdout_count.min(n.saturating_sub(1));
    let (holdout_idx, train_idx) = order.split_at(holdout_count);

    let reps = data.representations();
    let attrs = data.attributes();
    let gather = |idx: &[usize]| -> (Array2<f64>, Vec<u32>) {
        (
            reps.select(Axis(0), idx),
            idx.iter().map(|&i| attrs[i]).collect(),
        )
    };
    let (train_x, train_y) = gather(train_idx);
    let (holdout_x, holdout_y) = if holdout_idx.is_empty() {
        (train_x.clone(), train_y.clone())
    } else {
        gather(holdout_idx)
    };

    let mut dims = vec![data.dim()];
    dims.extend_from_slice(&config.hidden);
    dims.push(m);
    let mut net = DenseNet::new(&dims, Activation::Relu, config.seed)?;
    let mut opt = AdamState::new(&net, config.learning_rate);

    let n_train = train_idx.len();
    let mut batch_order: Vec<usize> = (0..n_train).collect();
    for _ in 0..config.epochs {
        batch_order.shuffle(&mut rng);
        for chunk in batch_order.chunks(config.batch_size) {
            let x = train_x.select(Axis(0), chunk);
            let y: Vec<u32> = chunk.iter().map(|&i| train_y[i]).collect();
            let (logits, cache) = net.forward(&x)?;
            let (_, d_logits) = softmax_cross_entropy(&logits, &y);
            let (grads, _) = net.backward(&cache, &d_logits)?;
            adam_step(&mut net, &mut opt, &grads)?;
        }
    }

    let (train_logits, _) = net.forward(&train_x)?;
    let (train_loss, _) = softmax_cross_entropy(&train_logits, &train_y);
    let (holdout_logits, _) = net.forward(&holdout_x)?;
    let (holdout_loss, _) = softmax_cross_entropy(&holdout_logits, &holdout_y);
    Ok(ProbeMetrics {
        train_loss,
        holdout_loss,
        holdout_accuracy: accuracy(&holdout_logits, &holdout_y),
    })
}
