//! Neural mutual-information lower-bound estimation between representations
//! and discrete protected attributes.
//!
//! A pair of single-layer mapping networks projects representations and
//! one-hot attributes into a shared space; a statistics network scores
//! (mapped representation, mapped attribute) pairs. The Donsker-Varadhan
//! lower bound is estimated on minibatches, trained with an EMA-corrected
//! loss, and maximized until the windowed estimate stops moving.

use crate::data::RepresentationSet;
use crate::nn::{adam_step, one_hot, Activation, AdamState, DenseNet, ForwardCache, GradSet};
use crate::{Error, Result};
use ndarray::{concatenate, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Hyperparameters for one estimation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MineConfig {
    /// Minibatch size k for both the joint and marginal draws.
    pub batch_size: usize,
    /// Smoothing coefficient α for the EMA of the marginal normalizer.
    pub ema_alpha: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Width of the trailing window used for both the convergence test and
    /// the final estimate.
    pub convergence_window: usize,
    /// The run stops once the window-averaged estimate changes by less than
    /// this, relative to `max(1, |previous window mean|)`.
    pub convergence_tol: f64,
    /// Shared output dimensionality of the two mapping networks.
    pub map_dim: usize,
    /// Hidden widths of the statistics network.
    pub stats_hidden: Vec<usize>,
    /// With mapping networks disabled the statistics network scores raw
    /// (representation, one-hot attribute) pairs directly. The baseline
    /// estimator variant; kept for variance comparisons.
    pub use_mapping: bool,
    /// Fraction of samples reserved for evaluation batches. The critic trains
    /// on the remainder; the reported estimate, the convergence test, and
    /// `final_mi` all use held-out batches. A finite sample has an empirical
    /// joint with far more dependence than the population, and a critic that
    /// memorizes it scores spurious MI on its own training rows; held-out
    /// scoring keeps independent data at zero. Zero disables the split.
    pub eval_fraction: f64,
    pub seed: u64,
}

impl Default for MineConfig {
    fn default() -> Self {
        Self {
            batch_size: 256,
            ema_alpha: 0.01,
            learning_rate: 1e-3,
            max_iters: 5000,
            convergence_window: 200,
            convergence_tol: 1e-3,
            map_dim: 64,
            stats_hidden: vec![128, 128],
            use_mapping: true,
            eval_fraction: 0.5,
            seed: 0,
        }
    }
}

impl MineConfig {
    /// Validate against a dataset of `n` samples.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.batch_size > n {
            return Err(Error::Config(format!(
                "batch_size {} exceeds dataset size {n}",
                self.batch_size
            )));
        }
        if !(self.ema_alpha > 0.0 && self.ema_alpha <= 1.0) {
            return Err(Error::Config(format!(
                "ema_alpha must be in (0, 1], got {}",
                self.ema_alpha
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if self.convergence_window == 0 {
            return Err(Error::Config("convergence_window must be positive".into()));
        }
        if self.convergence_window >= self.max_iters {
            return Err(Error::Config(format!(
                "convergence_window {} must be smaller than max_iters {}",
                self.convergence_window, self.max_iters
            )));
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return Err(Error::Config("convergence_tol must be positive".into()));
        }
        if self.use_mapping && self.map_dim == 0 {
            return Err(Error::Config("map_dim must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.eval_fraction) {
            return Err(Error::Config(format!(
                "eval_fraction must be in [0, 1), got {}",
                self.eval_fraction
            )));
        }
        if self.eval_fraction > 0.0 {
            let eval_n = self.eval_count(n);
            let train_n = n - eval_n;
            if train_n < 2 || eval_n < 2 {
                return Err(Error::Config(format!(
                    "splitting {n} samples leaves {train_n} train / {eval_n} eval; each \
                     partition needs at least 2 samples (or set eval_fraction to 0)"
                )));
            }
            if self.batch_size > train_n.min(eval_n) {
                return Err(Error::Config(format!(
                    "batch_size {} exceeds the smaller split partition ({train_n} train / \
                     {eval_n} eval of {n} samples); shrink the batch or set eval_fraction to 0",
                    self.batch_size
                )));
            }
        }
        Ok(())
    }

    fn eval_count(&self, n: usize) -> usize {
        ((n as f64) * self.eval_fraction).round() as usize
    }
}

/// Per-iteration history of one estimation run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    /// Minibatch Donsker-Varadhan estimates, one per iteration. With a split
    /// configured these come from held-out batches; otherwise from the
    /// training batches themselves.
    pub mi_estimates: Vec<f64>,
    /// Training loss values, one per iteration.
    pub losses: Vec<f64>,
    /// EMA of the marginal normalizer, one per iteration.
    pub ema: Vec<f64>,
    /// Iteration at which the convergence test fired, if it did.
    pub converged_at: Option<usize>,
    /// Trailing-window mean of the estimates, clamped below at zero.
    pub final_mi: f64,
}

/// Result of [`estimate_mi`].
#[derive(Debug, Clone)]
pub struct MiEstimate {
    /// Converged lower-bound estimate in nats, never negative.
    pub mi: f64,
    pub trace: TrainTrace,
}

/// One sampled training batch. The attribute labels of the joint draw are
/// reused verbatim for the marginal term; only the representations are
/// redrawn, which is what breaks the pairing.
#[derive(Debug, Clone)]
pub struct MineBatch {
    pub joint_reps: Array2<f64>,
    pub joint_attrs: Vec<u32>,
    pub marginal_reps: Array2<f64>,
}

/// Draw k aligned (representation, attribute) pairs uniformly without
/// replacement, plus an independent draw of k representation rows for the
/// marginal term.
pub fn sample_joint_and_marginal(
    data: &RepresentationSet,
    k: usize,
    rng: &mut impl Rng,
) -> Result<MineBatch> {
    let n = data.len();
    if k == 0 || k > n {
        return Err(Error::Config(format!(
            "batch size {k} must be in 1..={n} for {n} samples"
        )));
    }
    let joint_idx = rand::seq::index::sample(rng, n, k).into_vec();
    let marginal_idx = rand::seq::index::sample(rng, n, k).into_vec();
    let reps = data.representations();
    let joint_reps = reps.select(Axis(0), &joint_idx);
    let marginal_reps = reps.select(Axis(0), &marginal_idx);
    let joint_attrs = joint_idx.iter().map(|&i| data.attributes()[i]).collect();
    Ok(MineBatch {
        joint_reps,
        joint_attrs,
        marginal_reps,
    })
}

/// log(mean(exp(v))) with max-subtraction so large scores stay finite.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + (sum / values.len() as f64).ln()
}

/// Minibatch Donsker-Varadhan value: `mean(o_joint) − log(mean(exp(o_marginal)))`.
pub fn dv_estimate(o_joint: &[f64], o_marginal: &[f64]) -> f64 {
    let mean_joint = o_joint.iter().sum::<f64>() / o_joint.len() as f64;
    mean_joint - log_mean_exp(o_marginal)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let max = a.max(b);
    if !max.is_finite() {
        return max;
    }
    max + ((a - max).exp() + (b - max).exp()).ln()
}

/// Statistics-network scores for one batch, plus the caches backprop needs.
pub struct BatchScores {
    pub o_joint: Vec<f64>,
    pub o_marginal: Vec<f64>,
    cache_map_joint_r: Option<ForwardCache>,
    cache_map_marginal_r: Option<ForwardCache>,
    cache_map_z: Option<ForwardCache>,
    cache_stats_joint: ForwardCache,
    cache_stats_marginal: ForwardCache,
}

/// Gradients for every trainable network in a [`MineModel`].
pub struct MineGrads {
    pub stats: GradSet,
    pub map_r: Option<GradSet>,
    pub map_z: Option<GradSet>,
}

/// Mapping networks plus statistics network.
#[derive(Debug, Clone)]
pub struct MineModel {
    map_r: Option<DenseNet>,
    map_z: Option<DenseNet>,
    stats_net: DenseNet,
    rep_dim: usize,
    num_classes: usize,
}

/// Seeds for the three networks and the batch sampler, all derived from the
/// run seed through one ChaCha stream.
fn derived_seeds(seed: u64) -> [u64; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [rng.gen(), rng.gen(), rng.gen(), rng.gen()]
}

impl MineModel {
    /// Build a model for `rep_dim`-dimensional representations and
    /// `num_classes` attribute values, seeded from `config.seed`.
    pub fn new(rep_dim: usize, num_classes: usize, config: &MineConfig) -> Result<Self> {
        if rep_dim == 0 || num_classes == 0 {
            return Err(Error::Config(
                "rep_dim and num_classes must be positive".into(),
            ));
        }
        let [seed_r, seed_z, seed_s, _] = derived_seeds(config.seed);
        let stats_in = if config.use_mapping {
            2 * config.map_dim
        } else {
            rep_dim + num_classes
        };
        let mut stats_dims = vec![stats_in];
        stats_dims.extend_from_slice(&config.stats_hidden);
        stats_dims.push(1);
        let stats_net = DenseNet::new(&stats_dims, Activation::Relu, seed_s)?;
        let (map_r, map_z) = if config.use_mapping {
            // Single fully connected layers, no activation.
            let map_r = DenseNet::new(&[rep_dim, config.map_dim], Activation::Identity, seed_r)?;
            let map_z =
                DenseNet::new(&[num_classes, config.map_dim], Activation::Identity, seed_z)?;
            (Some(map_r), Some(map_z))
        } else {
            (None, None)
        };
        Ok(Self {
            map_r,
            map_z,
            stats_net,
            rep_dim,
            num_classes,
        })
    }

    pub fn rep_dim(&self) -> usize {
        self.rep_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn uses_mapping(&self) -> bool {
        self.map_r.is_some()
    }

    pub fn stats_net(&self) -> &DenseNet {
        &self.stats_net
    }

    pub fn stats_net_mut(&mut self) -> &mut DenseNet {
        &mut self.stats_net
    }

    pub fn map_r(&self) -> Option<&DenseNet> {
        self.map_r.as_ref()
    }

    pub fn map_r_mut(&mut self) -> Option<&mut DenseNet> {
        self.map_r.as_mut()
    }

    pub fn map_z(&self) -> Option<&DenseNet> {
        self.map_z.as_ref()
    }

    pub fn map_z_mut(&mut self) -> Option<&mut DenseNet> {
        self.map_z.as_mut()
    }

    /// Score the batch: `o_joint[i] = g(w_joint_i, s_i)` and
    /// `o_marginal[i] = g(w_marginal_i, s_i)`, with the same mapped attribute
    /// rows s appearing in both terms.
    pub fn score_batch(&self, batch: &MineBatch) -> Result<BatchScores> {
        if batch.joint_reps.ncols() != self.rep_dim || batch.marginal_reps.ncols() != self.rep_dim {
            return Err(Error::Dimension(format!(
                "batch representations have {} columns, model expects {}",
                batch.joint_reps.ncols(),
                self.rep_dim
            )));
        }
        if batch.joint_reps.nrows() != batch.joint_attrs.len()
            || batch.marginal_reps.nrows() != batch.joint_attrs.len()
        {
            return Err(Error::Dimension(
                "joint and marginal batch sizes disagree".into(),
            ));
        }
        let z_onehot = one_hot(&batch.joint_attrs, self.num_classes)?;

        let (w_joint, w_marginal, s, cache_map_joint_r, cache_map_marginal_r, cache_map_z) =
            match (&self.map_r, &self.map_z) {
                (Some(map_r), Some(map_z)) => {
                    let (w_j, c_j) = map_r.forward(&batch.joint_reps)?;
                    let (w_m, c_m) = map_r.forward(&batch.marginal_reps)?;
                    let (s, c_z) = map_z.forward(&z_onehot)?;
                    (w_j, w_m, s, Some(c_j), Some(c_m), Some(c_z))
                }
                _ => (
                    batch.joint_reps.clone(),
                    batch.marginal_reps.clone(),
                    z_onehot,
                    None,
                    None,
                    None,
                ),
            };

        let in_joint = concatenate(Axis(1), &[w_joint.view(), s.view()])
            .expect("row counts match by construction");
        let in_marginal = concatenate(Axis(1), &[w_marginal.view(), s.view()])
            .expect("row counts match by construction");
        let (o_joint, cache_stats_joint) = self.stats_net.forward(&in_joint)?;
        let (o_marginal, cache_stats_marginal) = self.stats_net.forward(&in_marginal)?;

        Ok(BatchScores {
            o_joint: o_joint.column(0).to_vec(),
            o_marginal: o_marginal.column(0).to_vec(),
            cache_map_joint_r,
            cache_map_marginal_r,
            cache_map_z,
            cache_stats_joint,
            cache_stats_marginal,
        })
    }

    /// EMA-corrected training loss, with the normalizer supplied in log space
    /// and treated as a constant:
    /// `L = −(mean(o_joint) − mean(exp(o_marginal)) / ema)`.
    pub fn loss_given_log_ema(&self, batch: &MineBatch, log_ema: f64) -> Result<f64> {
        let scores = self.score_batch(batch)?;
        Ok(loss_from_scores(
            &scores.o_joint,
            &scores.o_marginal,
            log_ema,
        ))
    }

    /// Gradients of the EMA-corrected loss with respect to every parameter of
    /// the statistics network and both mapping networks.
    pub fn loss_grads(&self, scores: &BatchScores, log_ema: f64) -> Result<MineGrads> {
        let k = scores.o_joint.len() as f64;
        // dL/do_joint_i = −1/k; dL/do_marginal_i = exp(o_i − log_ema)/k.
        let d_o_joint = Array2::from_shape_fn((scores.o_joint.len(), 1), |_| -1.0 / k);
        let d_o_marginal = Array2::from_shape_fn((scores.o_marginal.len(), 1), |(i, _)| {
            (scores.o_marginal[i] - log_ema).exp() / k
        });

        let (stats_grads_joint, d_in_joint) = self
            .stats_net
            .backward(&scores.cache_stats_joint, &d_o_joint)?;
        let (stats_grads_marginal, d_in_marginal) = self
            .stats_net
            .backward(&scores.cache_stats_marginal, &d_o_marginal)?;
        let mut stats = stats_grads_joint;
        stats.add_assign(&stats_grads_marginal);

        let (map_r, map_z) = match (&self.map_r, &self.map_z) {
            (Some(map_r), Some(map_z)) => {
                let map_dim = map_r.output_dim();
                let d_w_joint = d_in_joint.slice(ndarray::s![.., ..map_dim]).to_owned();
                let d_s_joint = d_in_joint.slice(ndarray::s![.., map_dim..]).to_owned();
                let d_w_marginal = d_in_marginal.slice(ndarray::s![.., ..map_dim]).to_owned();
                let d_s_marginal = d_in_marginal.slice(ndarray::s![.., map_dim..]).to_owned();

                let cache_j = scores
                    .cache_map_joint_r
                    .as_ref()
                    .expect("cache from score_batch");
                let cache_m = scores
                    .cache_map_marginal_r
                    .as_ref()
                    .expect("cache from score_batch");
                let cache_z = scores.cache_map_z.as_ref().expect("cache from score_batch");

                let (mut g_r, _) = map_r.backward(cache_j, &d_w_joint)?;
                let (g_r_marginal, _) = map_r.backward(cache_m, &d_w_marginal)?;
                g_r.add_assign(&g_r_marginal);

                // The mapped attribute rows feed both score terms.
                let d_s = &d_s_joint + &d_s_marginal;
                let (g_z, _) = map_z.backward(cache_z, &d_s)?;
                (Some(g_r), Some(g_z))
            }
            _ => (None, None),
        };

        Ok(MineGrads {
            stats,
            map_r,
            map_z,
        })
    }
}

/// `L = −(mean(o_joint) − exp(log_mean_exp(o_marginal) − log_ema))`, the
/// overflow-safe form of `−(mean(o_joint) − mean(exp(o_marginal))/ema)`.
pub fn loss_from_scores(o_joint: &[f64], o_marginal: &[f64], log_ema: f64) -> f64 {
    let mean_joint = o_joint.iter().sum::<f64>() / o_joint.len() as f64;
    -(mean_joint - (log_mean_exp(o_marginal) - log_ema).exp())
}

/// Incremental trainer: owns the model, optimizer state, EMA, and trace.
pub struct MineTrainer {
    model: MineModel,
    opt_stats: AdamState,
    opt_map_r: Option<AdamState>,
    opt_map_z: Option<AdamState>,
    /// EMA of mean(exp(o_marginal)), tracked in log space.
    log_ema: Option<f64>,
    ema_alpha: f64,
    trace: TrainTrace,
}

/// Outcome of one training step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub mi_estimate: f64,
    pub loss: f64,
    pub ema: f64,
}

impl MineTrainer {
    pub fn new(rep_dim: usize, num_classes: usize, config: &MineConfig) -> Result<Self> {
        let model = MineModel::new(rep_dim, num_classes, config)?;
        let opt_stats = AdamState::new(&model.stats_net, config.learning_rate);
        let opt_map_r = model
            .map_r
            .as_ref()
            .map(|n| AdamState::new(n, config.learning_rate));
        let opt_map_z = model
            .map_z
            .as_ref()
            .map(|n| AdamState::new(n, config.learning_rate));
        Ok(Self {
            model,
            opt_stats,
            opt_map_r,
            opt_map_z,
            log_ema: None,
            ema_alpha: config.ema_alpha,
            trace: TrainTrace::default(),
        })
    }

    pub fn model(&self) -> &MineModel {
        &self.model
    }

    pub fn trace(&self) -> &TrainTrace {
        &self.trace
    }

    /// Score the batch, update the EMA, take one gradient step on all
    /// networks, and append to the trace.
    pub fn step(&mut self, batch: &MineBatch) -> Result<StepOutcome> {
        let scores = self.model.score_batch(batch)?;
        let mi_estimate = dv_estimate(&scores.o_joint, &scores.o_marginal);
        let log_mean = log_mean_exp(&scores.o_marginal);

        // EMA_0 is the first batch value itself; afterwards
        // EMA_t = α·mean_t + (1−α)·EMA_{t−1}, updated before the loss uses it.
        // α = 1 makes the second term ln(0) = −∞, degenerating to the batch value.
        let log_ema = match self.log_ema {
            None => log_mean,
            Some(prev) => log_add_exp(
                self.ema_alpha.ln() + log_mean,
                (1.0 - self.ema_alpha).ln() + prev,
            ),
        };
        self.log_ema = Some(log_ema);

        let loss = loss_from_scores(&scores.o_joint, &scores.o_marginal, log_ema);
        if !loss.is_finite() || !mi_estimate.is_finite() {
            let iteration = self.trace.mi_estimates.len();
            return Err(Error::Diverged {
                iteration,
                trace: Box::new(self.trace.clone()),
            });
        }

        let grads = self.model.loss_grads(&scores, log_ema)?;
        adam_step(&mut self.model.stats_net, &mut self.opt_stats, &grads.stats)?;
        if let (Some(net), Some(opt), Some(g)) = (
            self.model.map_r.as_mut(),
            self.opt_map_r.as_mut(),
            grads.map_r.as_ref(),
        ) {
            adam_step(net, opt, g)?;
        }
        if let (Some(net), Some(opt), Some(g)) = (
            self.model.map_z.as_mut(),
            self.opt_map_z.as_mut(),
            grads.map_z.as_ref(),
        ) {
            adam_step(net, opt, g)?;
        }

        let ema = log_ema.exp();
        self.trace.mi_estimates.push(mi_estimate);
        self.trace.losses.push(loss);
        self.trace.ema.push(ema);
        Ok(StepOutcome {
            mi_estimate,
            loss,
            ema,
        })
    }
}

/// Convergence test: compares the means of the two most recent disjoint
/// windows of the estimate trace.
struct ConvergenceTest {
    window: usize,
    tol: f64,
}

impl ConvergenceTest {
    fn check(&self, estimates: &[f64]) -> bool {
        let w = self.window;
        if estimates.len() < 2 * w {
            return false;
        }
        let cur: f64 = estimates[estimates.len() - w..].iter().sum::<f64>() / w as f64;
        let prev: f64 = estimates[estimates.len() - 2 * w..estimates.len() - w]
            .iter()
            .sum::<f64>()
            / w as f64;
        (cur - prev).abs() <= self.tol * prev.abs().max(1.0)
    }
}

/// Train to convergence and return the trailing-window estimate.
///
/// With `eval_fraction > 0` the samples are split once: training batches come
/// from one partition, while the traced estimate — and with it the
/// convergence test and `final_mi` — is computed on fresh batches from the
/// held-out partition after every step.
///
/// Fully deterministic given (data, config): the partition, the batch
/// sampler, and all three network initializations derive from `config.seed`.
pub fn estimate_mi(data: &RepresentationSet, config: &MineConfig) -> Result<MiEstimate> {
    config.validate(data.len())?;
    if data.observed_classes() < 2 {
        return Err(Error::DegenerateAttribute(
            "mutual information with a constant attribute is undefined".into(),
        ));
    }

    let [_, _, _, sample_seed] = derived_seeds(config.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);

    let n = data.len();
    let (train_set, eval_set) = if config.eval_fraction > 0.0 {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let (eval_idx, train_idx) = order.split_at(config.eval_count(n));
        (data.select(train_idx)?, Some(data.select(eval_idx)?))
    } else {
        (data.clone(), None)
    };

    let mut trainer = MineTrainer::new(data.dim(), data.num_classes(), config)?;
    let test = ConvergenceTest {
        window: config.convergence_window,
        tol: config.convergence_tol,
    };

    for iter in 0..config.max_iters {
        let batch = sample_joint_and_marginal(&train_set, config.batch_size, &mut rng)?;
        let outcome = trainer.step(&batch)?;
        let traced = match &eval_set {
            Some(eval) => {
                let eval_batch = sample_joint_and_marginal(eval, config.batch_size, &mut rng)?;
                let scores = trainer.model.score_batch(&eval_batch)?;
                dv_estimate(&scores.o_joint, &scores.o_marginal)
            }
            None => outcome.mi_estimate,
        };
        let slot = trainer.trace.mi_estimates.last_mut().expect("step pushed");
        *slot = traced;

        if test.check(&trainer.trace.mi_estimates) {
            trainer.trace.converged_at = Some(iter);
            break;
        }
    }

    let mut trace = trainer.trace;
    let w = config.convergence_window.min(trace.mi_estimates.len());
    let tail_mean = trace.mi_estimates[trace.mi_estimates.len() - w..]
        .iter()
        .sum::<f64>()
        / w as f64;
    trace.final_mi = tail_mean.max(0.0);
    Ok(MiEstimate {
        mi: trace.final_mi,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn tiny_dataset(n: usize, seed: u64) -> RepresentationSet {
        // Balanced binary attribute, representation = one-hot(z) + small noise.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let attrs: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
        let reps = Array2::from_shape_fn((n, 2), |(i, j)| {
            let hot = if attrs[i] as usize == j { 1.0 } else { 0.0 };
            hot + 0.05 * rng.gen_range(-1.0..1.0)
        });
        RepresentationSet::with_default_names(reps, attrs).unwrap()
    }

    #[test]
    fn sampling_with_k_equal_n_is_a_permutation() {
        let data = tiny_dataset(4, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch = sample_joint_and_marginal(&data, 4, &mut rng).unwrap();
        let mut seen: Vec<u32> = batch.joint_attrs.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 0, 1, 1]);
        // every aligned pair appears exactly once
        let mut rows: Vec<Vec<u64>> = batch
            .joint_reps
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        rows.sort();
        rows.dedup();
        assert_eq!(rows.len(), 4);
    }

    #[test]
    fn sampling_is_deterministic_under_seed() {
        let data = tiny_dataset(32, 0);
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let ba = sample_joint_and_marginal(&data, 8, &mut a).unwrap();
        let bb = sample_joint_and_marginal(&data, 8, &mut b).unwrap();
        assert_eq!(ba.joint_attrs, bb.joint_attrs);
        assert_eq!(ba.joint_reps, bb.joint_reps);
        assert_eq!(ba.marginal_reps, bb.marginal_reps);
    }

    #[test]
    fn sampling_rejects_oversized_batch() {
        let data = tiny_dataset(4, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_joint_and_marginal(&data, 5, &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn dv_estimate_hand_values() {
        // o_joint = [1, 1], o_marginal = [0, 0]: 1 − log(1) = 1.
        assert!((dv_estimate(&[1.0, 1.0], &[0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dv_estimate_survives_large_scores() {
        // log(mean(exp(700))) = 700 exactly under max-subtraction.
        let v = dv_estimate(&[1.0, 1.0], &[700.0, 700.0]);
        assert!(v.is_finite());
        assert!((v - (1.0 - 700.0)).abs() < 1e-9);
        assert!(log_mean_exp(&[700.0, 700.0]).is_finite());
        assert!((log_mean_exp(&[700.0, 700.0]) - 700.0).abs() < 1e-9);
    }

    #[test]
    fn constant_statistics_network_gives_zero_estimate() {
        let config = MineConfig {
            map_dim: 4,
            stats_hidden: vec![8],
            ..MineConfig::default()
        };
        let mut model = MineModel::new(3, 2, &config).unwrap();
        // Zero every parameter, then set the output bias to c: the critic is
        // the constant c and I = c − log(e^c) = 0.
        let c = 1.7;
        let n = model.stats_net.num_params();
        let mut params = vec![0.0; n];
        *params.last_mut().unwrap() = c;
        model.stats_net.set_params_flat(&params).unwrap();
        let zeros_r = vec![0.0; model.map_r().unwrap().num_params()];
        let zeros_z = vec![0.0; model.map_z().unwrap().num_params()];
        model
            .map_r
            .as_mut()
            .unwrap()
            .set_params_flat(&zeros_r)
            .unwrap();
        model
            .map_z
            .as_mut()
            .unwrap()
            .set_params_flat(&zeros_z)
            .unwrap();

        let batch = MineBatch {
            joint_reps: array![[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]],
            joint_attrs: vec![0, 1],
            marginal_reps: array![[0.6, 0.5, 0.4], [0.3, 0.2, 0.1]],
        };
        let scores = model.score_batch(&batch).unwrap();
        assert!(scores.o_joint.iter().all(|&o| (o - c).abs() < 1e-12));
        let i = dv_estimate(&scores.o_joint, &scores.o_marginal);
        assert!(i.abs() < 1e-12);
    }

    #[test]
    fn ema_first_step_equals_first_batch_mean() {
        let data = tiny_dataset(64, 3);
        let config = MineConfig {
            batch_size: 16,
            map_dim: 4,
            stats_hidden: vec![8],
            max_iters: 10,
            convergence_window: 2,
            seed: 5,
            ..MineConfig::default()
        };
        let mut trainer = MineTrainer::new(2, 2, &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = sample_joint_and_marginal(&data, 16, &mut rng).unwrap();
        let scores = trainer.model.score_batch(&batch).unwrap();
        let expected = log_mean_exp(&scores.o_marginal).exp();
        let out = trainer.step(&batch).unwrap();
        assert!((out.ema - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn ema_alpha_one_tracks_current_batch() {
        let data = tiny_dataset(64, 3);
        let config = MineConfig {
            batch_size: 16,
            ema_alpha: 1.0,
            map_dim: 4,
            stats_hidden: vec![8],
            max_iters: 10,
            convergence_window: 2,
            seed: 5,
            ..MineConfig::default()
        };
        let mut trainer = MineTrainer::new(2, 2, &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..4 {
            let batch = sample_joint_and_marginal(&data, 16, &mut rng).unwrap();
            let scores = trainer.model.score_batch(&batch).unwrap();
            let expected = log_mean_exp(&scores.o_marginal).exp();
            let out = trainer.step(&batch).unwrap();
            assert!((out.ema - expected).abs() < 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn loss_gradients_match_finite_differences() {
        let config = MineConfig {
            map_dim: 3,
            stats_hidden: vec![6],
            seed: 17,
            ..MineConfig::default()
        };
        let model = MineModel::new(4, 2, &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let batch = MineBatch {
            joint_reps: Array2::from_shape_fn((6, 4), |_| rng.gen_range(-1.0..1.0)),
            joint_attrs: vec![0, 1, 0, 1, 1, 0],
            marginal_reps: Array2::from_shape_fn((6, 4), |_| rng.gen_range(-1.0..1.0)),
        };
        let log_ema = 0.3f64;

        let scores = model.score_batch(&batch).unwrap();
        let grads = model.loss_grads(&scores, log_ema).unwrap();

        let h = 1e-5;
        let check = |analytic: &[f64], set: &dyn Fn(&mut MineModel, &[f64]), base: Vec<f64>| {
            for idx in 0..base.len() {
                let mut probe = model.clone();
                let mut p = base.clone();
                p[idx] = base[idx] + h;
                set(&mut probe, &p);
                let up = probe.loss_given_log_ema(&batch, log_ema).unwrap();
                p[idx] = base[idx] - h;
                set(&mut probe, &p);
                let down = probe.loss_given_log_ema(&batch, log_ema).unwrap();
                let numeric = (up - down) / (2.0 * h);
                let a = analytic[idx];
                let denom = a.abs().max(numeric.abs()).max(1e-8);
                assert!(
                    (a - numeric).abs() / denom <= 1e-4,
                    "param {idx}: analytic {a} vs numeric {numeric}"
                );
            }
        };

        check(
            &grads.stats.flat(),
            &|m, p| m.stats_net.set_params_flat(p).unwrap(),
            model.stats_net.params_flat(),
        );
        check(
            &grads.map_r.as_ref().unwrap().flat(),
            &|m, p| m.map_r.as_mut().unwrap().set_params_flat(p).unwrap(),
            model.map_r().unwrap().params_flat(),
        );
        check(
            &grads.map_z.as_ref().unwrap().flat(),
            &|m, p| m.map_z.as_mut().unwrap().set_params_flat(p).unwrap(),
            model.map_z().unwrap().params_flat(),
        );
    }

    #[test]
    fn estimate_recovers_strong_dependence() {
        let data = tiny_dataset(1000, 7);
        let config = MineConfig {
            batch_size: 128,
            map_dim: 8,
            stats_hidden: vec![32, 32],
            max_iters: 1500,
            convergence_window: 100,
            seed: 1,
            ..MineConfig::default()
        };
        let est = estimate_mi(&data, &config).unwrap();
        // True MI is ln 2 ≈ 0.6931; the bound approaches it from below.
        assert!(est.mi > 0.55, "mi = {}", est.mi);
        assert!(est.mi < 0.72, "mi = {}", est.mi);
    }

    #[test]
    fn estimate_is_deterministic() {
        let data = tiny_dataset(256, 11);
        let config = MineConfig {
            batch_size: 64,
            map_dim: 4,
            stats_hidden: vec![16],
            max_iters: 300,
            convergence_window: 50,
            seed: 3,
            ..MineConfig::default()
        };
        let a = estimate_mi(&data, &config).unwrap();
        let b = estimate_mi(&data, &config).unwrap();
        assert_eq!(a.mi.to_bits(), b.mi.to_bits());
        assert_eq!(a.trace.mi_estimates, b.trace.mi_estimates);
    }

    #[test]
    fn estimate_rejects_constant_attribute() {
        let reps = Array2::from_shape_fn((16, 2), |(i, j)| (i + j) as f64);
        let data = RepresentationSet::new(reps, vec![0; 16], vec!["only".into()]).unwrap();
        let config = MineConfig {
            batch_size: 8,
            max_iters: 10,
            convergence_window: 2,
            ..MineConfig::default()
        };
        assert!(matches!(
            estimate_mi(&data, &config),
            Err(Error::DegenerateAttribute(_))
        ));
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let bad = |f: fn(&mut MineConfig), n: usize| {
            let mut c = MineConfig::default();
            f(&mut c);
            c.validate(n).is_err()
        };
        assert!(bad(|c| c.batch_size = 0, 100));
        assert!(bad(|c| c.batch_size = 101, 100));
        assert!(bad(|c| c.ema_alpha = 0.0, 1000));
        assert!(bad(|c| c.convergence_window = c.max_iters, 1000));
        assert!(bad(|c| c.eval_fraction = 1.0, 1000));
        // a split of 3 samples cannot give both partitions 2 rows
        assert!(bad(|c| c.batch_size = 1, 3));
    }
}
