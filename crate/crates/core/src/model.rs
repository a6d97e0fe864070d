//! The full network: `(conv → batchnorm → ReLU) × l → global average pool →
//! dense → softmax`, trained with Adam on cross-entropy plus an elastic-net
//! penalty on the conv and dense weights.

use std::time::Instant;

use rand::distr::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{LabelMap, LabeledDataset};
use crate::error::{Error, Result};
use crate::layers::{self, BatchNormParams, BatchStats, BnCache, ConvParams, DenseParams, Mode};
use crate::optimizer::{AdamConfig, AdamState};
use crate::regularization::{add_elastic_grad, l1_penalty, l2_penalty, PenaltyConfig};
use crate::tensor::Tensor;

pub const DEFAULT_LR: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub epochs: usize,
    pub num_layers: usize,
    pub kernel_sizes: Vec<usize>,
    pub filters: Vec<usize>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub bn_eps: f64,
    pub bn_momentum: f64,
    pub seed: u64,
    pub batch_cap: usize,
    pub batch_divisor: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        let adam = AdamConfig::default();
        let penalty = PenaltyConfig::default();
        Hyperparameters {
            // Slower than the usual Adam default: at 1e-3 the weights move too
            // fast for the running BN statistics to track on small batches.
            epochs: 1000,
            num_layers: 5,
            kernel_sizes: vec![32, 16, 8, 4, 2],
            filters: vec![32; 5],
            alpha1: penalty.alpha1,
            alpha2: penalty.alpha2,
            lr: DEFAULT_LR,
            beta1: adam.beta1,
            beta2: adam.beta2,
            eps_adam: adam.eps,
            bn_eps: layers::batchnorm::DEFAULT_EPS,
            bn_momentum: layers::batchnorm::DEFAULT_MOMENTUM,
            seed: 0,
            batch_cap: 16,
            batch_divisor: 10,
        }
    }
}

impl Hyperparameters {
    pub fn penalty(&self) -> PenaltyConfig {
        PenaltyConfig {
            alpha1: self.alpha1,
            alpha2: self.alpha2,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps_adam,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers == 0 {
            return Err(Error::Config("num_layers must be positive".into()));
        }
        if self.kernel_sizes.len() != self.num_layers || self.filters.len() != self.num_layers {
            return Err(Error::Config(format!(
                "num_layers = {} but {} kernel sizes and {} filter counts given",
                self.num_layers,
                self.kernel_sizes.len(),
                self.filters.len()
            )));
        }
        if self.kernel_sizes.iter().chain(&self.filters).any(|&v| v == 0) {
            return Err(Error::Config("kernel sizes and filter counts must be positive".into()));
        }
        if self.epochs == 0 || self.batch_cap == 0 || self.batch_divisor == 0 {
            return Err(Error::Config(
                "epochs, batch_cap and batch_divisor must be positive".into(),
            ));
        }
        self.penalty().validate()?;
        self.adam().validate()?;
        BatchNormParams::new(1, self.bn_eps, self.bn_momentum)?;
        Ok(())
    }
}

/// `max(1, min(round(n / divisor), cap))`, rounding halves up.
pub fn compute_batch_size(n_train: usize, hp: &Hyperparameters) -> usize {
    let d = hp.batch_divisor.max(1);
    let rounded = (2 * n_train + d) / (2 * d);
    rounded.min(hp.batch_cap).max(1).min(n_train.max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvBlock {
    pub conv: ConvParams,
    pub bn: BatchNormParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrdcnnModel {
    pub blocks: Vec<ConvBlock>,
    pub dense: DenseParams,
    pub label_map: LabelMap,
    /// Series length the model was built for.
    pub series_length: usize,
    pub hyperparameters: Hyperparameters,
}

fn glorot(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new(-limit, limit).expect("finite positive limit");
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| dist.sample(rng)).collect();
    Tensor::new(shape.to_vec(), data).expect("shape matches sample count")
}

/// Builds a freshly initialized network for classes `0..num_classes`.
pub fn build_model(
    num_classes: usize,
    series_length: usize,
    hp: &Hyperparameters,
    seed: u64,
) -> Result<SrdcnnModel> {
    let map = LabelMap::from_sorted((0..num_classes as i64).collect())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SrdcnnModel::build(map, series_length, hp, &mut rng)
}

/// Everything the backward pass needs from a training forward pass.
pub struct ForwardCache {
    blocks: Vec<BlockCache>,
    pooled: Tensor,
    time_len: usize,
}

struct BlockCache {
    conv_in: Tensor,
    bn: BnCache,
    relu_in: Tensor,
}

impl ForwardCache {
    /// Batch statistics per block, `None` where running statistics were used.
    pub fn batch_stats(&self) -> Vec<Option<BatchStats>> {
        self.blocks.iter().map(|b| b.bn.batch_stats().cloned()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct LossAndGrads {
    /// Cross-entropy batch mean `J`.
    pub data_loss: f64,
    /// `α₁·‖ω‖₁` over the regularized blocks.
    pub l1_term: f64,
    /// `α₂·ωᵀω/2` over the regularized blocks.
    pub l2_term: f64,
    /// Gradients of `J + l1_term + l2_term`, in [`SrdcnnModel::params`] order.
    pub grads: Vec<Tensor>,
    pub probs: Tensor,
    pub batch_stats: Vec<Option<BatchStats>>,
}

impl LossAndGrads {
    pub fn cost(&self) -> f64 {
        self.data_loss + self.l1_term + self.l2_term
    }
}

impl SrdcnnModel {
    pub fn build(
        label_map: LabelMap,
        series_length: usize,
        hp: &Hyperparameters,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        hp.validate()?;
        let classes = label_map.len();
        if classes < 2 {
            return Err(Error::Config(format!(
                "need at least 2 classes, got {classes}"
            )));
        }
        if series_length == 0 {
            return Err(Error::Config("series length must be positive".into()));
        }
        let mut blocks = Vec::with_capacity(hp.num_layers);
        let mut cin = 1;
        for (&k, &cout) in hp.kernel_sizes.iter().zip(&hp.filters) {
            let weights = glorot(&[cout, cin, k], cin * k, cout * k, rng);
            blocks.push(ConvBlock {
                conv: ConvParams::new(weights, Tensor::zeros(&[cout]))?,
                bn: BatchNormParams::new(cout, hp.bn_eps, hp.bn_momentum)?,
            });
            cin = cout;
        }
        let dense = DenseParams::new(
            glorot(&[cin, classes], cin, classes, rng),
            Tensor::zeros(&[classes]),
        )?;
        Ok(SrdcnnModel {
            blocks,
            dense,
            label_map,
            series_length,
            hyperparameters: hp.clone(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.dense.classes()
    }

    /// Trainable blocks: per conv block weight, bias, gamma, beta; then the
    /// dense weight and bias.
    pub fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::with_capacity(4 * self.blocks.len() + 2);
        for b in &self.blocks {
            out.extend([&b.conv.weights, &b.conv.bias, &b.bn.gamma, &b.bn.beta]);
        }
        out.extend([&self.dense.weights, &self.dense.bias]);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::with_capacity(4 * self.blocks.len() + 2);
        for b in &mut self.blocks {
            out.push(&mut b.conv.weights);
            out.push(&mut b.conv.bias);
            out.push(&mut b.bn.gamma);
            out.push(&mut b.bn.beta);
        }
        out.push(&mut self.dense.weights);
        out.push(&mut self.dense.bias);
        out
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.blocks.len() {
            for part in ["conv.weight", "conv.bias", "bn.gamma", "bn.beta"] {
                out.push(format!("block{i}.{part}"));
            }
        }
        out.push("dense.weight".into());
        out.push("dense.bias".into());
        out
    }

    /// Which entries of [`Self::params`] carry the elastic-net penalty: conv
    /// and dense weights only.
    pub fn regularized_mask(&self) -> Vec<bool> {
        let mut out = Vec::new();
        for _ in &self.blocks {
            out.extend([true, false, false, false]);
        }
        out.extend([true, false]);
        out
    }

    pub fn num_trainable(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// `(α₁·‖ω‖₁, α₂·ωᵀω/2)` over the regularized blocks.
    pub fn penalty_terms(&self, cfg: &PenaltyConfig) -> (f64, f64) {
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        for (p, reg) in self.params().into_iter().zip(self.regularized_mask()) {
            if reg {
                l1 += l1_penalty(p.data());
                l2 += l2_penalty(p.data());
            }
        }
        (cfg.alpha1 * l1, cfg.alpha2 * l2)
    }

    /// Fraction of regularized weights with magnitude below `threshold`.
    pub fn small_weight_fraction(&self, threshold: f64) -> f64 {
        let (mut small, mut total) = (0usize, 0usize);
        for (p, reg) in self.params().into_iter().zip(self.regularized_mask()) {
            if reg {
                small += p.data().iter().filter(|v| v.abs() < threshold).count();
                total += p.len();
            }
        }
        small as f64 / total as f64
    }

    /// Runs the stack on `batch[B×1×T]`. In train mode batch statistics over
    /// (batch, time) drive batch normalization; only a single value per
    /// channel (`B·T = 1`) falls back to running statistics. Running
    /// statistics are never modified here; see [`ForwardCache::batch_stats`].
    pub fn forward(&self, batch: &Tensor, mode: Mode) -> Result<(Tensor, ForwardCache)> {
        let (b, c, t) = batch.dims3("model input")?;
        if c != 1 {
            return Err(Error::dim(format!(
                "model expects a single input channel, got {c}"
            )));
        }
        let mut caches = Vec::with_capacity(self.blocks.len());
        let mut h = batch.clone();
        for block in &self.blocks {
            let z = layers::conv1d_forward(&h, &block.conv)?;
            let (y, bn) = match mode {
                Mode::Train if b * t > 1 => layers::batchnorm_normalize(&z, &block.bn, Mode::Train)?,
                Mode::Train => layers::batchnorm_forward_frozen(&z, &block.bn)?,
                Mode::Eval => layers::batchnorm_normalize(&z, &block.bn, Mode::Eval)?,
            };
            let a = layers::relu_forward(&y);
            if mode == Mode::Train {
                caches.push(BlockCache {
                    conv_in: h,
                    bn,
                    relu_in: y,
                });
            }
            h = a;
        }
        let pooled = layers::gap_forward(&h)?;
        let logits = layers::dense_forward(&pooled, &self.dense)?;
        let cache = ForwardCache {
            blocks: caches,
            pooled: if mode == Mode::Train {
                pooled
            } else {
                Tensor::zeros(&[1])
            },
            time_len: t,
        };
        Ok((logits, cache))
    }

    /// Gradients of the data loss w.r.t. every trainable block, given
    /// `∂J/∂logits`.
    pub fn backward(&self, cache: &ForwardCache, grad_logits: &Tensor) -> Result<Vec<Tensor>> {
        if cache.blocks.len() != self.blocks.len() {
            return Err(Error::Usage(
                "backward needs the cache of a train-mode forward pass".into(),
            ));
        }
        let dense = layers::dense_backward(&cache.pooled, &self.dense, grad_logits)?;
        let mut g = layers::gap_backward(cache.time_len, &dense.x)?;
        let mut per_block = Vec::with_capacity(self.blocks.len());
        for (block, bc) in self.blocks.iter().zip(&cache.blocks).rev() {
            let g_relu = layers::relu_backward(&bc.relu_in, &g)?;
            let bn = layers::batchnorm_backward(&bc.bn, &block.bn, &g_relu)?;
            let conv = layers::conv1d_backward(&bc.conv_in, &block.conv, &bn.x)?;
            g = conv.x;
            per_block.push([conv.weights, conv.bias, bn.gamma, bn.beta]);
        }
        per_block.reverse();
        let mut grads: Vec<Tensor> = per_block.into_iter().flatten().collect();
        grads.push(dense.weights);
        grads.push(dense.bias);
        Ok(grads)
    }

    /// Regularized cost and its gradient for one mini-batch. `labels` are
    /// class indices under this model's label map.
    pub fn loss_and_grads(
        &self,
        batch: &Tensor,
        labels: &[usize],
        cfg: &PenaltyConfig,
    ) -> Result<LossAndGrads> {
        let (_, _, t) = batch.dims3("model input")?;
        if t != self.series_length {
            return Err(Error::dim(format!(
                "training batch has length {t}, model was built for {}",
                self.series_length
            )));
        }
        let (logits, cache) = self.forward(batch, Mode::Train)?;
        let xent = layers::softmax_xent(&logits, labels)?;
        let mut grads = self.backward(&cache, &xent.grad_logits)?;
        for ((g, p), reg) in grads
            .iter_mut()
            .zip(self.params())
            .zip(self.regularized_mask())
        {
            if reg {
                add_elastic_grad(p.data(), g.data_mut(), cfg);
            }
        }
        let (l1_term, l2_term) = self.penalty_terms(cfg);
        Ok(LossAndGrads {
            data_loss: xent.loss,
            l1_term,
            l2_term,
            grads,
            probs: xent.probs,
            batch_stats: cache.batch_stats(),
        })
    }

    pub fn absorb_batch_stats(&mut self, stats: &[Option<BatchStats>]) {
        for (block, s) in self.blocks.iter_mut().zip(stats) {
            if let Some(s) = s {
                block.bn.update_running(s);
            }
        }
    }

    /// Eval-mode logits for a `[B×1×T]` batch; any `T ≥ 1` is accepted.
    pub fn logits(&self, batch: &Tensor) -> Result<Tensor> {
        Ok(self.forward(batch, Mode::Eval)?.0)
    }

    pub fn predict_index(&self, series: &[f64]) -> Result<usize> {
        if series.is_empty() {
            return Err(Error::Data("cannot classify an empty series".into()));
        }
        let x = Tensor::new(vec![1, 1, series.len()], series.to_vec())?;
        Ok(argmax(self.logits(&x)?.data()))
    }

    /// Predicted original label.
    pub fn predict(&self, series: &[f64]) -> Result<i64> {
        let idx = self.predict_index(series)?;
        Ok(self.label_map.label_of(idx).expect("index within label map"))
    }

    /// Predicted original labels for every instance, evaluated in chunks.
    pub fn predict_all(&self, data: &LabeledDataset) -> Result<Vec<i64>> {
        const CHUNK: usize = 128;
        let c = self.num_classes();
        let rows: Vec<usize> = (0..data.len()).collect();
        let mut out = Vec::with_capacity(data.len());
        for chunk in rows.chunks(CHUNK) {
            let logits = self.logits(&data.batch(chunk))?;
            for row in logits.data().chunks_exact(c) {
                out.push(self.label_map.label_of(argmax(row)).expect("valid index"));
            }
        }
        Ok(out)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Test-set accuracy in `[0, 1]`. Test labels the model never saw simply
/// count as misclassified.
pub fn evaluate(model: &SrdcnnModel, test: &LabeledDataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Data("empty test set".into()));
    }
    let predicted = model.predict_all(test)?;
    let correct = predicted
        .iter()
        .zip(test.labels())
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / test.len() as f64)
}

/// One row of the training history, averaged over the epoch's instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub data_loss: f64,
    pub l1_term: f64,
    pub l2_term: f64,
    pub regularized_cost: f64,
    /// Accuracy of the train-mode forward passes made during the epoch.
    pub train_accuracy: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingHistory {
    pub records: Vec<EpochRecord>,
}

/// Trains with default reporting; see [`train_with`].
pub fn train(dataset: &LabeledDataset, hp: &Hyperparameters) -> Result<(SrdcnnModel, TrainingHistory)> {
    train_with(dataset, hp, |_, _| Ok(()))
}

/// Mini-batch Adam training. `on_epoch` sees every record, and the model as
/// it stands, as soon as the epoch finishes; an error from it aborts training.
pub fn train_with(
    dataset: &LabeledDataset,
    hp: &Hyperparameters,
    mut on_epoch: impl FnMut(&EpochRecord, &SrdcnnModel) -> Result<()>,
) -> Result<(SrdcnnModel, TrainingHistory)> {
    if dataset.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    if dataset.num_classes() < 2 {
        return Err(Error::Config(format!(
            "training needs at least 2 classes, found {}",
            dataset.num_classes()
        )));
    }
    hp.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut model = SrdcnnModel::build(
        dataset.label_map().clone(),
        dataset.series_length(),
        hp,
        &mut rng,
    )?;
    let mut adam = AdamState::new(hp.adam(), model.params());
    let penalty = hp.penalty();
    let labels = dataset.class_indices();
    let batch_size = compute_batch_size(dataset.len(), hp);
    let n = dataset.len() as f64;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = TrainingHistory::default();

    for epoch in 1..=hp.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let (mut j, mut l1, mut l2) = (0.0, 0.0, 0.0);
        let mut correct = 0usize;
        for rows in order.chunks(batch_size) {
            let batch = dataset.batch(rows);
            let batch_labels: Vec<usize> = rows.iter().map(|&r| labels[r]).collect();
            let out = model.loss_and_grads(&batch, &batch_labels, &penalty)?;
            if !out.data_loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss at epoch {epoch}"
                )));
            }
            let w = rows.len() as f64;
            j += w * out.data_loss;
            l1 += w * out.l1_term;
            l2 += w * out.l2_term;
            let c = model.num_classes();
            correct += out
                .probs
                .data()
                .chunks_exact(c)
                .zip(&batch_labels)
                .filter(|(p, &l)| argmax(p) == l)
                .count();

            model.absorb_batch_stats(&out.batch_stats);
            adam.step(&mut model.params_mut(), &out.grads)?;
        }
        let (j, l1, l2) = (j / n, l1 / n, l2 / n);
        let record = EpochRecord {
            epoch,
            data_loss: j,
            l1_term: l1,
            l2_term: l2,
            regularized_cost: j + l1 + l2,
            train_accuracy: correct as f64 / n,
            seconds: start.elapsed().as_secs_f64(),
        };
        on_epoch(&record, &model)?;
        history.records.push(record);
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_size_formula() {
        let hp = Hyperparameters::default();
        assert_eq!(compute_batch_size(467, &hp), 16);
        assert_eq!(compute_batch_size(67, &hp), 7);
        assert_eq!(compute_batch_size(5, &hp), 1);
        assert_eq!(compute_batch_size(1, &hp), 1);
        assert_eq!(compute_batch_size(28, &hp), 3);
        assert_eq!(compute_batch_size(15, &hp), 2);
    }

    #[test]
    fn default_architecture_parameter_count() {
        let hp = Hyperparameters::default();
        let m = build_model(2, 24, &hp, 0).unwrap();
        let conv: usize = 32 * 32 + 32 + [16, 8, 4, 2].iter().map(|k| 32 * 32 * k + 32).sum::<usize>();
        let bn = 5 * (32 + 32);
        let dense = 32 * 2 + 2;
        assert_eq!(m.num_trainable(), conv + bn + dense);
        assert_eq!(m.num_trainable(), 32290);
        let ks: Vec<usize> = m.blocks.iter().map(|b| b.conv.kernel_size()).collect();
        assert_eq!(ks, vec![32, 16, 8, 4, 2]);
        assert_eq!(m.blocks[0].conv.in_channels(), 1);
        assert!(m.blocks[1..].iter().all(|b| b.conv.in_channels() == 32));
    }

    #[test]
    fn glorot_bounds_and_zero_biases() {
        let m = build_model(3, 10, &Hyperparameters::default(), 7).unwrap();
        let limit = (6.0f64 / (32.0 * 16.0 + 32.0 * 16.0)).sqrt();
        assert!(m.blocks[1].conv.weights.data().iter().all(|w| w.abs() <= limit));
        assert!(m.blocks.iter().all(|b| b.conv.bias.data().iter().all(|&v| v == 0.0)));
        assert!(m.dense.bias.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn seeded_build_is_reproducible() {
        let hp = Hyperparameters::default();
        assert_eq!(build_model(2, 24, &hp, 3).unwrap(), build_model(2, 24, &hp, 3).unwrap());
        assert_ne!(build_model(2, 24, &hp, 3).unwrap(), build_model(2, 24, &hp, 4).unwrap());
    }

    #[test]
    fn rejects_single_class() {
        let err = build_model(1, 24, &Hyperparameters::default(), 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn inconsistent_layer_lists_rejected() {
        let hp = Hyperparameters {
            kernel_sizes: vec![3, 2],
            ..Hyperparameters::default()
        };
        assert!(matches!(hp.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn zero_input_gives_zero_logits() {
        let m = build_model(2, 24, &Hyperparameters::default(), 0).unwrap();
        let logits = m.logits(&Tensor::zeros(&[3, 1, 24])).unwrap();
        assert!(logits.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_series_still_classify() {
        let m = build_model(2, 24, &Hyperparameters::default(), 0).unwrap();
        for t in [1, 2, 5, 40] {
            let logits = m.logits(&Tensor::full(&[2, 1, t], 0.3)).unwrap();
            assert_eq!(logits.shape(), &[2, 2]);
        }
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(&[0.2, 0.9]), 1);
        assert_eq!(argmax(&[0.5, 0.5, 0.1]), 0);
    }

    #[test]
    fn no_penalty_means_cost_equals_loss() {
        let hp = Hyperparameters {
            kernel_sizes: vec![3, 2],
            filters: vec![2, 2],
            num_layers: 2,
            ..Hyperparameters::default()
        };
        let m = build_model(2, 8, &hp, 1).unwrap();
        let x = Tensor::new(vec![2, 1, 8], (0..16).map(|v| (v as f64 * 0.7).sin()).collect()).unwrap();
        let out = m.loss_and_grads(&x, &[0, 1], &PenaltyConfig::none()).unwrap();
        assert_eq!(out.cost(), out.data_loss);
    }

    #[test]
    fn wrong_training_length_rejected() {
        let m = build_model(2, 8, &Hyperparameters::default(), 1).unwrap();
        let err = m
            .loss_and_grads(&Tensor::zeros(&[2, 1, 9]), &[0, 1], &PenaltyConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }
}
