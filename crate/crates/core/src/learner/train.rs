use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::loss::{compute_class_frequencies, weighted_loss_gradient, ClassFrequencies, FrequencyBasis, LossKind};
use super::mlp::{argmax, Gradients, MlpModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub dropout: f64,
    pub loss: LossKind,
    pub hidden: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            momentum: 0.9,
            weight_decay: 1e-3,
            epochs: 100,
            batch_size: 100,
            seed: 7,
            dropout: 0.0,
            loss: LossKind::Asymmetric,
            hidden: Vec::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("dropout must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum must lie in [0, 1)"));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::invalid("weight decay must be nonnegative"));
        }
        if self.batch_size == 0 || self.hidden.contains(&0) {
            return Err(Error::invalid("batch size and hidden widths must be positive"));
        }
        Ok(())
    }
}

/// Labeled feature rows. `weights` holds each sample's pixel count and drives
/// the pixel-basis class frequencies.
#[derive(Clone, Debug, Default)]
pub struct Dataset {
    pub features: Vec<Vec<f32>>,
    pub labels: Vec<u16>,
    pub weights: Vec<f64>,
    pub num_classes: usize,
    pub ignore: Option<u16>,
}

impl Dataset {
    /// Unit-weight dataset.
    pub fn new(features: Vec<Vec<f32>>, labels: Vec<u16>, num_classes: usize) -> Self {
        let weights = vec![1.0; labels.len()];
        Self { features, labels, weights, num_classes, ignore: None }
    }

    pub fn frequencies(&self, basis: FrequencyBasis) -> Result<ClassFrequencies> {
        match basis {
            FrequencyBasis::Pixels => {
                compute_class_frequencies(&self.labels, &self.weights, self.num_classes, self.ignore)
            }
            FrequencyBasis::Superpixels => {
                compute_class_frequencies(&self.labels, &vec![1.0; self.labels.len()], self.num_classes, self.ignore)
            }
        }
    }
}

/// Momentum buffers for [`sgd_step`].
#[derive(Clone, Debug)]
pub struct SgdState {
    velocity: Gradients,
}

impl SgdState {
    pub fn new(model: &MlpModel) -> Self {
        Self { velocity: Gradients::zeros_like(model) }
    }
}

/// `v <- mu v - lr (g + lambda w)`, `w <- w + v` on every weight and bias.
pub fn sgd_step(model: &mut MlpModel, grads: &Gradients, state: &mut SgdState, cfg: &TrainConfig) {
    let (lr, mu, decay) = (cfg.learning_rate, cfg.momentum, cfg.weight_decay);
    for (i, layer) in model.layers_mut().iter_mut().enumerate() {
        let params = layer.weights.iter_mut().chain(layer.bias.iter_mut());
        let g = grads.weights[i].iter().chain(&grads.bias[i]);
        let (vw, vb) = (&mut state.velocity.weights[i], &mut state.velocity.bias[i]);
        for ((w, g), v) in params.zip(g).zip(vw.iter_mut().chain(vb.iter_mut())) {
            *v = mu * *v - lr * (g + decay * f64::from(*w));
            *w = (f64::from(*w) + *v) as f32;
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Mean minibatch loss per epoch, each evaluated before its update.
    pub epoch_losses: Vec<f64>,
    pub frequencies: ClassFrequencies,
}

/// Trains an MLP `[D, hidden.., C]` with seeded init, shuffling and dropout.
pub fn train(data: &Dataset, cfg: &TrainConfig, basis: FrequencyBasis) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.features.len() != data.labels.len() || data.labels.len() != data.weights.len() {
        return Err(Error::shape("features, labels and weights differ in length"));
    }
    let keep: Vec<usize> = (0..data.labels.len()).filter(|&i| Some(data.labels[i]) != data.ignore).collect();
    if keep.is_empty() {
        return Err(Error::invalid("dataset has no labeled samples"));
    }
    let dim = data.features[keep[0]].len();
    if dim == 0 || keep.iter().any(|&i| data.features[i].len() != dim) {
        return Err(Error::shape("feature rows must share a nonzero dimension"));
    }
    let frequencies = data.frequencies(basis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sizes: Vec<usize> = std::iter::once(dim).chain(cfg.hidden.iter().copied()).chain([data.num_classes]).collect();
    let mut model = MlpModel::new(&sizes, &mut rng)?;
    let rows: Vec<Vec<f32>> = keep.iter().map(|&i| data.features[i].clone()).collect();
    let labels: Vec<usize> = keep.iter().map(|&i| usize::from(data.labels[i])).collect();
    model.fit_normalization(&rows)?;
    let class_weight: Vec<f64> = match cfg.loss {
        LossKind::Asymmetric => frequencies.as_slice().iter().map(|&f| if f > 0.0 { 1.0 / f } else { 0.0 }).collect(),
        LossKind::Symmetric => vec![1.0; data.num_classes],
    };
    let mut state = SgdState::new(&model);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let dropout = (cfg.dropout > 0.0).then_some(cfg.dropout);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut batches) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<Vec<f32>> = chunk.iter().map(|&i| rows[i].clone()).collect();
            let y: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let n = chunk.len() as f64;
            let w: Vec<f64> = y.iter().map(|&c| class_weight[c] / n).collect();
            let (loss, grads) = match dropout {
                Some(p) => weighted_loss_gradient(&model, &batch, &y, &w, Some((&mut rng, p)))?,
                None => weighted_loss_gradient::<ChaCha8Rng>(&model, &batch, &y, &w, None)?,
            };
            sgd_step(&mut model, &grads, &mut state, cfg);
            total += loss;
            batches += 1;
        }
        epoch_losses.push(total / batches as f64);
        log::debug!("epoch {} loss {:.6}", epoch_losses.len(), total / batches as f64);
    }
    Ok(TrainOutcome { model, epoch_losses, frequencies })
}

/// Argmax class of every row; ties go to the smallest class.
pub fn predict_labels(model: &MlpModel, features: &[Vec<f32>]) -> Result<Vec<u16>> {
    features.iter().map(|x| Ok(argmax(&model.logits(x)?) as u16)).collect()
}

/// Class probabilities of every row.
pub fn predict_probabilities(model: &MlpModel, features: &[Vec<f32>]) -> Result<Vec<Vec<f64>>> {
    features.iter().map(|x| model.forward(x)).collect()
}
