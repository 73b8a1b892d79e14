use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::FeatureMap;
use crate::learner::{sgd_step, Gradients, MlpModel, SgdState, TrainConfig};

use super::scores::{image_loss_and_grad, LocalizerModel, ScoreField};

/// Per-location MLP emitting `(S, Sbar)`, trained from image-level labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizerConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    /// Images per SGD step.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub seed: u64,
    pub model: LocalizerModel,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64],
            epochs: 30,
            batch_size: 8,
            learning_rate: 0.05,
            momentum: 0.9,
            weight_decay: 1e-4,
            seed: 7,
            model: LocalizerModel::Global,
        }
    }
}

fn location_rows(field: &FeatureMap) -> Vec<Vec<f32>> {
    (0..field.height()).flat_map(|y| (0..field.width()).map(move |x| field.vector(y, x))).collect()
}

fn field_from_rows(model: &MlpModel, rows: &[Vec<f32>], h: usize, w: usize) -> Result<ScoreField> {
    let mut fg = Vec::with_capacity(rows.len());
    let mut bg = Vec::with_capacity(rows.len());
    for r in rows {
        let z = model.logits(r)?;
        fg.push(z[0]);
        bg.push(z[1]);
    }
    ScoreField::new(h, w, fg, bg)
}

/// Scores every location of a dense feature field.
pub fn localization_scores(model: &MlpModel, field: &FeatureMap) -> Result<ScoreField> {
    if model.num_classes() != 2 {
        return Err(Error::invalid("localizer must have two outputs"));
    }
    field_from_rows(model, &location_rows(field), field.height(), field.width())
}

#[derive(Clone, Debug)]
pub struct LocalizerOutcome {
    pub model: MlpModel,
    /// Mean image loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Trains a localizer for one class. Every positive image is used together
/// with an equal number of seeded randomly drawn negatives.
pub fn train_localizer(fields: &[FeatureMap], present: &[bool], cfg: &LocalizerConfig) -> Result<LocalizerOutcome> {
    if fields.len() != present.len() {
        return Err(Error::shape("fields and labels differ in length"));
    }
    if cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::invalid("batch size and learning rate must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let positives: Vec<usize> = (0..fields.len()).filter(|&i| present[i]).collect();
    if positives.is_empty() {
        return Err(Error::invalid("localizer needs at least one positive image"));
    }
    let mut negatives: Vec<usize> = (0..fields.len()).filter(|&i| !present[i]).collect();
    negatives.shuffle(&mut rng);
    negatives.truncate(positives.len());
    let mut chosen: Vec<usize> = positives.into_iter().chain(negatives).collect();
    chosen.sort_unstable();

    let rows: Vec<Vec<Vec<f32>>> = chosen.iter().map(|&i| location_rows(&fields[i])).collect();
    let dim = rows[0][0].len();
    let sizes: Vec<usize> = std::iter::once(dim).chain(cfg.hidden.iter().copied()).chain([2]).collect();
    let mut model = MlpModel::new(&sizes, &mut rng)?;
    let all: Vec<Vec<f32>> = rows.iter().flatten().cloned().collect();
    model.fit_normalization(&all)?;

    let sgd = TrainConfig {
        learning_rate: cfg.learning_rate,
        momentum: cfg.momentum,
        weight_decay: cfg.weight_decay,
        ..TrainConfig::default()
    };
    let mut state = SgdState::new(&model);
    let mut order: Vec<usize> = (0..chosen.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = Gradients::zeros_like(&model);
            let scale = 1.0 / batch.len() as f64;
            for &b in batch {
                let f = &fields[chosen[b]];
                let traces =
                    rows[b].iter().map(|r| model.forward_trace::<ChaCha8Rng>(r, None)).collect::<Result<Vec<_>>>()?;
                let fg = traces.iter().map(|t| t.logits()[0]).collect();
                let bg = traces.iter().map(|t| t.logits()[1]).collect();
                let field = ScoreField::new(f.height(), f.width(), fg, bg)?;
                let g = image_loss_and_grad(&field, present[chosen[b]], cfg.model);
                total += g.loss;
                for i in g.support() {
                    model.backward(&traces[i], &[g.d_fg[i] * scale, g.d_bg[i] * scale], &mut grads);
                }
            }
            sgd_step(&mut model, &grads, &mut state, &sgd);
        }
        epoch_losses.push(total / chosen.len() as f64);
    }
    Ok(LocalizerOutcome { model, epoch_losses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weaksup::scores::image_prob;

    /// 4x4 fields of one channel; positives carry a bright cell at a varying spot.
    fn toy() -> (Vec<FeatureMap>, Vec<bool>) {
        let mut fields = Vec::new();
        let mut present = Vec::new();
        for i in 0..16 {
            let mut data = vec![0.0f32; 16];
            let pos = i % 2 == 0;
            if pos {
                data[(i * 5) % 16] = 3.0;
            }
            fields.push(FeatureMap::new(1, 4, 4, data).unwrap());
            present.push(pos);
        }
        (fields, present)
    }

    #[test]
    fn learns_to_fire_on_positives() {
        let (fields, present) = toy();
        let cfg = LocalizerConfig { hidden: vec![8], epochs: 60, batch_size: 4, ..Default::default() };
        let out = train_localizer(&fields, &present, &cfg).unwrap();
        assert!(out.epoch_losses.last().unwrap() < &out.epoch_losses[0]);
        for (f, &p) in fields.iter().zip(&present) {
            let prob = image_prob(&localization_scores(&out.model, f).unwrap(), cfg.model);
            assert_eq!(prob > 0.5, p);
        }
        let again = train_localizer(&fields, &present, &cfg).unwrap();
        assert_eq!(again.model, out.model);
    }

    #[test]
    fn needs_positive_image() {
        let (fields, _) = toy();
        assert!(train_localizer(&fields, &[false; 16], &LocalizerConfig::default()).is_err());
    }
}
