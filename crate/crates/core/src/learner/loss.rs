use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::mlp::{softmax, Gradients, MlpModel};

/// Probabilities are floored here inside the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Class-balanced log loss weighting each sample by `1 / f_y`.
    #[default]
    Asymmetric,
    /// Plain mean log loss.
    Symmetric,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymmetric" => Ok(LossKind::Asymmetric),
            "symmetric" => Ok(LossKind::Symmetric),
            other => Err(Error::invalid(format!("unknown loss '{other}'"))),
        }
    }
}

/// Whether class frequencies count pixels or superpixels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyBasis {
    #[default]
    Pixels,
    Superpixels,
}

impl FromStr for FrequencyBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pixels" => Ok(FrequencyBasis::Pixels),
            "superpixels" => Ok(FrequencyBasis::Superpixels),
            other => Err(Error::invalid(format!("unknown frequency basis '{other}'"))),
        }
    }
}

/// Normalized class frequencies, summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassFrequencies(Vec<f64>);

impl ClassFrequencies {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        let sum: f64 = freqs.iter().sum();
        if freqs.is_empty() || freqs.iter().any(|f| !(*f >= 0.0)) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::invalid("class frequencies must be nonnegative and sum to 1"));
        }
        Ok(Self(freqs))
    }

    pub fn uniform(num_classes: usize) -> Self {
        Self(vec![1.0 / num_classes as f64; num_classes])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    fn weight(&self, label: usize) -> Result<f64> {
        match self.0.get(label) {
            Some(&f) if f > 0.0 => Ok(1.0 / f),
            Some(_) => Err(Error::invalid(format!("class {label} has zero training frequency"))),
            None => Err(Error::invalid(format!("label {label} outside {} classes", self.0.len()))),
        }
    }
}

/// Frequencies of `labels` weighted by `weights` (pixel counts for the pixel
/// basis, ones for the superpixel basis). Labels equal to `ignore` are skipped.
pub fn compute_class_frequencies(
    labels: &[u16],
    weights: &[f64],
    num_classes: usize,
    ignore: Option<u16>,
) -> Result<ClassFrequencies> {
    if labels.len() != weights.len() {
        return Err(Error::shape("labels and weights differ in length"));
    }
    let mut counts = vec![0.0f64; num_classes];
    for (&l, &w) in labels.iter().zip(weights) {
        if Some(l) == ignore {
            continue;
        }
        *counts
            .get_mut(l as usize)
            .ok_or_else(|| Error::invalid(format!("label {l} outside {num_classes} classes")))? += w;
    }
    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("no labeled training samples"));
    }
    Ok(ClassFrequencies(counts.into_iter().map(|c| c / total).collect()))
}

/// Per-sample loss weights: `1 / (N f_y)` for the asymmetric loss, `1 / N` otherwise.
pub fn sample_weights(labels: &[usize], freqs: Option<&ClassFrequencies>) -> Result<Vec<f64>> {
    let n = labels.len() as f64;
    labels
        .iter()
        .map(|&y| match freqs {
            Some(f) => Ok(f.weight(y)? / n),
            None => Ok(1.0 / n),
        })
        .collect()
}

fn weighted_log_loss(probs: &[Vec<f64>], labels: &[usize], weights: &[f64]) -> Result<f64> {
    if probs.len() != labels.len() || probs.is_empty() {
        return Err(Error::shape("probabilities and labels must be nonempty and equal in length"));
    }
    let mut total = 0.0;
    for ((p, &y), w) in probs.iter().zip(labels).zip(weights) {
        let py = *p.get(y).ok_or_else(|| Error::invalid(format!("label {y} outside {} classes", p.len())))?;
        total -= w * py.max(PROB_FLOOR).ln();
    }
    Ok(total)
}

/// `-(1/N) sum_i log p_i[y_i] / f[y_i]`.
pub fn asymmetric_loss(probs: &[Vec<f64>], labels: &[usize], freqs: &ClassFrequencies) -> Result<f64> {
    weighted_log_loss(probs, labels, &sample_weights(labels, Some(freqs))?)
}

/// `-(1/N) sum_i log p_i[y_i]`.
pub fn symmetric_loss(probs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    weighted_log_loss(probs, labels, &sample_weights(labels, None)?)
}

/// Loss of `model` on a batch and its gradient with respect to every
/// parameter. `freqs = None` selects the symmetric loss.
pub fn loss_gradient(
    model: &MlpModel,
    batch: &[Vec<f32>],
    labels: &[usize],
    freqs: Option<&ClassFrequencies>,
) -> Result<(f64, Gradients)> {
    weighted_loss_gradient::<rand::rngs::mock::StepRng>(model, batch, labels, &sample_weights(labels, freqs)?, None)
}

pub(crate) fn weighted_loss_gradient<R: rand::Rng>(
    model: &MlpModel,
    batch: &[Vec<f32>],
    labels: &[usize],
    weights: &[f64],
    mut dropout: Option<(&mut R, f64)>,
) -> Result<(f64, Gradients)> {
    if batch.len() != labels.len() || batch.is_empty() {
        return Err(Error::shape("batch and labels must be nonempty and equal in length"));
    }
    let c = model.num_classes();
    let mut grads = Gradients::zeros_like(model);
    let mut loss = 0.0;
    for ((x, &y), &w) in batch.iter().zip(labels).zip(weights) {
        if y >= c {
            return Err(Error::invalid(format!("label {y} outside {c} classes")));
        }
        let trace = model.forward_trace(x, dropout.as_mut().map(|(r, p)| (&mut **r, *p)))?;
        let p = softmax(trace.logits());
        loss -= w * p[y].max(PROB_FLOOR).ln();
        let mut d: Vec<f64> = p.iter().map(|&v| w * v).collect();
        d[y] -= w;
        model.backward(&trace, &d, &mut grads);
    }
    Ok((loss, grads))
}
