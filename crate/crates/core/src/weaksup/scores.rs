use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Foreground and background localization scores of one class over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreField {
    height: usize,
    width: usize,
    fg: Vec<f64>,
    bg: Vec<f64>,
}

impl ScoreField {
    pub fn new(height: usize, width: usize, fg: Vec<f64>, bg: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || fg.len() != height * width || bg.len() != fg.len() {
            return Err(Error::shape(format!("score field must hold {height}x{width} values per channel")));
        }
        if fg.iter().chain(&bg).any(|v| !v.is_finite()) {
            return Err(Error::invalid("score field contains non-finite values"));
        }
        Ok(Self { height, width, fg, bg })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.fg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fg.is_empty()
    }

    pub fn fg(&self) -> &[f64] {
        &self.fg
    }

    pub fn bg(&self) -> &[f64] {
        &self.bg
    }
}

/// How per-location scores combine into an image-level probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalizerModel {
    /// `max_i sigma(S_i - Sbar_i)`.
    Pixel,
    /// `sigma(max S - max Sbar)`.
    #[default]
    Global,
}

impl FromStr for LocalizerModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pixel" => Ok(LocalizerModel::Pixel),
            "global" => Ok(LocalizerModel::Global),
            other => Err(Error::invalid(format!("unknown localizer model '{other}'"))),
        }
    }
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `1 / (1 + e^-d)` without overflow.
pub fn logistic(d: f64) -> f64 {
    if d >= 0.0 {
        1.0 / (1.0 + (-d).exp())
    } else {
        let e = d.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn pixel_margin(field: &ScoreField) -> (usize, f64) {
    let margins: Vec<f64> = field.fg.iter().zip(&field.bg).map(|(s, b)| s - b).collect();
    let i = argmax_first(&margins);
    (i, margins[i])
}

fn global_margin(field: &ScoreField) -> (usize, usize, f64) {
    let i = argmax_first(&field.fg);
    let j = argmax_first(&field.bg);
    (i, j, field.fg[i] - field.bg[j])
}

/// Per-pixel softmax: the best single-location foreground probability.
pub fn pixel_softmax_prob(field: &ScoreField) -> f64 {
    logistic(pixel_margin(field).1)
}

/// Global softmax over separately max-pooled score maps.
pub fn global_softmax_prob(field: &ScoreField) -> f64 {
    logistic(global_margin(field).2)
}

pub fn image_prob(field: &ScoreField, model: LocalizerModel) -> f64 {
    match model {
        LocalizerModel::Pixel => pixel_softmax_prob(field),
        LocalizerModel::Global => global_softmax_prob(field),
    }
}

/// Image-level log loss and its gradient with respect to both score maps.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldGradient {
    pub loss: f64,
    pub d_fg: Vec<f64>,
    pub d_bg: Vec<f64>,
}

impl FieldGradient {
    /// Locations carrying a nonzero gradient in either map.
    pub fn support(&self) -> Vec<usize> {
        (0..self.d_fg.len()).filter(|&i| self.d_fg[i] != 0.0 || self.d_bg[i] != 0.0).collect()
    }
}

/// Binary log loss of the image-level probability for a class that is
/// `present` or absent. The gradient reaches only the max-pooled locations;
/// ties go to the smallest row-major index.
pub fn image_loss_and_grad(field: &ScoreField, present: bool, model: LocalizerModel) -> FieldGradient {
    let (fg_at, bg_at, margin) = match model {
        LocalizerModel::Pixel => {
            let (i, d) = pixel_margin(field);
            (i, i, d)
        }
        LocalizerModel::Global => global_margin(field),
    };
    let (loss, g) =
        if present { (softplus(-margin), logistic(margin) - 1.0) } else { (softplus(margin), logistic(margin)) };
    let mut d_fg = vec![0.0; field.len()];
    let mut d_bg = vec![0.0; field.len()];
    d_fg[fg_at] = g;
    d_bg[bg_at] = -g;
    FieldGradient { loss, d_fg, d_bg }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(fg: Vec<f64>, bg: Vec<f64>) -> ScoreField {
        let n = fg.len();
        ScoreField::new(1, n, fg, bg).unwrap()
    }

    #[test]
    fn symmetric_scores_give_half() {
        let f = field(vec![0.3, -1.0, 2.0], vec![0.3, -1.0, 2.0]);
        assert!((pixel_softmax_prob(&f) - 0.5).abs() < 1e-12);
        assert!((global_softmax_prob(&f) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ln3_margin() {
        let f = field(vec![3f64.ln(), 0.0], vec![0.0, 0.0]);
        assert!((pixel_softmax_prob(&f) - 0.75).abs() < 1e-12);
        assert!((global_softmax_prob(&f) - 0.75).abs() < 1e-12);
        let single = field(vec![1.7], vec![-0.4]);
        assert_eq!(pixel_softmax_prob(&single), global_softmax_prob(&single));
    }

    #[test]
    fn shift_invariance_and_extremes() {
        let f = field(vec![0.2, 1.5], vec![0.9, -0.3]);
        let g = field(vec![1000.2, 1001.5], vec![1000.9, 999.7]);
        assert!((global_softmax_prob(&f) - global_softmax_prob(&g)).abs() < 1e-9);
        let huge = field(vec![800.0], vec![-800.0]);
        assert_eq!(pixel_softmax_prob(&huge), 1.0);
        assert!(image_loss_and_grad(&huge, false, LocalizerModel::Pixel).loss.is_finite());
    }

    #[test]
    fn confident_present_has_vanishing_loss() {
        let f = field(vec![20.0, 0.0], vec![0.0, 0.0]);
        for model in [LocalizerModel::Pixel, LocalizerModel::Global] {
            let g = image_loss_and_grad(&f, true, model);
            assert!(g.loss < 1e-6);
            assert!(g.d_fg.iter().chain(&g.d_bg).all(|v| v.abs() < 1e-6));
        }
    }

    #[test]
    fn global_support_is_two_cells() {
        let f = field(vec![0.0, 2.0, 1.0, 2.0], vec![3.0, 0.0, 0.0, 0.0]);
        let g = image_loss_and_grad(&f, true, LocalizerModel::Global);
        assert_eq!(g.support(), vec![0, 1]);
        assert!(g.d_fg[1] < 0.0 && g.d_bg[0] > 0.0);
        let same = field(vec![0.0, 5.0], vec![0.0, 5.0]);
        assert_eq!(image_loss_and_grad(&same, false, LocalizerModel::Global).support(), vec![1]);
        let p = image_loss_and_grad(&f, true, LocalizerModel::Pixel);
        // margins -3, 2, 1, 2: first maximum wins
        assert_eq!(p.support(), vec![1]);
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(ScoreField::new(2, 2, vec![0.0; 4], vec![0.0; 3]).is_err());
        assert!(ScoreField::new(1, 1, vec![f64::NAN], vec![0.0]).is_err());
        assert!(ScoreField::new(0, 1, vec![], vec![]).is_err());
    }
}
