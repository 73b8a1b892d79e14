use crate::error::{Error, Result};
use crate::image::{LabelMap, SuperpixelMap};

/// `C x C` counts, rows ground truth, columns prediction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    num_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        Self { num_classes, counts: vec![0; num_classes * num_classes] }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.num_classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        (0..self.num_classes).map(|p| self.get(c, p)).sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        (0..self.num_classes).map(|g| self.get(g, c)).sum()
    }

    /// Adds another matrix of the same size.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.num_classes != self.num_classes {
            return Err(Error::shape("confusion matrices differ in class count"));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// Accumulates one prediction/ground-truth pair. Ground-truth pixels equal
    /// to its ignore value are skipped.
    pub fn accumulate(&mut self, pred: &LabelMap, gt: &LabelMap) -> Result<()> {
        if !pred.same_shape(gt) {
            return Err(Error::shape(format!(
                "prediction is {}x{}, ground truth {}x{}",
                pred.width(),
                pred.height(),
                gt.width(),
                gt.height()
            )));
        }
        let c = self.num_classes;
        for (&p, &g) in pred.data().iter().zip(gt.data()) {
            if gt.is_ignored(g) {
                continue;
            }
            let (p, g) = (usize::from(p), usize::from(g));
            if p >= c {
                return Err(Error::invalid(format!("predicted label {p} outside {c} classes")));
            }
            if g >= c {
                return Err(Error::invalid(format!("ground-truth label {g} outside {c} classes")));
            }
            self.counts[g * c + p] += 1;
        }
        Ok(())
    }
}

pub fn confusion(pred: &LabelMap, gt: &LabelMap, num_classes: usize) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new(num_classes);
    cm.accumulate(pred, gt)?;
    Ok(cm)
}

/// IoU per class; `None` where prediction and ground truth are both empty.
pub fn iou_per_class(cm: &ConfusionMatrix) -> Vec<Option<f64>> {
    (0..cm.num_classes)
        .map(|c| {
            let tp = cm.get(c, c);
            let union = cm.row_sum(c) + cm.col_sum(c) - tp;
            (union > 0).then(|| tp as f64 / union as f64)
        })
        .collect()
}

/// Mean IoU over classes with a defined value.
pub fn mean_iou(cm: &ConfusionMatrix) -> Option<f64> {
    mean_defined(&iou_per_class(cm))
}

fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

pub fn pixel_accuracy(cm: &ConfusionMatrix) -> Option<f64> {
    let total = cm.total();
    (total > 0).then(|| (0..cm.num_classes).map(|c| cm.get(c, c)).sum::<u64>() as f64 / total as f64)
}

/// Mean per-class recall over classes present in the ground truth.
pub fn class_accuracy(cm: &ConfusionMatrix) -> Option<f64> {
    let recalls: Vec<Option<f64>> = (0..cm.num_classes)
        .map(|c| {
            let row = cm.row_sum(c);
            (row > 0).then(|| cm.get(c, c) as f64 / row as f64)
        })
        .collect();
    mean_defined(&recalls)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegScores {
    pub iou: Vec<Option<f64>>,
    pub mean_iou: Option<f64>,
    pub pixel_accuracy: Option<f64>,
    pub class_accuracy: Option<f64>,
}

impl SegScores {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        Self {
            iou: iou_per_class(cm),
            mean_iou: mean_iou(cm),
            pixel_accuracy: pixel_accuracy(cm),
            class_accuracy: class_accuracy(cm),
        }
    }
}

/// Majority ground-truth label of each superpixel; ignored pixels do not
/// vote, ties go to the smaller label, `None` when nothing voted.
pub fn superpixel_majority(gt: &LabelMap, sp: &SuperpixelMap) -> Result<Vec<Option<u16>>> {
    if !gt.same_shape(sp) {
        return Err(Error::shape("ground truth and superpixel map differ in shape"));
    }
    let max_label = gt.data().iter().filter(|&&g| !gt.is_ignored(g)).max().map_or(0, |&m| usize::from(m));
    let mut votes = vec![vec![0u64; max_label + 1]; sp.num_superpixels()];
    for (&s, &g) in sp.labels().iter().zip(gt.data()) {
        if !gt.is_ignored(g) {
            votes[s as usize][usize::from(g)] += 1;
        }
    }
    Ok(votes
        .iter()
        .map(|v| {
            let best = (1..v.len()).fold(0, |b, l| if v[l] > v[b] { l } else { b });
            (v[best] > 0).then_some(best as u16)
        })
        .collect())
}

/// Paints one label per superpixel over its pixels.
pub fn paint_superpixels(sp: &SuperpixelMap, labels: &[u16], ignore: Option<u16>) -> Result<LabelMap> {
    if labels.len() != sp.num_superpixels() {
        return Err(Error::shape(format!("{} labels for {} superpixels", labels.len(), sp.num_superpixels())));
    }
    let data = sp.labels().iter().map(|&s| labels[s as usize]).collect();
    Ok(LabelMap::new(sp.width(), sp.height(), data)?.with_ignore(ignore))
}

/// Majority ground-truth label of each superpixel, painted over its pixels.
/// A superpixel without votes becomes the ignore label (0 when unset).
pub fn oracle_labels(gt: &LabelMap, sp: &SuperpixelMap) -> Result<LabelMap> {
    let fill = gt.ignore().unwrap_or(0);
    let winners: Vec<u16> = superpixel_majority(gt, sp)?.into_iter().map(|w| w.unwrap_or(fill)).collect();
    paint_superpixels(sp, &winners, gt.ignore())
}

fn boundary_mask<T: PartialEq>(width: usize, height: usize, labels: &[T]) -> Vec<bool> {
    let mut mask = vec![false; width * height];
    for y in 0..height {
        for x in 0..width {
            let p = y * width + x;
            if x + 1 < width && labels[p] != labels[p + 1] {
                mask[p] = true;
                mask[p + 1] = true;
            }
            if y + 1 < height && labels[p] != labels[p + width] {
                mask[p] = true;
                mask[p + width] = true;
            }
        }
    }
    mask
}

/// Fraction of ground-truth boundary pixels lying within `tolerance` pixels
/// (Chebyshev) of a superpixel boundary pixel. `None` without gt boundaries.
pub fn boundary_recall(gt: &LabelMap, sp: &SuperpixelMap, tolerance: usize) -> Result<Option<f64>> {
    if !gt.same_shape(sp) {
        return Err(Error::shape("ground truth and superpixel map differ in shape"));
    }
    let (w, h) = (gt.width(), gt.height());
    let gb = boundary_mask(w, h, gt.data());
    let sb = boundary_mask(w, h, sp.labels());
    let (mut hit, mut total) = (0usize, 0usize);
    for y in 0..h {
        for x in 0..w {
            if !gb[y * w + x] {
                continue;
            }
            total += 1;
            let found = (y.saturating_sub(tolerance)..=(y + tolerance).min(h - 1))
                .any(|yy| (x.saturating_sub(tolerance)..=(x + tolerance).min(w - 1)).any(|xx| sb[yy * w + xx]));
            hit += usize::from(found);
        }
    }
    Ok((total > 0).then(|| hit as f64 / total as f64))
}
