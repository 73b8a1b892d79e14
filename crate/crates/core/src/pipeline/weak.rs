//! Synthetic weak-supervision benchmark.
//!
//! Images hold blobs whose two halves carry different colors, so a localizer
//! trained from image-level labels tends to fire on one half only. Points
//! sampled from its score maps train a cell classifier that is scored by
//! pixel mIoU on held-out images.
//!
//! The image-level loss is unchanged by adding a constant to a score map, so
//! each foreground map is shifted to a zero minimum before sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::color::{lab_pixel_to_srgb, rgb_to_lab};
use crate::error::{Error, Result};
use crate::image::{FeatureMap, LabImage, LabelMap, RgbImage};
use crate::learner::{predict_labels, train, Dataset, FrequencyBasis, MlpModel, TrainConfig};
use crate::metrics::{ConfusionMatrix, SegScores};
use crate::report::{round4, seg_scores_json, with_entry};
use crate::weaksup::{
    localization_scores, normalize_features, sample_points, train_localizer, LocalizerConfig, SamplingMode,
};

/// Two Lab tones per class; class 0 is background.
const TONES: [[[f64; 3]; 2]; 4] = [
    [[50.0, 0.0, 0.0], [80.0, -10.0, 10.0]],
    [[45.0, 60.0, 45.0], [65.0, -10.0, -50.0]],
    [[70.0, -55.0, 50.0], [35.0, 25.0, -55.0]],
    [[85.0, 0.0, 75.0], [40.0, -35.0, -5.0]],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakConfig {
    pub images: usize,
    pub train_images: usize,
    /// Image side in pixels.
    pub size: usize,
    /// Grid cell side in pixels.
    pub cell: usize,
    /// Classes including background, at most 4.
    pub num_classes: usize,
    /// Foreground points per present class and image.
    pub k: usize,
    /// Background points per image; defaults to `k`.
    pub k_bg: Option<usize>,
    pub sampling: SamplingMode,
    /// RGB noise std in 8-bit units.
    pub noise: f64,
    /// Bandwidth of the Lab anchor encoding.
    pub sigma: f64,
    pub localizer: LocalizerConfig,
    pub classifier: TrainConfig,
    pub seed: u64,
}

impl Default for WeakConfig {
    fn default() -> Self {
        Self {
            images: 200,
            train_images: 150,
            size: 64,
            cell: 4,
            num_classes: 4,
            k: 20,
            k_bg: None,
            sampling: SamplingMode::Diverse,
            noise: 4.0,
            sigma: 30.0,
            localizer: LocalizerConfig::default(),
            classifier: TrainConfig {
                learning_rate: 0.01,
                epochs: 30,
                batch_size: 64,
                weight_decay: 1e-4,
                hidden: vec![32],
                ..TrainConfig::default()
            },
            seed: 11,
        }
    }
}

impl WeakConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=TONES.len()).contains(&self.num_classes) {
            return Err(Error::invalid(format!("weak benchmark supports 2..={} classes", TONES.len())));
        }
        if self.cell == 0 || !self.size.is_multiple_of(self.cell) || self.size < 4 * self.cell {
            return Err(Error::invalid("image size must be a multiple of at least four cells"));
        }
        if self.train_images == 0 || self.train_images >= self.images {
            return Err(Error::invalid("need at least one train and one test image"));
        }
        if !(self.sigma > 0.0) || !(self.noise >= 0.0) {
            return Err(Error::invalid("sigma must be positive and noise nonnegative"));
        }
        self.classifier.validate()
    }

    fn grid(&self) -> usize {
        self.size / self.cell
    }
}

fn two_tone_image<R: Rng>(cfg: &WeakConfig, rng: &mut R) -> (RgbImage, LabelMap) {
    let n = cfg.size;
    let mut labels = vec![0u16; n * n];
    let mut tone = vec![rng.gen_range(0..2usize); n * n];
    let fg = cfg.num_classes - 1;
    let count = rng.gen_range(1..=fg.min(2));
    let mut classes: Vec<u16> = (1..cfg.num_classes as u16).collect();
    for i in 0..count {
        let j = rng.gen_range(i..classes.len());
        classes.swap(i, j);
        let (cx, cy) = (rng.gen_range(0.25..0.75) * n as f64, rng.gen_range(0.25..0.75) * n as f64);
        let (rx, ry) = (rng.gen_range(0.15..0.3) * n as f64, rng.gen_range(0.15..0.3) * n as f64);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (c, s) = (theta.cos(), theta.sin());
        for y in 0..n {
            for x in 0..n {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if (dx / rx).powi(2) + (dy / ry).powi(2) <= 1.0 {
                    labels[y * n + x] = classes[i];
                    tone[y * n + x] = usize::from(dx * c + dy * s >= 0.0);
                }
            }
        }
    }
    let noise = (cfg.noise > 0.0).then(|| Normal::new(0.0, cfg.noise).expect("finite std"));
    let mut data = Vec::with_capacity(n * n * 3);
    for (l, t) in labels.iter().zip(&tone) {
        for v in lab_pixel_to_srgb(TONES[usize::from(*l)][*t]) {
            let e = noise.as_ref().map_or(0.0, |d| d.sample(rng));
            data.push((f64::from(v) + e).round().clamp(0.0, 255.0) as u8);
        }
    }
    let image = RgbImage::new(n, n, data).expect("consistent shape");
    (image, LabelMap::new(n, n, labels).expect("consistent shape"))
}

/// Mean Lab of every cell encoded against a 3x3x3 grid of Lab anchors.
pub fn cell_features(lab: &LabImage, cell: usize, sigma: f64) -> Result<FeatureMap> {
    let (gh, gw) = (lab.height() / cell, lab.width() / cell);
    let anchors: Vec<[f64; 3]> = [25.0, 55.0, 85.0]
        .iter()
        .flat_map(|&l| [-50.0, 0.0, 50.0].into_iter().flat_map(move |a| [-50.0, 0.0, 50.0].map(|b| [l, a, b])))
        .collect();
    let mut fm = FeatureMap::zeros(anchors.len(), gh, gw)?;
    let inv = 1.0 / (2.0 * sigma * sigma);
    for gy in 0..gh {
        for gx in 0..gw {
            let mut mean = [0.0f64; 3];
            for y in gy * cell..(gy + 1) * cell {
                for x in gx * cell..(gx + 1) * cell {
                    mean.iter_mut().zip(lab.pixel(x, y)).for_each(|(m, v)| *m += f64::from(v));
                }
            }
            mean.iter_mut().for_each(|m| *m /= (cell * cell) as f64);
            for (ch, a) in anchors.iter().enumerate() {
                let d2: f64 = a.iter().zip(&mean).map(|(p, q)| (p - q) * (p - q)).sum();
                fm.set(ch, gy, gx, (-d2 * inv).exp() as f32);
            }
        }
    }
    Ok(fm)
}

fn cell_majority(gt: &LabelMap, cell: usize, num_classes: usize) -> Vec<u16> {
    let (gh, gw) = (gt.height() / cell, gt.width() / cell);
    let mut out = Vec::with_capacity(gh * gw);
    for gy in 0..gh {
        for gx in 0..gw {
            let mut votes = vec![0usize; num_classes];
            for y in gy * cell..(gy + 1) * cell {
                for x in gx * cell..(gx + 1) * cell {
                    votes[usize::from(gt.get(x, y))] += 1;
                }
            }
            out.push((1..num_classes).fold(0, |b, c| if votes[c] > votes[b] { c } else { b }) as u16);
        }
    }
    out
}

/// Localizers trained once on the train split, reusable across sampling
/// settings.
pub struct WeakBench {
    cfg: WeakConfig,
    fields: Vec<FeatureMap>,
    gts: Vec<LabelMap>,
    present: Vec<Vec<usize>>,
    /// Min-shifted foreground scores per train image and class.
    fg_scores: Vec<Vec<Vec<f64>>>,
    z: Vec<crate::weaksup::NormalizedField>,
    pub localizer_losses: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct WeakOutcome {
    pub sampling: SamplingMode,
    pub k: usize,
    pub k_bg: usize,
    pub scores: SegScores,
    /// Foreground picks whose cell majority matches the sampled class.
    pub fg_precision: f64,
    pub fg_points: usize,
    pub bg_points: usize,
}

impl WeakOutcome {
    pub fn report(&self) -> Value {
        let mut v = seg_scores_json(&self.scores);
        v = with_entry(v, "mode", json!("weak"));
        v = with_entry(v, "sampling", json!(self.sampling));
        v = with_entry(v, "k", json!(self.k));
        v = with_entry(v, "k_bg", json!(self.k_bg));
        v = with_entry(v, "fg_precision", json!(round4(self.fg_precision)));
        v = with_entry(v, "fg_points", json!(self.fg_points));
        with_entry(v, "bg_points", json!(self.bg_points))
    }
}

impl WeakBench {
    pub fn prepare(cfg: &WeakConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let samples: Vec<(RgbImage, LabelMap)> = (0..cfg.images).map(|_| two_tone_image(cfg, &mut rng)).collect();
        let fields = samples
            .par_iter()
            .map(|(img, _)| cell_features(&rgb_to_lab(img), cfg.cell, cfg.sigma))
            .collect::<Result<Vec<_>>>()?;
        let gts: Vec<LabelMap> = samples.into_iter().map(|(_, gt)| gt).collect();
        let present: Vec<Vec<usize>> = gts
            .iter()
            .map(|gt| (1..cfg.num_classes).filter(|&c| gt.data().contains(&(c as u16))).map(|c| c - 1).collect())
            .collect();
        let train_fields = &fields[..cfg.train_images];
        let (z, _) = normalize_features(train_fields)?;

        let localizers = (1..cfg.num_classes)
            .into_par_iter()
            .map(|c| {
                let labels: Vec<bool> = present[..cfg.train_images].iter().map(|p| p.contains(&(c - 1))).collect();
                let lc = LocalizerConfig { seed: cfg.localizer.seed.wrapping_add(c as u64), ..cfg.localizer.clone() };
                train_localizer(train_fields, &labels, &lc)
            })
            .collect::<Result<Vec<_>>>()?;
        let fg_scores = train_fields
            .par_iter()
            .map(|f| {
                localizers
                    .iter()
                    .map(|l| {
                        let s = localization_scores(&l.model, f)?.fg().to_vec();
                        let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
                        Ok(s.iter().map(|v| v - lo).collect())
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let localizer_losses = localizers.into_iter().map(|l| l.epoch_losses).collect();
        Ok(Self { cfg: cfg.clone(), fields, gts, present, fg_scores, z, localizer_losses })
    }

    /// Samples points with the given rule, trains the cell classifier and
    /// scores it on the test split.
    pub fn evaluate(&self, sampling: SamplingMode, k: usize, k_bg: Option<usize>) -> Result<WeakOutcome> {
        let cfg = &self.cfg;
        let k_bg = k_bg.unwrap_or(k);
        let cell_gt: Vec<Vec<u16>> =
            self.gts[..cfg.train_images].iter().map(|g| cell_majority(g, cfg.cell, cfg.num_classes)).collect();
        let sets = (0..cfg.train_images)
            .into_par_iter()
            .map(|i| sample_points(&self.fg_scores[i], &self.present[i], &self.z[i], k, k_bg, sampling))
            .collect::<Result<Vec<_>>>()?;

        let mut data = Dataset { num_classes: cfg.num_classes, ..Dataset::default() };
        let (mut hits, mut fg_points, mut bg_points) = (0usize, 0usize, 0usize);
        let width = cfg.grid();
        for (i, set) in sets.iter().enumerate() {
            for (c, pts) in &set.foreground {
                for &p in pts {
                    data.features.push(self.fields[i].vector(p / width, p % width));
                    data.labels.push((c + 1) as u16);
                    hits += usize::from(cell_gt[i][p] == (c + 1) as u16);
                    fg_points += 1;
                }
            }
            for &p in &set.background {
                data.features.push(self.fields[i].vector(p / width, p % width));
                data.labels.push(0);
                bg_points += 1;
            }
        }
        data.weights = vec![1.0; data.labels.len()];
        let model = train(&data, &cfg.classifier, FrequencyBasis::Superpixels)?.model;
        let scores = self.test_scores(&model)?;
        Ok(WeakOutcome {
            sampling,
            k,
            k_bg,
            scores,
            fg_precision: if fg_points > 0 { hits as f64 / fg_points as f64 } else { 0.0 },
            fg_points,
            bg_points,
        })
    }

    fn test_scores(&self, model: &MlpModel) -> Result<SegScores> {
        let cfg = &self.cfg;
        let g = cfg.grid();
        let mut cm = ConfusionMatrix::new(cfg.num_classes);
        for (f, gt) in self.fields[cfg.train_images..].iter().zip(&self.gts[cfg.train_images..]) {
            let rows: Vec<Vec<f32>> = (0..g * g).map(|p| f.vector(p / g, p % g)).collect();
            let cells = predict_labels(model, &rows)?;
            let n = cfg.size;
            let data = (0..n * n).map(|p| cells[(p / n / cfg.cell) * g + (p % n) / cfg.cell]).collect();
            cm.accumulate(&LabelMap::new(n, n, data)?, gt)?;
        }
        Ok(SegScores::from_confusion(&cm))
    }
}

/// One benchmark run with the sampling settings of `cfg`.
pub fn run_weak_benchmark(cfg: &WeakConfig) -> Result<WeakOutcome> {
    WeakBench::prepare(cfg)?.evaluate(cfg.sampling, cfg.k, cfg.k_bg)
}
