//! End-to-end runs: regions, zoom-out features, classifier, optional CRF and
//! evaluation over a train/test split.

pub mod weak;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::color::rgb_to_lab;
use crate::crf::{map_labels, mean_field_refine, superpixel_features, CrfModel, KernelParams, MeanFieldConfig};
use crate::error::{Error, Result};
use crate::image::{LabImage, LabelMap, SuperpixelMap};
use crate::learner::{predict_probabilities, train, Dataset, FrequencyBasis, TrainConfig};
use crate::metrics::{oracle_labels, paint_superpixels, superpixel_majority, ConfusionMatrix, SegScores};
use crate::report::{round4, seg_scores_json, with_entry};
use crate::slic::{run_slic_lab, SlicParams};
use crate::synth::Sample;
use crate::zoomout::{parse_levels, rect_regions, ZoomOutExtractor};

pub use weak::{run_weak_benchmark, WeakConfig, WeakOutcome};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineMode {
    /// Train a classifier on the train split, evaluate on the test split.
    #[default]
    Supervised,
    /// Majority ground-truth label per region; no training.
    Oracle,
    /// Synthetic weak-supervision benchmark.
    Weak,
}

impl FromStr for PipelineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "supervised" => Ok(PipelineMode::Supervised),
            "oracle" => Ok(PipelineMode::Oracle),
            "weak" => Ok(PipelineMode::Weak),
            other => Err(Error::invalid(format!("unknown pipeline mode '{other}'"))),
        }
    }
}

/// Region partition: SLIC superpixels or an `N`-cell rectangle grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RegionSource {
    #[default]
    Slic,
    Rect(usize),
}

impl FromStr for RegionSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "slic" => Ok(RegionSource::Slic),
            Some(("rect", n)) => match n.parse::<usize>() {
                Ok(n) if n > 0 => Ok(RegionSource::Rect(n)),
                _ => Err(Error::invalid(format!("bad rectangle count in '{s}'"))),
            },
            _ => Err(Error::invalid(format!("unknown region source '{s}'"))),
        }
    }
}

impl TryFrom<String> for RegionSource {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RegionSource> for String {
    fn from(r: RegionSource) -> String {
        r.to_string()
    }
}

impl fmt::Display for RegionSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionSource::Slic => write!(f, "slic"),
            RegionSource::Rect(n) => write!(f, "rect:{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrfSettings {
    pub enabled: bool,
    pub inference: MeanFieldConfig,
    pub kernels: KernelParams,
    /// Probability floor before taking `-ln p` as the unary.
    pub floor: f64,
}

impl Default for CrfSettings {
    fn default() -> Self {
        Self { enabled: false, inference: MeanFieldConfig::default(), kernels: KernelParams::default(), floor: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: PipelineMode,
    pub regions: RegionSource,
    pub k: usize,
    pub compactness: f64,
    pub max_iters: usize,
    pub connectivity: bool,
    /// Zoom-out levels, e.g. `local,proximal:2`.
    pub levels: String,
    pub mirror: bool,
    /// Class count; 0 infers it from the ground truth.
    pub num_classes: usize,
    pub ignore: Option<u16>,
    pub basis: FrequencyBasis,
    pub train: TrainConfig,
    pub crf: CrfSettings,
    pub weak: WeakConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let slic = SlicParams::default();
        Self {
            mode: PipelineMode::Supervised,
            regions: RegionSource::Slic,
            k: slic.k,
            compactness: slic.compactness,
            max_iters: slic.max_iters,
            connectivity: slic.enforce_connectivity,
            levels: "local,proximal:2".into(),
            mirror: false,
            num_classes: 0,
            ignore: None,
            basis: FrequencyBasis::Pixels,
            train: TrainConfig::default(),
            crf: CrfSettings::default(),
            weak: WeakConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        parse_levels(&self.levels)?;
        self.train.validate()?;
        if self.crf.enabled && !(0.0..1.0).contains(&self.crf.inference.damping) {
            return Err(Error::invalid("crf damping must lie in [0, 1)"));
        }
        Ok(())
    }

    fn slic_params(&self) -> SlicParams {
        SlicParams {
            k: self.k,
            compactness: self.compactness,
            max_iters: self.max_iters,
            enforce_connectivity: self.connectivity,
            ..SlicParams::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub mode: PipelineMode,
    pub num_classes: usize,
    pub scores: SegScores,
    pub crf_scores: Option<SegScores>,
    /// Test-split predictions before CRF refinement.
    pub predictions: Vec<LabelMap>,
    pub refined: Option<Vec<LabelMap>>,
    pub mean_regions: f64,
    /// Last epoch loss of the classifier.
    pub final_loss: Option<f64>,
    /// Wall time per stage in seconds.
    pub timings: Vec<(String, f64)>,
}

impl PipelineOutcome {
    /// Report with scores, optional CRF scores and, on request, timings.
    pub fn report(&self, timings: bool) -> Value {
        let mut v = seg_scores_json(&self.scores);
        v = with_entry(v, "mode", json!(self.mode));
        v = with_entry(v, "num_classes", json!(self.num_classes));
        v = with_entry(v, "mean_regions", json!(round4(self.mean_regions)));
        if let Some(c) = &self.crf_scores {
            v = with_entry(v, "crf", seg_scores_json(c));
        }
        if timings {
            let t: serde_json::Map<String, Value> =
                self.timings.iter().map(|(k, s)| (k.clone(), json!(round4(*s)))).collect();
            v = with_entry(v, "timings", Value::Object(t));
        }
        v
    }
}

struct Prepared {
    lab: LabImage,
    map: SuperpixelMap,
}

fn segment(samples: &[Sample], cfg: &PipelineConfig) -> Result<Vec<Prepared>> {
    let params = cfg.slic_params();
    samples
        .par_iter()
        .map(|s| {
            let lab = rgb_to_lab(&s.image);
            let map = match cfg.regions {
                RegionSource::Slic => run_slic_lab(&lab, &params)?.map,
                RegionSource::Rect(n) => rect_regions(lab.width(), lab.height(), n)?,
            };
            Ok(Prepared { lab, map })
        })
        .collect()
}

fn features(prepared: &[Prepared], cfg: &PipelineConfig) -> Result<Vec<Vec<Vec<f32>>>> {
    let extractor =
        ZoomOutExtractor { mirror: cfg.mirror, ..ZoomOutExtractor::with_levels(parse_levels(&cfg.levels)?) };
    prepared.par_iter().map(|p| Ok(extractor.extract(&p.lab, &p.map, None)?.into_rows())).collect()
}

fn infer_classes(cfg: &PipelineConfig, splits: &[&[Sample]]) -> Result<usize> {
    if cfg.num_classes > 0 {
        return Ok(cfg.num_classes);
    }
    let max = splits
        .iter()
        .flat_map(|s| s.iter())
        .flat_map(|s| s.gt.data().iter().copied())
        .filter(|&g| Some(g) != cfg.ignore)
        .max()
        .ok_or_else(|| Error::invalid("ground truth has no labeled pixels"))?;
    Ok(usize::from(max) + 1)
}

fn with_ignore(gt: &LabelMap, ignore: Option<u16>) -> LabelMap {
    gt.clone().with_ignore(ignore.or(gt.ignore()))
}

fn evaluate(preds: &[LabelMap], test: &[Sample], num_classes: usize, ignore: Option<u16>) -> Result<SegScores> {
    let mut cm = ConfusionMatrix::new(num_classes);
    for (p, s) in preds.iter().zip(test) {
        cm.accumulate(p, &with_ignore(&s.gt, ignore))?;
    }
    Ok(SegScores::from_confusion(&cm))
}

struct Clock {
    start: Instant,
    timings: Vec<(String, f64)>,
}

impl Clock {
    fn new() -> Self {
        Self { start: Instant::now(), timings: Vec::new() }
    }

    fn lap(&mut self, stage: &str) {
        self.timings.push((stage.to_string(), self.start.elapsed().as_secs_f64()));
        self.start = Instant::now();
    }
}

/// Runs the supervised or oracle pipeline. Every failure is tagged with the
/// stage it happened in.
pub fn run_pipeline(cfg: &PipelineConfig, train_set: &[Sample], test_set: &[Sample]) -> Result<PipelineOutcome> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    if cfg.mode == PipelineMode::Weak {
        return Err(Error::invalid("weak mode runs through run_weak_benchmark").in_stage("config"));
    }
    if test_set.is_empty() {
        return Err(Error::invalid("test split is empty").in_stage("load"));
    }
    let num_classes = infer_classes(cfg, &[train_set, test_set]).map_err(|e| e.in_stage("load"))?;
    let mut clock = Clock::new();

    let test_prep = segment(test_set, cfg).map_err(|e| e.in_stage("regions"))?;
    let mean_regions = test_prep.iter().map(|p| p.map.num_superpixels() as f64).sum::<f64>() / test_prep.len() as f64;

    if cfg.mode == PipelineMode::Oracle {
        clock.lap("regions");
        let preds = test_prep
            .iter()
            .zip(test_set)
            .map(|(p, s)| oracle_labels(&with_ignore(&s.gt, cfg.ignore), &p.map))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_stage("oracle"))?;
        let scores = evaluate(&preds, test_set, num_classes, cfg.ignore).map_err(|e| e.in_stage("eval"))?;
        clock.lap("eval");
        return Ok(PipelineOutcome {
            mode: cfg.mode,
            num_classes,
            scores,
            crf_scores: None,
            predictions: preds,
            refined: None,
            mean_regions,
            final_loss: None,
            timings: clock.timings,
        });
    }

    if train_set.is_empty() {
        return Err(Error::invalid("train split is empty").in_stage("load"));
    }
    let train_prep = segment(train_set, cfg).map_err(|e| e.in_stage("regions"))?;
    clock.lap("regions");
    let train_rows = features(&train_prep, cfg).map_err(|e| e.in_stage("features"))?;
    let test_rows = features(&test_prep, cfg).map_err(|e| e.in_stage("features"))?;
    clock.lap("features");

    let mut data = Dataset { num_classes, ignore: None, ..Dataset::default() };
    for ((p, rows), s) in train_prep.iter().zip(train_rows).zip(train_set) {
        let majority =
            superpixel_majority(&with_ignore(&s.gt, cfg.ignore), &p.map).map_err(|e| e.in_stage("labels"))?;
        for ((row, label), size) in rows.into_iter().zip(majority).zip(p.map.sizes()) {
            if let Some(label) = label {
                data.features.push(row);
                data.labels.push(label);
                data.weights.push(size as f64);
            }
        }
    }
    let outcome = train(&data, &cfg.train, cfg.basis).map_err(|e| e.in_stage("train"))?;
    clock.lap("train");

    let probs: Vec<Vec<Vec<f64>>> = test_rows
        .par_iter()
        .map(|rows| predict_probabilities(&outcome.model, rows))
        .collect::<Result<_>>()
        .map_err(|e| e.in_stage("predict"))?;
    let preds = test_prep
        .iter()
        .zip(&probs)
        .map(|(p, pr)| {
            paint_superpixels(&p.map, &pr.iter().map(|r| crate::learner::argmax(r) as u16).collect::<Vec<_>>(), None)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("predict"))?;
    clock.lap("predict");

    let refined = if cfg.crf.enabled {
        let kernels = cfg.crf.kernels.kernels().map_err(|e| e.in_stage("crf"))?;
        let maps = test_prep
            .par_iter()
            .zip(&probs)
            .map(|(p, pr)| {
                let unary = CrfModel::unary_from_probabilities(pr, cfg.crf.floor);
                let model = CrfModel::potts(&unary, kernels.clone())?;
                let state = mean_field_refine(&model, &superpixel_features(&p.lab, &p.map), &cfg.crf.inference)?;
                paint_superpixels(&p.map, &map_labels(&state), None)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.in_stage("crf"))?;
        clock.lap("crf");
        Some(maps)
    } else {
        None
    };

    let scores = evaluate(&preds, test_set, num_classes, cfg.ignore).map_err(|e| e.in_stage("eval"))?;
    let crf_scores = refined
        .as_ref()
        .map(|r| evaluate(r, test_set, num_classes, cfg.ignore))
        .transpose()
        .map_err(|e| e.in_stage("eval"))?;
    clock.lap("eval");
    Ok(PipelineOutcome {
        mode: cfg.mode,
        num_classes,
        scores,
        crf_scores,
        predictions: preds,
        refined,
        mean_regions,
        final_loss: outcome.epoch_losses.last().copied(),
        timings: clock.timings,
    })
}
