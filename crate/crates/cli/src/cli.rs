use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use zok_core::crf::MeanFieldMode;
use zok_core::learner::{FrequencyBasis, LossKind};
use zok_core::metrics::RelDenominator;
use zok_core::pipeline::{PipelineMode, RegionSource};
use zok_core::report::ReportFormat;
use zok_core::synth::ShapeKind;
use zok_core::weaksup::SamplingMode;
use zok_core::zoomout::Upsample;
use zok_core::Error;

#[derive(Parser, Debug)]
#[command(name = "zok", version, about = "Superpixel zoom-out semantic segmentation toolkit")]
pub struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "ZOK_THREADS")]
    pub threads: Option<usize>,

    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// JSON object of option values; flags on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Oversegment an image into SLIC superpixels.
    Slic(SlicArgs),
    /// Partition an image into a regular rectangle grid.
    Rect(RectArgs),
    /// Zoom-out feature matrix for every superpixel.
    Features(FeaturesArgs),
    /// Mean-pool a dense feature map over superpixels.
    Pool(PoolArgs),
    /// Train a softmax classifier on labeled feature rows.
    Train(TrainArgs),
    /// Apply a trained classifier.
    Predict(PredictArgs),
    /// Pick training points from localization score maps.
    Sample(SampleArgs),
    /// Refine class probabilities with a fully connected CRF.
    Crf(CrfArgs),
    /// Score a predicted label map against ground truth.
    Eval(EvalArgs),
    /// Score a predicted depth map against ground truth.
    EvalDepth(EvalDepthArgs),
    /// Write a synthetic train/test dataset.
    Synth(SynthArgs),
    /// Run the end-to-end pipeline on a dataset directory.
    Pipeline(PipelineArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Slic(_) => "slic",
            Command::Rect(_) => "rect",
            Command::Features(_) => "features",
            Command::Pool(_) => "pool",
            Command::Train(_) => "train",
            Command::Predict(_) => "predict",
            Command::Sample(_) => "sample",
            Command::Crf(_) => "crf",
            Command::Eval(_) => "eval",
            Command::EvalDepth(_) => "eval-depth",
            Command::Synth(_) => "synth",
            Command::Pipeline(_) => "pipeline",
        }
    }
}

/// Comma-separated list of sizes; the empty string is the empty list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SizeList(pub Vec<usize>);

impl FromStr for SizeList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse().map_err(|_| Error::invalid(format!("'{p}' is not a size"))))
            .collect::<Result<_, _>>()
            .map(SizeList)
    }
}

impl fmt::Display for SizeList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SlicArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Desired number of superpixels.
    #[arg(long, default_value_t = 500)]
    pub k: usize,
    /// Compactness.
    #[arg(long, default_value_t = 15.0)]
    pub m: f64,
    #[arg(long, default_value_t = 10)]
    pub max_iters: usize,
    /// Keep disconnected fragments instead of merging them.
    #[arg(long)]
    pub no_connectivity: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct RectArgs {
    /// Image whose size the grid covers.
    #[arg(long)]
    pub input: PathBuf,
    /// Approximate number of rectangles.
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub superpixels: PathBuf,
    #[arg(long, default_value = "local,proximal:2")]
    pub levels: String,
    /// Fuse with the mirrored image by element-wise max.
    #[arg(long)]
    pub mirror: bool,
    /// Dense C×H×W feature map pooled at every level.
    #[arg(long)]
    pub featmap: Option<PathBuf>,
    #[arg(long, default_value = "nearest")]
    pub upsample: Upsample,
    /// Leave out the color histogram and location descriptors.
    #[arg(long)]
    pub no_handcrafted: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct PoolArgs {
    #[arg(long)]
    pub featmap: PathBuf,
    #[arg(long)]
    pub superpixels: PathBuf,
    #[arg(long, default_value = "nearest")]
    pub upsample: Upsample,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct TrainArgs {
    /// N×D feature rows.
    #[arg(long)]
    pub features: PathBuf,
    /// N class labels (u32).
    #[arg(long)]
    pub labels: PathBuf,
    /// N per-row pixel counts (f32) for pixel-basis class frequencies.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Class count; defaults to the largest label plus one.
    #[arg(long)]
    pub classes: Option<usize>,
    /// Label excluded from training.
    #[arg(long)]
    pub ignore: Option<u16>,
    /// Hidden layer widths, e.g. 1024,1024.
    #[arg(long, default_value = "")]
    pub hidden: SizeList,
    #[arg(long, default_value = "asymmetric")]
    pub loss: LossKind,
    #[arg(long, default_value = "pixels")]
    pub basis: FrequencyBasis,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 100)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Write N×C class probabilities instead of labels.
    #[arg(long)]
    pub probabilities: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SampleArgs {
    /// C×H×W foreground score maps, one channel per class.
    #[arg(long)]
    pub scores: PathBuf,
    /// D×H×W feature field at the same resolution.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Background points; defaults to k.
    #[arg(long)]
    pub k_bg: Option<usize>,
    #[arg(long, default_value = "diverse")]
    pub mode: SamplingMode,
    /// Score channels to sample; defaults to all.
    #[arg(long)]
    pub classes: Option<SizeList>,
    /// Standardize each feature dimension over the field before unit-normalizing.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct CrfArgs {
    /// Class probabilities: C×H×W per pixel, or K×C per superpixel with --superpixels.
    #[arg(long)]
    pub unary: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    /// Run over superpixels instead of pixels.
    #[arg(long)]
    pub superpixels: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    #[arg(long, default_value = "parallel")]
    pub mode: MeanFieldMode,
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
    #[arg(long, default_value_t = 3.0)]
    pub w_appearance: f64,
    #[arg(long, default_value_t = 1.0)]
    pub w_smooth: f64,
    #[arg(long, default_value_t = 10.0)]
    pub theta_alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    pub theta_beta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub theta_gamma: f64,
    /// Probability floor before taking the negative log.
    #[arg(long, default_value_t = 1e-6)]
    pub floor: f64,
    /// Refined probabilities, in the layout of --unary.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the refined label map as PGM.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Class count; defaults to the largest label seen plus one.
    #[arg(long)]
    pub classes: Option<usize>,
    /// Ground-truth value excluded from scoring.
    #[arg(long)]
    pub ignore: Option<u16>,
    #[arg(long, default_value = "json")]
    pub report: ReportFormat,
    /// Report file; defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct EvalDepthArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value = "pred")]
    pub rel_denominator: RelDenominator,
    #[arg(long, default_value = "json")]
    pub report: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SynthArgs {
    /// Dataset directory; receives train/, test/ and spec.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "blobs")]
    pub shape: ShapeKind,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    /// Gaussian noise std per RGB channel.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 3)]
    pub max_blobs: usize,
    #[arg(long, default_value_t = 20)]
    pub train: usize,
    #[arg(long, default_value_t = 10)]
    pub test: usize,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct PipelineArgs {
    /// Dataset directory with train/ and test/ splits.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Report file; defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format.
    #[arg(long, default_value = "json")]
    pub report: ReportFormat,
    /// Include per-stage wall times in the report.
    #[arg(long)]
    pub timings: bool,
    /// Directory for predicted test label maps.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// `supervised`, `oracle` or `weak`.
    #[arg(long)]
    pub mode: Option<PipelineMode>,
    /// `slic` or `rect:N`.
    #[arg(long)]
    pub regions: Option<RegionSource>,
    /// Target superpixel count.
    #[arg(long)]
    pub k: Option<usize>,
    /// SLIC compactness.
    #[arg(long)]
    pub m: Option<f64>,
    /// SLIC iterations.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Skip the SLIC connectivity pass.
    #[arg(long)]
    pub no_connectivity: bool,
    /// Zoom-out levels, e.g. `local,proximal:2,subscene:3,scene`.
    #[arg(long)]
    pub levels: Option<String>,
    /// Fuse features of the mirrored image by element-wise max.
    #[arg(long)]
    pub mirror: bool,
    /// Number of classes.
    #[arg(long)]
    pub classes: Option<usize>,
    /// Label excluded from training and scoring.
    #[arg(long)]
    pub ignore: Option<u16>,
    /// Training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Hidden layer widths, comma separated.
    #[arg(long)]
    pub hidden: Option<SizeList>,
    /// Refine predictions with the CRF.
    #[arg(long)]
    pub crf: bool,
}

/// Pipeline flags that are not fields of the pipeline configuration.
pub const PIPELINE_RUN_KEYS: [&str; 7] = ["data", "out", "report", "timings", "predictions", "threads", "seed"];
