use std::fs;
use std::path::Path;

use log::{info, warn};
use serde_json::{Map, Value};
use zok_core::crf::{
    map_labels, mean_field_refine, pixel_features, superpixel_features, CrfModel, KernelParams, MeanFieldConfig,
};
use zok_core::io::{read_pgm, read_ppm, read_tensor, write_pgm, write_tensor};
use zok_core::learner::{predict_labels, predict_probabilities, read_model, train, write_model, Dataset, TrainConfig};
use zok_core::metrics::{confusion, depth_metrics, SegScores};
use zok_core::pipeline::{run_pipeline, run_weak_benchmark, PipelineConfig, PipelineMode};
use zok_core::report::{depth_scores_json, render, seg_scores_json, ReportFormat};
use zok_core::slic::{run_slic, SlicParams};
use zok_core::synth::{generate, read_split, write_dataset, SyntheticSpec};
use zok_core::weaksup::{normalize_features, sample_points, NormalizedField};
use zok_core::zoomout::{parse_levels, pool_over_superpixels, rect_regions, upsample_featuremap, ZoomOutExtractor};
use zok_core::{rgb_to_lab, DepthMap, Error, LabelMap, Result, Tensor};

use crate::cli::*;
use crate::files::{
    read_field, read_labels, read_rows, read_superpixels, read_values, write_labels, write_rows, write_superpixels,
};

/// Dense CRF inference is quadratic in the node count.
const DENSE_NODE_WARNING: usize = 4096;

pub fn dispatch(cli: Cli, pipeline: Map<String, Value>) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Slic(a) => slic(&a),
        Command::Rect(a) => rect(&a),
        Command::Features(a) => features(&a),
        Command::Pool(a) => pool(&a),
        Command::Train(a) => train_model(&a, seed),
        Command::Predict(a) => predict(&a),
        Command::Sample(a) => sample(&a),
        Command::Crf(a) => crf(&a),
        Command::Eval(a) => eval(&a),
        Command::EvalDepth(a) => eval_depth(&a),
        Command::Synth(a) => synth(&a, seed),
        Command::Pipeline(a) => pipeline_run(&a, pipeline, seed),
    }
}

fn emit(v: &Value, format: ReportFormat, out: Option<&Path>) -> Result<()> {
    let text = render(v, format);
    match out {
        Some(path) => fs::write(path, text).map_err(Error::at_path(path))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn slic(a: &SlicArgs) -> Result<()> {
    let params = SlicParams {
        k: a.k,
        compactness: a.m,
        max_iters: a.max_iters,
        enforce_connectivity: !a.no_connectivity,
        ..SlicParams::default()
    };
    let result = run_slic(&read_ppm(&a.input)?, &params)?;
    info!("{} superpixels after {} iterations", result.map.num_superpixels(), result.iterations);
    write_superpixels(&result.map, &a.out)
}

fn rect(a: &RectArgs) -> Result<()> {
    let img = read_ppm(&a.input)?;
    write_superpixels(&rect_regions(img.width(), img.height(), a.count)?, &a.out)
}

fn features(a: &FeaturesArgs) -> Result<()> {
    let lab = rgb_to_lab(&read_ppm(&a.image)?);
    let map = read_superpixels(&a.superpixels)?;
    let featmap = a.featmap.as_deref().map(|p| read_field(p, "feature map")).transpose()?;
    let extractor = ZoomOutExtractor {
        levels: parse_levels(&a.levels)?,
        handcrafted: !a.no_handcrafted,
        mirror: a.mirror,
        upsample: a.upsample,
    };
    let feats = extractor.extract(&lab, &map, featmap.as_ref())?;
    info!("{} superpixels x {} dims", feats.num_superpixels(), feats.dim());
    write_tensor(&feats.to_tensor()?, &a.out)
}

fn pool(a: &PoolArgs) -> Result<()> {
    let map = read_superpixels(&a.superpixels)?;
    let fm = upsample_featuremap(&read_field(&a.featmap, "feature map")?, map.height(), map.width(), a.upsample);
    write_rows(&pool_over_superpixels(&fm, &map)?, &a.out)
}

fn train_model(a: &TrainArgs, seed: Option<u64>) -> Result<()> {
    let features = read_rows(&a.features)?;
    let labels = read_labels(&a.labels)?;
    let weights = match &a.weights {
        Some(p) => read_values(p)?.into_iter().map(f64::from).collect(),
        None => vec![1.0; labels.len()],
    };
    let num_classes = match a.classes {
        Some(c) => c,
        None => labels.iter().filter(|&&l| Some(l) != a.ignore).map(|&l| usize::from(l) + 1).max().unwrap_or(0),
    };
    if num_classes < 2 {
        return Err(Error::invalid("training needs at least two classes"));
    }
    let data = Dataset { features, labels, weights, num_classes, ignore: a.ignore };
    let defaults = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: a.lr,
        momentum: a.momentum,
        weight_decay: a.weight_decay,
        epochs: a.epochs,
        batch_size: a.batch_size,
        seed: seed.unwrap_or(defaults.seed),
        dropout: a.dropout,
        loss: a.loss,
        hidden: a.hidden.0.clone(),
    };
    let outcome = train(&data, &cfg, a.basis)?;
    if let Some(loss) = outcome.epoch_losses.last() {
        info!("final epoch loss {loss:.6}");
    }
    write_model(&a.out, &outcome.model)
}

fn predict(a: &PredictArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let rows = read_rows(&a.features)?;
    if a.probabilities {
        let probs = predict_probabilities(&model, &rows)?;
        let probs: Vec<Vec<f32>> = probs.iter().map(|p| p.iter().map(|&v| v as f32).collect()).collect();
        write_rows(&probs, &a.out)
    } else {
        write_labels(&predict_labels(&model, &rows)?, &a.out)
    }
}

fn sample(a: &SampleArgs) -> Result<()> {
    let scores = read_field(&a.scores, "score maps")?;
    let feats = read_field(&a.features, "feature field")?;
    let (h, w) = (scores.height(), scores.width());
    if (feats.height(), feats.width()) != (h, w) {
        return Err(Error::shape("score maps and feature field differ in size"));
    }
    let z = if a.standardize {
        normalize_features(std::slice::from_ref(&feats))?.0.remove(0)
    } else {
        let vectors: Vec<Vec<f32>> =
            (0..h).flat_map(|y| (0..w).map(move |x| (y, x))).map(|(y, x)| feats.vector(y, x)).collect();
        NormalizedField::from_vectors(h, w, &vectors)?
    };
    let plane = h * w;
    let channels: Vec<Vec<f64>> =
        scores.data().chunks(plane).map(|c| c.iter().map(|&v| f64::from(v)).collect()).collect();
    let classes = match &a.classes {
        Some(list) => list.0.clone(),
        None => (0..channels.len()).collect(),
    };
    let set = sample_points(&channels, &classes, &z, a.k, a.k_bg.unwrap_or(a.k), a.mode)?;
    let rows = set.to_rows(w);
    if rows.is_empty() {
        return Err(Error::invalid("no points were sampled"));
    }
    write_tensor(&Tensor::u32(vec![rows.len(), 4], rows.concat())?, &a.out)
}

fn crf(a: &CrfArgs) -> Result<()> {
    let lab = rgb_to_lab(&read_ppm(&a.image)?);
    let unary = read_tensor(&a.unary)?;
    let values = unary.as_f32()?;
    let dims = unary.dims().to_vec();
    let sp = a.superpixels.as_deref().map(read_superpixels).transpose()?;

    // probabilities arrive either node-major (N×C) or class-major (C×H×W)
    let class_major = dims.len() == 3;
    let (nodes, classes) = match (&sp, dims.as_slice()) {
        (Some(map), [k, c]) if *k == map.num_superpixels() => (*k, *c),
        (Some(_), _) => return Err(Error::shape("with --superpixels the unary must be K×C")),
        (None, [c, h, w]) if (*h, *w) == (lab.height(), lab.width()) => (h * w, *c),
        (None, [n, c]) if *n == lab.num_pixels() => (*n, *c),
        (None, _) => return Err(Error::shape("unary must be C×H×W or (H·W)×C matching the image")),
    };
    if let Some(map) = &sp {
        if (map.width(), map.height()) != (lab.width(), lab.height()) {
            return Err(Error::shape("image and superpixel map sizes differ"));
        }
    }
    let probs: Vec<Vec<f64>> = (0..nodes)
        .map(|i| {
            (0..classes)
                .map(|c| f64::from(if class_major { values[c * nodes + i] } else { values[i * classes + c] }))
                .collect()
        })
        .collect();
    if nodes > DENSE_NODE_WARNING {
        warn!("dense CRF over {nodes} nodes; inference cost grows with the square of this");
    }

    let kernels = KernelParams {
        w_appearance: a.w_appearance,
        w_smooth: a.w_smooth,
        theta_alpha: a.theta_alpha,
        theta_beta: a.theta_beta,
        theta_gamma: a.theta_gamma,
    };
    let model = CrfModel::potts(&CrfModel::unary_from_probabilities(&probs, a.floor), kernels.kernels()?)?;
    let feats = match &sp {
        Some(map) => superpixel_features(&lab, map),
        None => pixel_features(&lab),
    };
    let state =
        mean_field_refine(&model, &feats, &MeanFieldConfig { iters: a.iters, damping: a.damping, mode: a.mode })?;
    if let Some(fe) = state.free_energy.last() {
        info!("free energy {fe:.6} after {} iterations", state.iterations);
    }

    let refined: Vec<f32> = if class_major {
        (0..classes).flat_map(|c| (0..nodes).map(move |i| (c, i))).map(|(c, i)| state.row(i)[c] as f32).collect()
    } else {
        state.q.iter().map(|&v| v as f32).collect()
    };
    write_tensor(&Tensor::f32(dims, refined)?, &a.out)?;

    if let Some(path) = &a.labels {
        let labels = map_labels(&state);
        let pixels = match &sp {
            Some(map) => map.labels().iter().map(|&s| labels[s as usize]).collect(),
            None => labels,
        };
        write_pgm(&LabelMap::new(lab.width(), lab.height(), pixels)?, path)?;
    }
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let pred = read_pgm(&a.pred)?;
    let gt = read_pgm(&a.gt)?.with_ignore(a.ignore);
    let num_classes = match a.classes {
        Some(c) => c,
        None => pred
            .data()
            .iter()
            .chain(gt.data().iter().filter(|&&g| !gt.is_ignored(g)))
            .map(|&l| usize::from(l) + 1)
            .max()
            .unwrap_or(1),
    };
    let scores = SegScores::from_confusion(&confusion(&pred, &gt, num_classes)?);
    emit(&seg_scores_json(&scores), a.report, a.out.as_deref())
}

fn read_depth(path: &Path) -> Result<DepthMap> {
    let t = read_tensor(path)?;
    t.expect_rank(2, "depth map")?;
    DepthMap::new(t.dims()[1], t.dims()[0], t.as_f32()?.to_vec())
}

fn eval_depth(a: &EvalDepthArgs) -> Result<()> {
    let scores = depth_metrics(&read_depth(&a.pred)?, &read_depth(&a.gt)?, a.rel_denominator)?;
    emit(&depth_scores_json(&scores), a.report, a.out.as_deref())
}

fn synth(a: &SynthArgs, seed: Option<u64>) -> Result<()> {
    let spec = SyntheticSpec {
        width: a.width,
        height: a.height,
        num_classes: a.classes,
        shape: a.shape,
        colors: Vec::new(),
        noise: a.noise,
        max_blobs: a.max_blobs,
    };
    let mut samples = generate(&spec, a.train + a.test, seed.unwrap_or(0))?;
    let test = samples.split_off(a.train);
    write_dataset(&a.out, &spec, &samples, &test)?;
    info!("wrote {} train and {} test images to {}", samples.len(), test.len(), a.out.display());
    Ok(())
}

fn pipeline_config(a: &PipelineArgs, fields: Map<String, Value>, seed: Option<u64>) -> Result<PipelineConfig> {
    let mut cfg: PipelineConfig =
        serde_json::from_value(Value::Object(fields)).map_err(|e| Error::invalid(format!("pipeline config: {e}")))?;
    if let Some(v) = a.mode {
        cfg.mode = v;
    }
    if let Some(v) = a.regions {
        cfg.regions = v;
    }
    if let Some(v) = a.k {
        cfg.k = v;
    }
    if let Some(v) = a.m {
        cfg.compactness = v;
    }
    if let Some(v) = a.max_iters {
        cfg.max_iters = v;
    }
    if a.no_connectivity {
        cfg.connectivity = false;
    }
    if let Some(v) = &a.levels {
        cfg.levels = v.clone();
    }
    if a.mirror {
        cfg.mirror = true;
    }
    if let Some(v) = a.classes {
        cfg.num_classes = v;
    }
    if a.ignore.is_some() {
        cfg.ignore = a.ignore;
    }
    if let Some(v) = a.epochs {
        cfg.train.epochs = v;
    }
    if let Some(v) = a.lr {
        cfg.train.learning_rate = v;
    }
    if let Some(v) = &a.hidden {
        cfg.train.hidden = v.0.clone();
    }
    if a.crf {
        cfg.crf.enabled = true;
    }
    if let Some(s) = seed {
        cfg.train.seed = s;
        cfg.weak.seed = s;
    }
    Ok(cfg)
}

fn pipeline_run(a: &PipelineArgs, fields: Map<String, Value>, seed: Option<u64>) -> Result<()> {
    let cfg = pipeline_config(a, fields, seed).map_err(|e| e.in_stage("config"))?;
    if cfg.mode == PipelineMode::Weak {
        let outcome = run_weak_benchmark(&cfg.weak).map_err(|e| e.in_stage("weak"))?;
        return emit(&outcome.report(), a.report, a.out.as_deref());
    }

    let data = a.data.as_deref().ok_or_else(|| Error::invalid("--data is required").in_stage("config"))?;
    let test = read_split(data.join("test")).map_err(|e| e.in_stage("load"))?;
    let train_dir = data.join("train");
    let train = if cfg.mode == PipelineMode::Oracle && !train_dir.exists() {
        Vec::new()
    } else {
        read_split(train_dir).map_err(|e| e.in_stage("load"))?
    };
    info!("{} train and {} test images", train.len(), test.len());

    let outcome = run_pipeline(&cfg, &train, &test)?;
    if let Some(dir) = &a.predictions {
        write_predictions(dir, &outcome.predictions, outcome.refined.as_deref()).map_err(|e| e.in_stage("write"))?;
    }
    emit(&outcome.report(a.timings), a.report, a.out.as_deref())
}

fn write_predictions(dir: &Path, preds: &[LabelMap], refined: Option<&[LabelMap]>) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::at_path(dir))?;
    for (i, p) in preds.iter().enumerate() {
        write_pgm(p, dir.join(format!("pred_{i:04}.pgm")))?;
    }
    for (i, p) in refined.unwrap_or_default().iter().enumerate() {
        write_pgm(p, dir.join(format!("crf_{i:04}.pgm")))?;
    }
    Ok(())
}
