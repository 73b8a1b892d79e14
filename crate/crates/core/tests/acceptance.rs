//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zok_core::crf::{
    gibbs_distribution_bruteforce, gibbs_energy, map_labels, mean_field_refine, CrfModel, Kernel, MeanFieldConfig,
    MeanFieldMode, NodeFeatures,
};
use zok_core::io::{decode_pgm, decode_ppm, encode_pgm, encode_ppm, Tensor};
use zok_core::learner::{
    asymmetric_loss, loss_gradient, model_from_bytes, model_to_bytes, softmax, symmetric_loss, ClassFrequencies,
    MlpModel, TrainConfig,
};
use zok_core::metrics::{
    boundary_recall, depth_metrics, oracle_labels, paint_superpixels, ConfusionMatrix, RelDenominator, SegScores,
};
use zok_core::pipeline::weak::{WeakBench, WeakConfig};
use zok_core::pipeline::{run_pipeline, CrfSettings, PipelineConfig, PipelineMode, RegionSource};
use zok_core::slic::{run_slic, SlicParams};
use zok_core::synth::{generate, ShapeKind, SyntheticSpec};
use zok_core::weaksup::{
    diverse_sample_bg, diverse_sample_fg, image_loss_and_grad, spatial_diverse_sample, topk_sample, LocalizerModel,
    NormalizedField, SamplingMode, ScoreField,
};
use zok_core::{DepthMap, LabelMap, RgbImage};

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn run(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let ok = v.ok && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" (limit {:.1}s)", l.as_secs_f64()));
    println!(
        "criterion {id} {name}: {} [{}; {:.2}s{budget}]",
        if ok { "PASS" } else { "FAIL" },
        v.detail,
        elapsed.as_secs_f64()
    );
    ok
}

fn miou(preds: &[LabelMap], gts: &[LabelMap], c: usize) -> f64 {
    let mut cm = ConfusionMatrix::new(c);
    for (p, g) in preds.iter().zip(gts) {
        cm.accumulate(p, g).unwrap();
    }
    SegScores::from_confusion(&cm).mean_iou.unwrap()
}

fn oracle_check() -> Verdict {
    // quadrant ground truth over an aligned 2x2 rectangle grid
    let spec = SyntheticSpec { shape: ShapeKind::Quadrants, ..Default::default() };
    let quad = generate(&spec, 3, 1).unwrap();
    let cfg = PipelineConfig { mode: PipelineMode::Oracle, regions: RegionSource::Rect(4), ..Default::default() };
    let rect = run_pipeline(&cfg, &[], &quad).unwrap().scores.mean_iou.unwrap();

    // random labels painted over SLIC superpixels of blob images
    let blobs = generate(&SyntheticSpec { noise: 6.0, ..Default::default() }, 4, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut preds, mut gts) = (Vec::new(), Vec::new());
    for s in &blobs {
        let map = run_slic(&s.image, &SlicParams::new(60, 10.0)).unwrap().map;
        let labels: Vec<u16> = (0..map.num_superpixels()).map(|_| rng.gen_range(0..5)).collect();
        let gt = paint_superpixels(&map, &labels, None).unwrap();
        preds.push(oracle_labels(&gt, &map).unwrap());
        gts.push(gt);
    }
    let painted = miou(&preds, &gts, 5);
    verdict(rect == 1.0 && painted == 1.0, format!("rect-grid mIoU {rect}, slic-painted mIoU {painted}"))
}

fn slic_quality() -> Verdict {
    let spec = SyntheticSpec { shape: ShapeKind::Quadrants, ..Default::default() };
    let sample = generate(&spec, 1, 5).unwrap().remove(0);
    let params = SlicParams::new(4, 10.0);
    let a = run_slic(&sample.image, &params).unwrap().map;
    let b = run_slic(&sample.image, &params).unwrap().map;
    let mut purity = f64::INFINITY;
    for q in 0..4u16 {
        let mut counts = vec![0usize; a.num_superpixels()];
        let mut size = 0;
        for (&g, &s) in sample.gt.data().iter().zip(a.labels()) {
            if g == q {
                counts[s as usize] += 1;
                size += 1;
            }
        }
        purity = purity.min(*counts.iter().max().unwrap() as f64 / size as f64);
    }
    let recall = boundary_recall(&sample.gt, &a, 1).unwrap().unwrap();
    let same = a == b;
    verdict(
        purity >= 0.95 && recall >= 0.99 && same,
        format!("min purity {purity:.4}, boundary recall {recall:.4}, deterministic {same}"),
    )
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

fn mlp_fd_error(rng: &mut ChaCha8Rng) -> f64 {
    let d = rng.gen_range(2..6);
    let h = rng.gen_range(3..8);
    let c = rng.gen_range(2..5);
    let n = rng.gen_range(2..6);
    let mut model = MlpModel::new(&[d, h, c], rng).unwrap();
    let batch: Vec<Vec<f32>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
    let raw: Vec<f64> = (0..c).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let freqs = ClassFrequencies::new(raw.iter().map(|f| f / total).collect()).unwrap();
    let (_, grads) = loss_gradient(&model, &batch, &labels, Some(&freqs)).unwrap();
    let loss = |m: &MlpModel| loss_gradient(m, &batch, &labels, Some(&freqs)).unwrap().0;
    let (mut analytic, mut numeric) = (Vec::new(), Vec::new());
    for layer in 0..model.layers().len() {
        let nw = model.layers()[layer].weights.len();
        let nb = model.layers()[layer].bias.len();
        for p in 0..nw + nb {
            let get = |m: &mut MlpModel| -> *mut f32 {
                let l = &mut m.layers_mut()[layer];
                if p < nw {
                    &mut l.weights[p]
                } else {
                    &mut l.bias[p - nw]
                }
            };
            let orig = unsafe { *get(&mut model) };
            let step = 1e-3f32;
            let (up, down) = (orig + step, orig - step);
            unsafe { *get(&mut model) = up };
            let lu = loss(&model);
            unsafe { *get(&mut model) = down };
            let ld = loss(&model);
            unsafe { *get(&mut model) = orig };
            numeric.push((lu - ld) / (f64::from(up) - f64::from(down)));
            analytic.push(if p < nw { grads.weights[layer][p] } else { grads.bias[layer][p - nw] });
        }
    }
    rel_err(&analytic, &numeric)
}

fn localization_fd_error(rng: &mut ChaCha8Rng, model: LocalizerModel) -> f64 {
    let (h, w) = (rng.gen_range(2..5), rng.gen_range(2..5));
    let fg: Vec<f64> = (0..h * w).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let bg: Vec<f64> = (0..h * w).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let present = rng.gen_bool(0.5);
    let g = image_loss_and_grad(&ScoreField::new(h, w, fg.clone(), bg.clone()).unwrap(), present, model);
    let loss = |f: &[f64], b: &[f64]| {
        image_loss_and_grad(&ScoreField::new(h, w, f.to_vec(), b.to_vec()).unwrap(), present, model).loss
    };
    let eps = 1e-6;
    let mut numeric = Vec::new();
    for channel in 0..2 {
        for i in 0..h * w {
            let (mut fu, mut bu, mut fd, mut bd) = (fg.clone(), bg.clone(), fg.clone(), bg.clone());
            if channel == 0 {
                fu[i] += eps;
                fd[i] -= eps;
            } else {
                bu[i] += eps;
                bd[i] -= eps;
            }
            numeric.push((loss(&fu, &bu) - loss(&fd, &bd)) / (2.0 * eps));
        }
    }
    let analytic: Vec<f64> = g.d_fg.iter().chain(&g.d_bg).copied().collect();
    rel_err(&analytic, &numeric)
}

fn gradient_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut mlp, mut pix, mut glob) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        mlp = mlp.max(mlp_fd_error(&mut rng));
        pix = pix.max(localization_fd_error(&mut rng, LocalizerModel::Pixel));
        glob = glob.max(localization_fd_error(&mut rng, LocalizerModel::Global));
    }
    verdict(
        mlp < 1e-4 && pix < 1e-4 && glob < 1e-4,
        format!("max rel err: mlp {mlp:.2e}, pixel softmax {pix:.2e}, global softmax {glob:.2e}"),
    )
}

fn loss_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let c = rng.gen_range(2..8);
        let n = rng.gen_range(1..40);
        let probs: Vec<Vec<f64>> =
            (0..n).map(|_| softmax(&(0..c).map(|_| rng.gen_range(-4.0..4.0)).collect::<Vec<_>>())).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let asym = asymmetric_loss(&probs, &labels, &ClassFrequencies::uniform(c)).unwrap();
        let sym = symmetric_loss(&probs, &labels).unwrap();
        worst = worst.max((asym - c as f64 * sym).abs() / (c as f64 * sym).abs().max(1e-300));

        let d = rng.gen_range(1..5);
        let model = MlpModel::new(&[d, 4, c], &mut rng).unwrap();
        let batch: Vec<Vec<f32>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let (la, _) = loss_gradient(&model, &batch, &labels, Some(&ClassFrequencies::uniform(c))).unwrap();
        let (ls, _) = loss_gradient(&model, &batch, &labels, None).unwrap();
        worst = worst.max((la - c as f64 * ls).abs() / (c as f64 * ls).abs());
    }
    verdict(worst < 1e-6, format!("max relative deviation {worst:.2e} over 100 batches"))
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exhaustive evaluation of every greedy step from the raw vectors.
fn brute_fg(scores: &[f64], vecs: &[Vec<f64>], k: usize) -> Vec<usize> {
    let z: Vec<Vec<f64>> = vecs.iter().map(|v| unit(v)).collect();
    let mut picks: Vec<usize> = Vec::new();
    for _ in 0..k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for i in 0..scores.len() {
            if picks.contains(&i) {
                continue;
            }
            let pen = picks.iter().map(|&p| dot(&z[i], &z[p]).abs()).fold(0.0, f64::max);
            let v = scores[i] * (1.0 - pen);
            if v > best.1 {
                best = (i, v);
            }
        }
        picks.push(best.0);
    }
    picks
}

fn brute_bg(vecs: &[Vec<f64>], fg: &[usize], k: usize) -> Vec<usize> {
    let z: Vec<Vec<f64>> = vecs.iter().map(|v| unit(v)).collect();
    let mut picks: Vec<usize> = Vec::new();
    for _ in 0..k {
        let mut best = (usize::MAX, f64::INFINITY);
        for i in (0..vecs.len()).filter(|i| !fg.contains(i) && !picks.contains(i)) {
            let v = fg.iter().chain(&picks).map(|&p| dot(&z[i], &z[p]).abs()).fold(0.0, f64::max);
            if v < best.1 {
                best = (i, v);
            }
        }
        picks.push(best.0);
    }
    picks
}

fn field(vecs: &[Vec<f64>]) -> NormalizedField {
    let v: Vec<Vec<f32>> = vecs.iter().map(|r| r.iter().map(|&x| x as f32).collect()).collect();
    NormalizedField::from_vectors(1, v.len(), &v).unwrap()
}

fn sampling_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = Vec::new();
    for t in 0..20 {
        let n = rng.gen_range(4..12);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let vecs: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let z = field(&vecs);
        let argmax = (0..n).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
        let one = [
            diverse_sample_fg(&scores, &z, 1).unwrap(),
            topk_sample(&scores, 1).unwrap(),
            spatial_diverse_sample(&scores, 1, n, 1).unwrap(),
        ];
        if one.iter().any(|p| p != &vec![argmax]) {
            failures.push(format!("k=1 instance {t}"));
        }

        let mut axes: Vec<usize> = (0..n).collect();
        axes.shuffle(&mut rng);
        let ortho: Vec<Vec<f64>> =
            axes.iter().map(|&a| (0..n).map(|j| if j == a { 1.0 } else { 0.0 }).collect()).collect();
        if diverse_sample_fg(&scores, &field(&ortho), n).unwrap() != topk_sample(&scores, n).unwrap() {
            failures.push(format!("orthogonal instance {t}"));
        }

        // duplicate of the top location with a slightly lower score
        let mut dup_scores = scores.clone();
        let mut dup_vecs = vecs.clone();
        dup_scores.push(scores[argmax] * 0.999);
        dup_vecs.push(vecs[argmax].iter().map(|x| x * 2.0).collect());
        let picks = diverse_sample_fg(&dup_scores, &field(&dup_vecs), 2).unwrap();
        if picks[1] == n {
            failures.push(format!("duplicate instance {t}"));
        }

        let four_s: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..1.0)).collect();
        let four_v: Vec<Vec<f64>> = (0..4).map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let fz = field(&four_v);
        for k in 1..=4 {
            if diverse_sample_fg(&four_s, &fz, k).unwrap() != brute_fg(&four_s, &four_v, k) {
                failures.push(format!("4-point fg instance {t} k={k}"));
            }
        }
        let fg = vec![rng.gen_range(0..4)];
        for k in 1..=3 {
            if diverse_sample_bg(&fz, &fg, k).unwrap() != brute_bg(&four_v, &fg, k) {
                failures.push(format!("4-point bg instance {t} k={k}"));
            }
        }
    }

    // hand instances
    let hand = field(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
    if diverse_sample_fg(&[0.9, 0.8, 0.1], &hand, 2).unwrap() != vec![0, 2] {
        failures.push("hand duplicate".into());
    }
    let hand_bg = field(&[vec![1.0, 0.0], vec![0.6, 0.8], vec![0.0, 1.0], vec![0.8, 0.6]]);
    // objectives 0.6, 0, 0.8 pick location 2; then 1 and 3 tie at 0.8
    if diverse_sample_bg(&hand_bg, &[0], 2).unwrap() != vec![2, 1] {
        failures.push("hand background".into());
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() { "all oracle cases agree".into() } else { failures.join(", ") },
    )
}

fn weak_trend() -> Verdict {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| {
        let bench = WeakBench::prepare(&WeakConfig::default()).unwrap();
        let score = |mode, k| bench.evaluate(mode, k, None).unwrap().scores.mean_iou.unwrap();
        let diverse = score(SamplingMode::Diverse, 20);
        let topk = score(SamplingMode::TopK, 20);
        let single = score(SamplingMode::Diverse, 1);
        verdict(
            diverse >= topk && diverse >= single,
            format!("mIoU diverse k=20 {diverse:.4}, top-k k=20 {topk:.4}, k=1 {single:.4}"),
        )
    })
}

fn random_crf(rng: &mut ChaCha8Rng, n: usize, c: usize) -> (CrfModel, NodeFeatures) {
    let unary: Vec<Vec<f64>> = (0..n).map(|_| (0..c).map(|_| rng.gen_range(0.0..2.0)).collect()).collect();
    let kernels = vec![
        Kernel::new(rng.gen_range(0.0..1.0), 0, vec![1.0, 1.0]).unwrap(),
        Kernel::new(rng.gen_range(0.0..1.0), 2, vec![0.5]).unwrap(),
    ];
    let feats: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(0.0..2.0)).collect()).collect();
    (CrfModel::potts(&unary, kernels).unwrap(), NodeFeatures::new(&feats).unwrap())
}

fn crf_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_norm = 0.0f64;
    for _ in 0..20 {
        let (n, c) = (rng.gen_range(1..7), rng.gen_range(2..4));
        let (m, f) = random_crf(&mut rng, n, c);
        let t = gibbs_distribution_bruteforce(&m, &f).unwrap();
        worst_norm = worst_norm.max((t.probs.iter().sum::<f64>() - 1.0).abs());
    }

    // identical features make every kernel exactly 1
    let k2 = vec![Kernel::new(2.0, 0, vec![1.0]).unwrap()];
    let m2 = CrfModel::potts(&[vec![1.0, 2.0], vec![3.0, 0.5]], k2).unwrap();
    let f2 = NodeFeatures::new(&[vec![0.0], vec![0.0]]).unwrap();
    let e2: Vec<f64> = [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|x| gibbs_energy(x, &m2, &f2).unwrap()).collect();
    let hand2 = e2 == vec![4.0, 3.5, 7.0, 2.5];

    let k3 = vec![Kernel::new(1.0, 0, vec![1.0]).unwrap(), Kernel::new(0.5, 0, vec![4.0]).unwrap()];
    let m3 = CrfModel::potts(&[vec![0.0, 1.0], vec![2.0, 0.0], vec![1.0, 1.0]], k3).unwrap();
    let f3 = NodeFeatures::new(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
    // (0,1,0): unary 0 + 0 + 1, pairs (0,1) and (1,2) differ at 1.5 each
    let e010 = gibbs_energy(&[0, 1, 0], &m3, &f3).unwrap();
    let e111 = gibbs_energy(&[1, 1, 1], &m3, &f3).unwrap();
    let z_hand: f64 = (0..8usize)
        .map(|t| {
            let x = [t & 1, (t >> 1) & 1, (t >> 2) & 1];
            let u = [[0.0, 1.0], [2.0, 0.0], [1.0, 1.0]];
            let unary: f64 = (0..3).map(|i| u[i][x[i]]).sum();
            let cut = [(0, 1), (0, 2), (1, 2)].iter().filter(|(i, j)| x[*i] != x[*j]).count() as f64;
            (-(unary + 1.5 * cut)).exp()
        })
        .sum();
    let z3 = gibbs_distribution_bruteforce(&m3, &f3).unwrap().partition;
    let hand3 = e010 == 4.0 && e111 == 2.0 && (z3 - z_hand).abs() <= 1e-12 * z_hand;

    let cfg = MeanFieldConfig { iters: 30, damping: 0.5, mode: MeanFieldMode::Sequential };
    let (mut monotone, mut agree) = (0, 0);
    for _ in 0..100 {
        let c = rng.gen_range(2..4);
        let (m, f) = random_crf(&mut rng, 4, c);
        let state = mean_field_refine(&m, &f, &cfg).unwrap();
        if state.free_energy.windows(2).all(|w| w[1] <= w[0] + 1e-12) {
            monotone += 1;
        }
        let exact = gibbs_distribution_bruteforce(&m, &f).unwrap().map_labeling();
        let mf: Vec<usize> = map_labels(&state).into_iter().map(usize::from).collect();
        if mf == exact {
            agree += 1;
        }
    }
    verdict(
        worst_norm <= 1e-9 && hand2 && hand3 && monotone == 100 && agree >= 90,
        format!(
            "max |sum P - 1| {worst_norm:.1e}, hand 2-node {hand2}, hand 3-node {hand3}, free energy monotone {monotone}/100, MAP agreement {agree}/100"
        ),
    )
}

fn end_to_end() -> Verdict {
    let spec = SyntheticSpec { width: 128, height: 128, num_classes: 5, noise: 8.0, ..Default::default() };
    let train = generate(&spec, 100, 1).unwrap();
    let test = generate(&spec, 20, 2).unwrap();
    let cfg = PipelineConfig {
        k: 150,
        compactness: 10.0,
        levels: "local,proximal:2".into(),
        train: TrainConfig {
            learning_rate: 1e-3,
            epochs: 30,
            batch_size: 32,
            weight_decay: 1e-4,
            hidden: vec![32],
            ..Default::default()
        },
        crf: CrfSettings { enabled: true, ..Default::default() },
        ..Default::default()
    };
    let out = run_pipeline(&cfg, &train, &test).unwrap();
    let base = out.scores.mean_iou.unwrap();
    let crf = out.crf_scores.unwrap().mean_iou.unwrap();
    verdict(base >= 0.85 && crf >= base - 0.01, format!("test mIoU {base:.4}, with CRF {crf:.4}"))
}

fn format_fidelity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut ok = true;
    for _ in 0..10 {
        let (w, h) = (rng.gen_range(1..20), rng.gen_range(1..20));
        let img = RgbImage::new(w, h, (0..w * h * 3).map(|_| rng.gen()).collect()).unwrap();
        let bytes = encode_ppm(&img);
        ok &= decode_ppm(&bytes).unwrap() == img && encode_ppm(&decode_ppm(&bytes).unwrap()) == bytes;

        let max = if rng.gen_bool(0.5) { 255 } else { 65535 };
        let lm = LabelMap::new(w, h, (0..w * h).map(|_| rng.gen_range(0..=max)).collect()).unwrap();
        let bytes = encode_pgm(&lm);
        ok &= decode_pgm(&bytes).unwrap().data() == lm.data() && encode_pgm(&decode_pgm(&bytes).unwrap()) == bytes;

        let dims = vec![rng.gen_range(1..4), rng.gen_range(1..5), rng.gen_range(1..6)];
        let len = dims.iter().product();
        let t = Tensor::f32(dims.clone(), (0..len).map(|_| rng.gen_range(-1e6f32..1e6)).collect()).unwrap();
        let tb = t.to_bytes();
        ok &= Tensor::from_bytes(&tb).unwrap() == t && Tensor::from_bytes(&tb).unwrap().to_bytes() == tb;
        let u = Tensor::u32(dims, (0..len).map(|_| rng.gen()).collect()).unwrap();
        ok &= Tensor::from_bytes(&u.to_bytes()).unwrap() == u;

        let sizes = [rng.gen_range(1..6), rng.gen_range(1..6), rng.gen_range(2..5)];
        let mut model = MlpModel::new(&sizes, &mut rng).unwrap();
        let rows: Vec<Vec<f32>> = (0..5).map(|_| (0..sizes[0]).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        model.fit_normalization(&rows).unwrap();
        let mb = model_to_bytes(&model).unwrap();
        let back = model_from_bytes(&mb).unwrap();
        ok &= model_to_bytes(&back).unwrap() == mb;
        ok &= rows.iter().all(|r| back.logits(r).unwrap() == model.logits(r).unwrap());
    }
    let gt_vals: Vec<f32> = (0..64).map(|_| rng.gen_range(0.5..10.0)).collect();
    let gt = DepthMap::new(8, 8, gt_vals.clone()).unwrap();
    let pred = DepthMap::new(8, 8, gt_vals.iter().map(|v| 1.2 * v).collect()).unwrap();
    let d = depth_metrics(&pred, &gt, RelDenominator::Pred).unwrap();
    let depth_ok = d.delta_1 == 1.0 && (d.rmse_log - 0.18232).abs() <= 1e-4;
    verdict(ok && depth_ok, format!("round trips exact {ok}, delta_1 {}, rmse_log {:.5}", d.delta_1, d.rmse_log))
}

fn main() {
    let secs = Duration::from_secs_f64;
    let results = [
        run(1, "oracle labeling", Some(secs(1.0)), oracle_check),
        run(2, "slic quality", Some(secs(0.5)), slic_quality),
        run(3, "gradient oracles", Some(secs(5.0)), gradient_oracles),
        run(4, "loss identity", None, loss_identity),
        run(5, "diverse sampling oracles", None, sampling_oracles),
        run(6, "weak-supervision trend", Some(secs(180.0)), weak_trend),
        run(7, "crf oracles", None, crf_oracles),
        run(8, "end-to-end segmentation", Some(secs(120.0)), end_to_end),
        run(9, "format fidelity", None, format_fidelity),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
