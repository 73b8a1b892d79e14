use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zok_bench::{blob_sample, superpixels};
use zok_core::crf::{mean_field_refine, superpixel_features, CrfModel, KernelParams, MeanFieldConfig, MeanFieldMode};
use zok_core::learner::{train, Dataset, FrequencyBasis, TrainConfig};
use zok_core::rgb_to_lab;
use zok_core::slic::{run_slic, SlicParams};
use zok_core::weaksup::{diverse_sample_fg, spatial_diverse_sample, topk_sample, NormalizedField};
use zok_core::zoomout::ZoomOutExtractor;

fn slic(c: &mut Criterion) {
    let mut group = c.benchmark_group("slic");
    for size in [64, 128] {
        let sample = blob_sample(size);
        group.bench_with_input(BenchmarkId::from_parameter(size), &sample, |b, s| {
            b.iter(|| run_slic(black_box(&s.image), &SlicParams::new(size * size / 64, 10.0)).unwrap())
        });
    }
    group.finish();
}

fn zoomout(c: &mut Criterion) {
    let sample = blob_sample(128);
    let map = superpixels(&sample, 256);
    let lab = rgb_to_lab(&sample.image);
    let extractor =
        ZoomOutExtractor::with_levels(zok_core::zoomout::parse_levels("local,proximal:2,subscene:3,scene").unwrap());
    c.bench_function("zoomout/128px_256sp", |b| b.iter(|| extractor.extract(black_box(&lab), &map, None).unwrap()));
}

fn mean_field(c: &mut Criterion) {
    let sample = blob_sample(128);
    let map = superpixels(&sample, 256);
    let feats = superpixel_features(&rgb_to_lab(&sample.image), &map);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let probs: Vec<Vec<f64>> = (0..map.num_superpixels())
        .map(|_| {
            let raw: Vec<f64> = (0..5).map(|_| rng.gen_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / sum).collect()
        })
        .collect();
    let model =
        CrfModel::potts(&CrfModel::unary_from_probabilities(&probs, 1e-6), KernelParams::default().kernels().unwrap())
            .unwrap();
    let mut group = c.benchmark_group("mean_field");
    for mode in [MeanFieldMode::Parallel, MeanFieldMode::Sequential] {
        let cfg = MeanFieldConfig { iters: 10, damping: 0.5, mode };
        group.bench_function(format!("{mode:?}").to_lowercase(), |b| {
            b.iter(|| mean_field_refine(black_box(&model), &feats, &cfg).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let (h, w, d) = (32, 32, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let scores: Vec<f64> = (0..h * w).map(|_| rng.gen_range(-1.0..3.0)).collect();
    let vectors: Vec<Vec<f32>> = (0..h * w).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let z = NormalizedField::from_vectors(h, w, &vectors).unwrap();
    let mut group = c.benchmark_group("sampling_k20");
    group.bench_function("diverse", |b| b.iter(|| diverse_sample_fg(black_box(&scores), &z, 20).unwrap()));
    group.bench_function("topk", |b| b.iter(|| topk_sample(black_box(&scores), 20).unwrap()));
    group.bench_function("spatial", |b| b.iter(|| spatial_diverse_sample(black_box(&scores), h, w, 20).unwrap()));
    group.finish();
}

fn training(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let features: Vec<Vec<f32>> = (0..2000).map(|_| (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let labels: Vec<u16> = features.iter().map(|f| u16::from(f[0] > 0.0) + u16::from(f[1] > 0.5)).collect();
    let data = Dataset::new(features, labels, 3);
    let cfg =
        TrainConfig { learning_rate: 0.01, epochs: 1, batch_size: 64, hidden: vec![64], ..TrainConfig::default() };
    c.bench_function("train/2000x32_h64_epoch", |b| {
        b.iter(|| train(black_box(&data), &cfg, FrequencyBasis::Pixels).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = slic, zoomout, mean_field, sampling, training
}
criterion_main!(benches);
