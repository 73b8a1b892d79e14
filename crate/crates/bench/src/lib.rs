//! Shared fixtures for the benchmarks in `benches/`.

use zok_core::slic::{run_slic, SlicParams};
use zok_core::synth::{generate, Sample, ShapeKind, SyntheticSpec};
use zok_core::SuperpixelMap;

/// One noisy blob image of the given size.
pub fn blob_sample(size: usize) -> Sample {
    let spec = SyntheticSpec {
        width: size,
        height: size,
        num_classes: 5,
        shape: ShapeKind::Blobs,
        noise: 6.0,
        ..SyntheticSpec::default()
    };
    generate(&spec, 1, 42).expect("valid spec").remove(0)
}

/// SLIC superpixels of `sample` with compactness 10.
pub fn superpixels(sample: &Sample, k: usize) -> SuperpixelMap {
    run_slic(&sample.image, &SlicParams::new(k, 10.0)).expect("k fits the image").map
}
