//! Hand-crafted region descriptors: Lab color histograms and location.

use crate::image::{LabImage, SuperpixelMap};

use super::adjacency::{neighbors_within_radius, AdjacencyGraph};
use super::region::Rect;

const FINE_BINS: usize = 32;
const COARSE_BINS: usize = 8;
const BINS_PER_CHANNEL: usize = FINE_BINS + COARSE_BINS;
/// Histogram slots per pixel: three channels, fixed and adaptive binning.
const HIST_SLOTS: usize = 2 * 3 * BINS_PER_CHANNEL;

/// Length of [`local_color_features`] vectors: 120 fixed-bin histogram
/// values, 3 entropies, 120 adaptive-bin histogram values.
pub const COLOR_DIM: usize = 3 * BINS_PER_CHANNEL + 3 + 3 * BINS_PER_CHANNEL;
pub const LOCATION_DIM: usize = 4;

const RANGES: [(f32, f32); 3] = [(0.0, 100.0), (-110.0, 110.0), (-110.0, 110.0)];

fn fixed_bin(v: f32, (lo, hi): (f32, f32), bins: usize) -> usize {
    let t = ((v - lo) / (hi - lo) * bins as f32).floor();
    (t.max(0.0) as usize).min(bins - 1)
}

/// Bins a pixel into every histogram used by the color descriptor.
///
/// Adaptive bins use per-image channel quantiles as edges, so they adapt to
/// the color distribution of the image the descriptor is computed in.
pub struct ColorBinner {
    // interior edges per channel: [fine (31), coarse (7)]
    edges: [[Vec<f32>; 2]; 3],
}

impl ColorBinner {
    pub fn new(lab: &LabImage) -> Self {
        let edges = std::array::from_fn(|ch| {
            let mut values: Vec<f32> = lab.data().iter().skip(ch).step_by(3).copied().collect();
            values.sort_by(f32::total_cmp);
            let quantiles = |bins: usize| -> Vec<f32> { (1..bins).map(|j| values[j * values.len() / bins]).collect() };
            [quantiles(FINE_BINS), quantiles(COARSE_BINS)]
        });
        Self { edges }
    }

    /// Slot indices into a `HIST_SLOTS`-long count vector.
    fn slots(&self, lab: [f32; 3]) -> [usize; 12] {
        let mut out = [0usize; 12];
        for ch in 0..3 {
            let base = ch * BINS_PER_CHANNEL;
            out[4 * ch] = base + fixed_bin(lab[ch], RANGES[ch], FINE_BINS);
            out[4 * ch + 1] = base + FINE_BINS + fixed_bin(lab[ch], RANGES[ch], COARSE_BINS);
            let adaptive = 3 * BINS_PER_CHANNEL + base;
            let [fine, coarse] = &self.edges[ch];
            out[4 * ch + 2] = adaptive + fine.partition_point(|&e| e <= lab[ch]);
            out[4 * ch + 3] = adaptive + FINE_BINS + coarse.partition_point(|&e| e <= lab[ch]);
        }
        out
    }

    fn accumulate(&self, counts: &mut [u32], lab: [f32; 3]) {
        for s in self.slots(lab) {
            counts[s] += 1;
        }
    }

    /// Color descriptor of the pixels `indices` (row-major indices into `lab`).
    pub fn describe(&self, lab: &LabImage, indices: impl IntoIterator<Item = usize>) -> Vec<f32> {
        let mut counts = vec![0u32; HIST_SLOTS];
        let mut n = 0;
        for i in indices {
            self.accumulate(&mut counts, lab.at(i));
            n += 1;
        }
        descriptor_from_counts(&counts, n)
    }

    pub fn describe_rect(&self, lab: &LabImage, rect: Rect) -> Vec<f32> {
        let w = lab.width();
        self.describe(lab, (rect.y0..rect.y1).flat_map(|y| (rect.x0..rect.x1).map(move |x| y * w + x)))
    }
}

/// Natural-log entropy with `0 ln 0 = 0`.
pub fn entropy(p: &[f32]) -> f32 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| f64::from(v) * f64::from(v).ln()).sum::<f64>() as f32
}

fn descriptor_from_counts(counts: &[u32], n: usize) -> Vec<f32> {
    let norm = 1.0 / n.max(1) as f64;
    let hist: Vec<f32> = counts.iter().map(|&c| (f64::from(c) * norm) as f32).collect();
    let fixed = &hist[..3 * BINS_PER_CHANNEL];
    let adaptive = &hist[3 * BINS_PER_CHANNEL..];
    let mut out = Vec::with_capacity(COLOR_DIM);
    out.extend_from_slice(fixed);
    for ch in 0..3 {
        let start = ch * BINS_PER_CHANNEL;
        out.push(entropy(&fixed[start..start + FINE_BINS]));
    }
    out.extend_from_slice(adaptive);
    out
}

/// Per-superpixel color descriptor ([`COLOR_DIM`] values).
pub fn local_color_features(lab: &LabImage, map: &SuperpixelMap) -> Vec<Vec<f32>> {
    let binner = ColorBinner::new(lab);
    let k = map.num_superpixels();
    let mut counts = vec![0u32; k * HIST_SLOTS];
    for (p, &l) in map.labels().iter().enumerate() {
        let l = l as usize;
        binner.accumulate(&mut counts[l * HIST_SLOTS..(l + 1) * HIST_SLOTS], lab.at(p));
    }
    map.sizes()
        .into_iter()
        .enumerate()
        .map(|(s, n)| descriptor_from_counts(&counts[s * HIST_SLOTS..(s + 1) * HIST_SLOTS], n))
        .collect()
}

/// Centroid of every superpixel in continuous coordinates (pixel centers at `+0.5`).
pub fn centroids(map: &SuperpixelMap) -> Vec<(f64, f64)> {
    let w = map.width();
    let mut sums = vec![(0.0, 0.0); map.num_superpixels()];
    for (p, &l) in map.labels().iter().enumerate() {
        let s = &mut sums[l as usize];
        s.0 += (p % w) as f64 + 0.5;
        s.1 += (p / w) as f64 + 0.5;
    }
    sums.into_iter().zip(map.sizes()).map(|((sx, sy), n)| (sx / n as f64, sy / n as f64)).collect()
}

/// `[u, v, |u|, |v|]` where `(u, v)` is the centroid relative to the image
/// center, scaled so the image spans `[-1, 1]`.
pub fn location_features(map: &SuperpixelMap, s: usize) -> [f32; 4] {
    location_from_centroid(map, centroids(map)[s])
}

fn location_from_centroid(map: &SuperpixelMap, (cx, cy): (f64, f64)) -> [f32; 4] {
    let (hw, hh) = (map.width() as f64 / 2.0, map.height() as f64 / 2.0);
    let u = (cx - hw) / hw;
    let v = (cy - hh) / hh;
    [u as f32, v as f32, u.abs() as f32, v.abs() as f32]
}

pub fn all_location_features(map: &SuperpixelMap) -> Vec<Vec<f32>> {
    centroids(map).into_iter().map(|c| location_from_centroid(map, c).to_vec()).collect()
}

/// Unweighted mean of local vectors over each superpixel's hop ball.
pub fn proximal_average(local: &[Vec<f32>], g: &AdjacencyGraph, radius: usize) -> Vec<Vec<f32>> {
    (0..local.len())
        .map(|s| {
            let ball = neighbors_within_radius(g, s, radius);
            let dim = local[s].len();
            let mut acc = vec![0.0f64; dim];
            for &t in &ball {
                for (a, &v) in acc.iter_mut().zip(&local[t]) {
                    *a += f64::from(v);
                }
            }
            acc.into_iter().map(|a| (a / ball.len() as f64) as f32).collect()
        })
        .collect()
}
