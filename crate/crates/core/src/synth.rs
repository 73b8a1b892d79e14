//! Seeded synthetic segmentation datasets: flat-colored shapes with exact
//! ground truth, optionally with Gaussian pixel noise.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::color::lab_pixel_to_srgb;
use crate::error::{Error, Result};
use crate::image::{LabelMap, RgbImage};
use crate::io::{read_pgm, read_ppm, write_pgm, write_ppm};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    /// Four quadrants, quadrant `q` labeled `q mod C`.
    Quadrants,
    /// Class-0 background with elliptical blobs of classes `1..C`.
    #[default]
    Blobs,
    /// Vertical bands of random widths and classes.
    Stripes,
}

impl FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrants" => Ok(ShapeKind::Quadrants),
            "blobs" => Ok(ShapeKind::Blobs),
            "stripes" => Ok(ShapeKind::Stripes),
            other => Err(Error::invalid(format!("unknown shape kind '{other}'"))),
        }
    }
}

/// Well-separated Lab colors cycled over classes.
pub const DEFAULT_PALETTE: [[f64; 3]; 8] = [
    [55.0, 0.0, 0.0],
    [50.0, 60.0, 40.0],
    [75.0, -55.0, 50.0],
    [40.0, 20.0, -60.0],
    [85.0, -5.0, 75.0],
    [60.0, 55.0, -35.0],
    [30.0, -20.0, -10.0],
    [90.0, 0.0, 0.0],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub num_classes: usize,
    pub shape: ShapeKind,
    /// Lab color per class; empty selects [`DEFAULT_PALETTE`].
    pub colors: Vec<[f64; 3]>,
    /// Gaussian noise std per RGB channel, in 8-bit units.
    pub noise: f64,
    /// Upper bound on blobs per image.
    pub max_blobs: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            num_classes: 4,
            shape: ShapeKind::Blobs,
            colors: Vec::new(),
            noise: 0.0,
            max_blobs: 3,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::invalid("synthetic data needs at least two classes"));
        }
        if self.num_classes > 255 {
            return Err(Error::invalid("synthetic data supports at most 255 classes"));
        }
        if self.width < 2 || self.height < 2 {
            return Err(Error::invalid("synthetic images must be at least 2x2"));
        }
        if !self.colors.is_empty() && self.colors.len() != self.num_classes {
            return Err(Error::invalid("need one color per class"));
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(Error::invalid("noise must be finite and nonnegative"));
        }
        if self.shape == ShapeKind::Blobs && self.max_blobs == 0 {
            return Err(Error::invalid("blob images need max_blobs >= 1"));
        }
        Ok(())
    }

    pub fn color(&self, class: usize) -> [f64; 3] {
        if self.colors.is_empty() {
            DEFAULT_PALETTE[class % DEFAULT_PALETTE.len()]
        } else {
            self.colors[class]
        }
    }
}

/// One image with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub image: RgbImage,
    pub gt: LabelMap,
}

fn layout<R: Rng>(spec: &SyntheticSpec, rng: &mut R) -> Vec<u16> {
    let (w, h, c) = (spec.width, spec.height, spec.num_classes);
    match spec.shape {
        ShapeKind::Quadrants => (0..h)
            .flat_map(|y| (0..w).map(move |x| ((usize::from(y >= h / 2) * 2 + usize::from(x >= w / 2)) % c) as u16))
            .collect(),
        ShapeKind::Blobs => {
            let mut labels = vec![0u16; w * h];
            let count = rng.gen_range(1..=spec.max_blobs);
            let scale = w.min(h) as f64;
            for _ in 0..count {
                let class = rng.gen_range(1..c) as u16;
                let cx = rng.gen_range(0.15..0.85) * w as f64;
                let cy = rng.gen_range(0.15..0.85) * h as f64;
                let rx = rng.gen_range(0.1..0.25) * scale;
                let ry = rng.gen_range(0.1..0.25) * scale;
                for y in 0..h {
                    for x in 0..w {
                        let dx = (x as f64 + 0.5 - cx) / rx;
                        let dy = (y as f64 + 0.5 - cy) / ry;
                        if dx * dx + dy * dy <= 1.0 {
                            labels[y * w + x] = class;
                        }
                    }
                }
            }
            labels
        }
        ShapeKind::Stripes => {
            let mut bands = Vec::with_capacity(w);
            let mut prev = None;
            while bands.len() < w {
                let width = rng.gen_range((w / 8).max(1)..=(w / 3).max(1));
                let mut class = rng.gen_range(0..c) as u16;
                if prev == Some(class) {
                    class = (class + 1) % c as u16;
                }
                prev = Some(class);
                bands.extend(std::iter::repeat_n(class, width));
            }
            bands.truncate(w);
            (0..h).flat_map(|_| bands.iter().copied()).collect()
        }
    }
}

/// Paints class colors from `spec` over `labels`, adding pixel noise.
pub fn render<R: Rng>(spec: &SyntheticSpec, labels: &[u16], rng: &mut R) -> RgbImage {
    let palette: Vec<[u8; 3]> = (0..spec.num_classes).map(|c| lab_pixel_to_srgb(spec.color(c))).collect();
    let noise = (spec.noise > 0.0).then(|| Normal::new(0.0, spec.noise).expect("finite std"));
    let mut data = Vec::with_capacity(labels.len() * 3);
    for &l in labels {
        for v in palette[usize::from(l)] {
            let n = noise.as_ref().map_or(0.0, |d| d.sample(rng));
            data.push((f64::from(v) + n).round().clamp(0.0, 255.0) as u8);
        }
    }
    RgbImage::new(spec.width, spec.height, data).expect("consistent shape")
}

/// `count` samples from a single seeded stream.
pub fn generate(spec: &SyntheticSpec, count: usize, seed: u64) -> Result<Vec<Sample>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let labels = layout(spec, &mut rng);
            let image = render(spec, &labels, &mut rng);
            Ok(Sample { image, gt: LabelMap::new(spec.width, spec.height, labels)? })
        })
        .collect()
}

fn sample_paths(dir: &Path, index: usize) -> (PathBuf, PathBuf) {
    (dir.join(format!("img_{index:04}.ppm")), dir.join(format!("gt_{index:04}.pgm")))
}

/// Writes `img_NNNN.ppm` / `gt_NNNN.pgm` pairs into `dir`.
pub fn write_split(dir: impl AsRef<Path>, samples: &[Sample]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(Error::at_path(dir))?;
    for (i, s) in samples.iter().enumerate() {
        let (img, gt) = sample_paths(dir, i);
        write_ppm(&s.image, img)?;
        write_pgm(&s.gt, gt)?;
    }
    Ok(())
}

/// Reads every `img_NNNN.ppm` with its `gt_NNNN.pgm` from `dir`, in index order.
pub fn read_split(dir: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let dir = dir.as_ref();
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(Error::at_path(dir))?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.starts_with("img_") && n.ends_with(".ppm"))
        .collect();
    names.sort();
    names
        .iter()
        .map(|n| {
            let gt_name = format!("gt_{}.pgm", &n[4..n.len() - 4]);
            Ok(Sample { image: read_ppm(dir.join(n))?, gt: read_pgm(dir.join(gt_name))? })
        })
        .collect()
}

/// Writes `train/` and `test/` splits plus the generating spec as `spec.json`.
pub fn write_dataset(dir: impl AsRef<Path>, spec: &SyntheticSpec, train: &[Sample], test: &[Sample]) -> Result<()> {
    let dir = dir.as_ref();
    write_split(dir.join("train"), train)?;
    write_split(dir.join("test"), test)?;
    let json = serde_json::to_string_pretty(spec).map_err(|e| Error::format(e.to_string()))?;
    let path = dir.join("spec.json");
    fs::write(&path, json + "\n").map_err(Error::at_path(&path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrants_are_exact() {
        let spec = SyntheticSpec { width: 8, height: 6, shape: ShapeKind::Quadrants, ..Default::default() };
        let s = &generate(&spec, 1, 0).unwrap()[0];
        assert_eq!((s.gt.get(0, 0), s.gt.get(7, 0), s.gt.get(0, 5), s.gt.get(7, 5)), (0, 1, 2, 3));
        assert_eq!((s.gt.get(3, 2), s.gt.get(4, 2), s.gt.get(3, 3)), (0, 1, 2));
        // noiseless: every pixel of a class has the same color
        let c0 = s.image.pixel(0, 0);
        assert!((0..6).all(|y| (0..4).all(|x| y >= 3 || s.image.pixel(x, y) == c0)));
    }

    #[test]
    fn seeded_and_valid() {
        let spec = SyntheticSpec { noise: 8.0, ..Default::default() };
        let a = generate(&spec, 3, 11).unwrap();
        assert_eq!(a, generate(&spec, 3, 11).unwrap());
        assert_ne!(a, generate(&spec, 3, 12).unwrap());
        assert!(a.iter().all(|s| s.gt.data().iter().all(|&l| l < 4)));
        let stripes = SyntheticSpec { shape: ShapeKind::Stripes, ..Default::default() };
        let s = &generate(&stripes, 1, 2).unwrap()[0];
        assert!((0..64).all(|x| s.gt.get(x, 0) == s.gt.get(x, 63)));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SyntheticSpec { num_classes: 1, ..Default::default() }.validate().is_err());
        assert!(SyntheticSpec { colors: vec![[0.0; 3]], ..Default::default() }.validate().is_err());
        assert!(serde_json::from_str::<SyntheticSpec>("{\"sides\": 3}").is_err());
    }

    #[test]
    fn dataset_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec { width: 10, height: 7, ..Default::default() };
        let train = generate(&spec, 2, 1).unwrap();
        let test = generate(&spec, 1, 2).unwrap();
        write_dataset(dir.path(), &spec, &train, &test).unwrap();
        assert_eq!(read_split(dir.path().join("train")).unwrap(), train);
        assert_eq!(read_split(dir.path().join("test")).unwrap(), test);
        let back: SyntheticSpec =
            serde_json::from_str(&fs::read_to_string(dir.path().join("spec.json")).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
