use crate::error::{Error, Result};
use crate::image::FeatureMap;

/// Lower bound on the per-dimension standard deviation.
pub const STD_EPS: f64 = 1e-8;
/// Standardized vectors shorter than this are treated as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-6;

/// Per-dimension statistics over every location of a training set.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureStats {
    /// Population mean and std of all locations of all fields.
    pub fn fit(fields: &[FeatureMap]) -> Result<Self> {
        let first = fields.first().ok_or_else(|| Error::invalid("no feature fields to normalize"))?;
        let d = first.channels();
        if fields.iter().any(|f| f.channels() != d) {
            return Err(Error::shape("feature fields differ in channel count"));
        }
        let mut sum = vec![0.0f64; d];
        let mut count = 0usize;
        for f in fields {
            let hw = f.height() * f.width();
            for (c, s) in sum.iter_mut().enumerate() {
                *s += f.data()[c * hw..(c + 1) * hw].iter().map(|&v| f64::from(v)).sum::<f64>();
            }
            count += hw;
        }
        let n = count as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let mut var = vec![0.0f64; d];
        for f in fields {
            let hw = f.height() * f.width();
            for (c, v) in var.iter_mut().enumerate() {
                *v += f.data()[c * hw..(c + 1) * hw].iter().map(|&x| (f64::from(x) - mean[c]).powi(2)).sum::<f64>();
            }
        }
        let std = var.iter().map(|v| (v / n).sqrt().max(STD_EPS)).collect();
        Ok(Self { mean, std })
    }

    /// Standardizes then scales every location to unit norm.
    pub fn apply(&self, field: &FeatureMap) -> Result<NormalizedField> {
        let d = self.mean.len();
        if field.channels() != d {
            return Err(Error::shape(format!("field has {} channels, statistics {d}", field.channels())));
        }
        let (h, w) = (field.height(), field.width());
        let hw = h * w;
        let mut z = vec![0.0f32; hw * d];
        let mut valid = vec![false; hw];
        let mut v = vec![0.0f64; d];
        for i in 0..hw {
            for (c, x) in v.iter_mut().enumerate() {
                *x = (f64::from(field.data()[c * hw + i]) - self.mean[c]) / self.std[c];
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm >= DEGENERATE_NORM {
                valid[i] = true;
                z[i * d..(i + 1) * d].iter_mut().zip(&v).for_each(|(o, x)| *o = (x / norm) as f32);
            }
        }
        Ok(NormalizedField { height: h, width: w, dim: d, z, valid })
    }
}

/// Unit-norm feature vector per grid location, row-major. Degenerate
/// locations hold the zero vector and are marked invalid.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedField {
    pub height: usize,
    pub width: usize,
    pub dim: usize,
    z: Vec<f32>,
    valid: Vec<bool>,
}

impl NormalizedField {
    /// Builds a field from per-location vectors, normalizing each to unit norm.
    pub fn from_vectors(height: usize, width: usize, vectors: &[Vec<f32>]) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.len() != height * width || dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::shape("vectors must fill the grid with a shared nonzero dimension"));
        }
        let mut z = Vec::with_capacity(vectors.len() * dim);
        let mut valid = Vec::with_capacity(vectors.len());
        for v in vectors {
            let norm = v.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
            let ok = norm >= DEGENERATE_NORM;
            valid.push(ok);
            z.extend(v.iter().map(|&x| if ok { (f64::from(x) / norm) as f32 } else { 0.0 }));
        }
        Ok(Self { height, width, dim, z, valid })
    }

    pub fn len(&self) -> usize {
        self.valid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.z[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.valid[i]
    }

    /// `|z_i . z_j|`.
    pub fn abs_similarity(&self, i: usize, j: usize) -> f64 {
        self.vector(i).iter().zip(self.vector(j)).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum::<f64>().abs()
    }

    /// Channel-major `D x H x W` map of the normalized vectors.
    pub fn to_feature_map(&self) -> FeatureMap {
        let hw = self.len();
        let mut data = vec![0.0f32; self.dim * hw];
        for i in 0..hw {
            for (c, &v) in self.vector(i).iter().enumerate() {
                data[c * hw + i] = v;
            }
        }
        FeatureMap::new(self.dim, self.height, self.width, data).expect("consistent shape")
    }
}

/// Fits statistics on `fields` and normalizes each of them.
pub fn normalize_features(fields: &[FeatureMap]) -> Result<(Vec<NormalizedField>, FeatureStats)> {
    let stats = FeatureStats::fit(fields)?;
    let out = fields.iter().map(|f| stats.apply(f)).collect::<Result<_>>()?;
    Ok((out, stats))
}
