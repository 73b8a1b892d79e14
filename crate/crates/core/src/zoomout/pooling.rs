use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::{FeatureMap, SuperpixelMap};

use super::region::Rect;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Upsample {
    #[default]
    Nearest,
    Bilinear,
}

impl FromStr for Upsample {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Upsample::Nearest),
            "bilinear" => Ok(Upsample::Bilinear),
            other => Err(Error::invalid(format!("unknown upsampling mode '{other}'"))),
        }
    }
}

/// Source coordinate and blend weight for bilinear sampling with
/// half-pixel centers (`align_corners = false`).
fn bilinear_source(i: usize, src: usize, dst: usize) -> (usize, usize, f64) {
    let pos = ((i as f64 + 0.5) * src as f64 / dst as f64 - 0.5).clamp(0.0, (src - 1) as f64);
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(src - 1);
    (lo, hi, pos - lo as f64)
}

/// Resizes a feature map to `height x width`.
///
/// Nearest mode samples source index `floor(i * src / dst)`.
pub fn upsample_featuremap(fm: &FeatureMap, height: usize, width: usize, mode: Upsample) -> FeatureMap {
    if fm.height() == height && fm.width() == width {
        return fm.clone();
    }
    let mut out = FeatureMap::zeros(fm.channels(), height, width).expect("nonzero extents");
    match mode {
        Upsample::Nearest => {
            for y in 0..height {
                let sy = y * fm.height() / height;
                for x in 0..width {
                    let sx = x * fm.width() / width;
                    for c in 0..fm.channels() {
                        out.set(c, y, x, fm.get(c, sy, sx));
                    }
                }
            }
        }
        Upsample::Bilinear => {
            for y in 0..height {
                let (y0, y1, ty) = bilinear_source(y, fm.height(), height);
                for x in 0..width {
                    let (x0, x1, tx) = bilinear_source(x, fm.width(), width);
                    for c in 0..fm.channels() {
                        let top = f64::from(fm.get(c, y0, x0)) * (1.0 - tx) + f64::from(fm.get(c, y0, x1)) * tx;
                        let bottom = f64::from(fm.get(c, y1, x0)) * (1.0 - tx) + f64::from(fm.get(c, y1, x1)) * tx;
                        out.set(c, y, x, (top * (1.0 - ty) + bottom * ty) as f32);
                    }
                }
            }
        }
    }
    out
}

/// Mean feature vector of every superpixel. Accumulates in f64, pixels in
/// row-major order.
pub fn pool_over_superpixels(fm: &FeatureMap, map: &SuperpixelMap) -> Result<Vec<Vec<f32>>> {
    if fm.height() != map.height() || fm.width() != map.width() {
        return Err(Error::shape(format!(
            "feature map is {}x{}, superpixel map is {}x{}",
            fm.height(),
            fm.width(),
            map.height(),
            map.width()
        )));
    }
    let k = map.num_superpixels();
    let hw = map.num_pixels();
    let mut sums = vec![vec![0.0f64; fm.channels()]; k];
    let sizes = map.sizes();
    for (p, &l) in map.labels().iter().enumerate() {
        let acc = &mut sums[l as usize];
        for (c, a) in acc.iter_mut().enumerate() {
            *a += f64::from(fm.data()[c * hw + p]);
        }
    }
    Ok(sums.into_iter().zip(sizes).map(|(s, n)| s.into_iter().map(|v| (v / n as f64) as f32).collect()).collect())
}

/// Mean feature vector inside a pixel rectangle.
pub fn pool_rect(fm: &FeatureMap, rect: Rect) -> Vec<f32> {
    let mut sums = vec![0.0f64; fm.channels()];
    for y in rect.y0..rect.y1 {
        for x in rect.x0..rect.x1 {
            for (c, s) in sums.iter_mut().enumerate() {
                *s += f64::from(fm.get(c, y, x));
            }
        }
    }
    let n = rect.area() as f64;
    sums.into_iter().map(|s| (s / n) as f32).collect()
}

/// Global channel means.
pub fn scene_pool(fm: &FeatureMap) -> Vec<f32> {
    pool_rect(fm, Rect { x0: 0, y0: 0, x1: fm.width(), y1: fm.height() })
}
