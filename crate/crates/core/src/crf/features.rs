use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::image::{LabImage, SuperpixelMap};

use super::model::{Kernel, NodeFeatures};

/// Appearance and smoothness kernel settings over `(x, y, L, a, b)` features.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelParams {
    pub w_appearance: f64,
    pub w_smooth: f64,
    /// Position bandwidth of the appearance kernel, in pixels.
    pub theta_alpha: f64,
    /// Color bandwidth of the appearance kernel, in Lab units.
    pub theta_beta: f64,
    /// Position bandwidth of the smoothness kernel, in pixels.
    pub theta_gamma: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self { w_appearance: 3.0, w_smooth: 1.0, theta_alpha: 10.0, theta_beta: 10.0, theta_gamma: 2.0 }
    }
}

impl KernelParams {
    /// Appearance kernel on all five dims, smoothness kernel on position only.
    pub fn kernels(&self) -> Result<Vec<Kernel>> {
        let pa = 1.0 / (self.theta_alpha * self.theta_alpha);
        let pb = 1.0 / (self.theta_beta * self.theta_beta);
        let pg = 1.0 / (self.theta_gamma * self.theta_gamma);
        Ok(vec![
            Kernel::new(self.w_appearance, 0, vec![pa, pa, pb, pb, pb])?,
            Kernel::new(self.w_smooth, 0, vec![pg, pg])?,
        ])
    }
}

/// `(x, y, L, a, b)` per pixel, positions at pixel centers.
pub fn pixel_features(lab: &LabImage) -> NodeFeatures {
    let w = lab.width();
    let data = (0..lab.num_pixels())
        .flat_map(|p| {
            let [l, a, b] = lab.at(p).map(f64::from);
            [(p % w) as f64 + 0.5, (p / w) as f64 + 0.5, l, a, b]
        })
        .collect();
    NodeFeatures::from_flat(5, data).expect("five dims per pixel")
}

/// `(x, y, L, a, b)` per superpixel: centroid and mean color.
pub fn superpixel_features(lab: &LabImage, map: &SuperpixelMap) -> NodeFeatures {
    let k = map.num_superpixels();
    let w = map.width();
    let mut sums = vec![[0.0f64; 5]; k];
    for (p, &s) in map.labels().iter().enumerate() {
        let [l, a, b] = lab.at(p).map(f64::from);
        let acc = &mut sums[s as usize];
        for (v, x) in acc.iter_mut().zip([(p % w) as f64 + 0.5, (p / w) as f64 + 0.5, l, a, b]) {
            *v += x;
        }
    }
    let data = sums.iter().zip(map.sizes()).flat_map(|(s, n)| s.map(|v| v / n as f64)).collect();
    NodeFeatures::from_flat(5, data).expect("five dims per superpixel")
}
