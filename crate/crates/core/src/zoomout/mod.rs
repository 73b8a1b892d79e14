//! Zoom-out region features.
//!
//! A superpixel is described at several nested scales: its own pixels
//! (local), the superpixels a few hops away (proximal), the bounding box of
//! a larger hop ball (subscene) and the whole image (scene). The per-level
//! vectors are concatenated into one [`ZoomOutFeature`] row per superpixel.

mod adjacency;
mod local;
mod pooling;
mod region;

use std::fmt;
use std::str::FromStr;

pub use adjacency::{build_adjacency, neighbors_within_radius, AdjacencyGraph};
pub use local::{
    all_location_features, centroids, entropy, local_color_features, location_features, proximal_average, ColorBinner,
    COLOR_DIM, LOCATION_DIM,
};
pub use pooling::{pool_over_superpixels, pool_rect, scene_pool, upsample_featuremap, Upsample};
pub use region::{rect_regions, subscene_bbox, superpixel_bboxes, Rect};

use crate::error::{Error, Result};
use crate::image::{FeatureMap, LabImage, SuperpixelMap};
use crate::io::{matrix_tensor, Tensor};

pub const DEFAULT_PROXIMAL_RADIUS: usize = 2;
pub const DEFAULT_SUBSCENE_RADIUS: usize = 3;

/// One zoom-out level, or the rectangle-grid partition used in place of superpixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionSpec {
    Local,
    Proximal { radius: usize },
    Subscene { radius: usize },
    Scene,
    RectGrid { count: usize },
}

impl FromStr for RegionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => {
                let v: usize = a.parse().map_err(|_| Error::invalid(format!("bad level argument in '{s}'")))?;
                (n, Some(v))
            }
            None => (s, None),
        };
        let spec = match (name.trim(), arg) {
            ("local", None) => RegionSpec::Local,
            ("scene", None) => RegionSpec::Scene,
            ("proximal", r) => RegionSpec::Proximal { radius: r.unwrap_or(DEFAULT_PROXIMAL_RADIUS) },
            ("subscene", r) => RegionSpec::Subscene { radius: r.unwrap_or(DEFAULT_SUBSCENE_RADIUS) },
            ("rect", Some(count)) => RegionSpec::RectGrid { count },
            _ => return Err(Error::invalid(format!("unknown region level '{s}'"))),
        };
        match spec {
            RegionSpec::Proximal { radius: 0 } | RegionSpec::Subscene { radius: 0 } => {
                Err(Error::invalid(format!("radius in '{s}' must be at least 1")))
            }
            RegionSpec::RectGrid { count: 0 } => Err(Error::invalid("rectangle count must be at least 1")),
            ok => Ok(ok),
        }
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionSpec::Local => write!(f, "local"),
            RegionSpec::Proximal { radius } => write!(f, "proximal:{radius}"),
            RegionSpec::Subscene { radius } => write!(f, "subscene:{radius}"),
            RegionSpec::Scene => write!(f, "scene"),
            RegionSpec::RectGrid { count } => write!(f, "rect:{count}"),
        }
    }
}

/// Parses a comma-separated level list such as `local,proximal:2`.
pub fn parse_levels(s: &str) -> Result<Vec<RegionSpec>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| p.trim().parse()).collect()
}

/// Concatenated per-superpixel features with the start offset of every level.
#[derive(Clone, Debug, PartialEq)]
pub struct ZoomOutFeature {
    rows: Vec<Vec<f32>>,
    level_offsets: Vec<usize>,
    dim: usize,
}

impl ZoomOutFeature {
    pub fn rows(&self) -> &[Vec<f32>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<f32>> {
        self.rows
    }

    pub fn level_offsets(&self) -> &[usize] {
        &self.level_offsets
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_superpixels(&self) -> usize {
        self.rows.len()
    }

    /// Slice of superpixel `s` belonging to level `level`.
    pub fn level(&self, s: usize, level: usize) -> &[f32] {
        let start = self.level_offsets[level];
        let end = self.level_offsets.get(level + 1).copied().unwrap_or(self.dim);
        &self.rows[s][start..end]
    }

    pub fn to_tensor(&self) -> Result<Tensor> {
        matrix_tensor(&self.rows)
    }
}

/// Concatenates per-level feature rows in the given order.
pub fn concat_levels(levels: &[Vec<Vec<f32>>]) -> Result<ZoomOutFeature> {
    let first = levels.first().ok_or_else(|| Error::invalid("no levels to concatenate"))?;
    let n = first.len();
    let mut level_offsets = Vec::with_capacity(levels.len());
    let mut dim = 0;
    for (i, level) in levels.iter().enumerate() {
        if level.len() != n {
            return Err(Error::shape(format!("level {i} covers {} superpixels, level 0 covers {n}", level.len())));
        }
        let d = level.first().map_or(0, Vec::len);
        if d == 0 || level.iter().any(|r| r.len() != d) {
            return Err(Error::shape(format!("level {i} has empty or ragged rows")));
        }
        level_offsets.push(dim);
        dim += d;
    }
    let rows = (0..n).map(|s| levels.iter().flat_map(|l| l[s].iter().copied()).collect()).collect();
    Ok(ZoomOutFeature { rows, level_offsets, dim })
}

/// Element-wise maximum of features from an image and its mirror image.
pub fn mirror_max_fuse(orig: &ZoomOutFeature, mirror: &ZoomOutFeature) -> Result<ZoomOutFeature> {
    if orig.rows.len() != mirror.rows.len() || orig.level_offsets != mirror.level_offsets || orig.dim != mirror.dim {
        return Err(Error::shape("mirror features do not match original layout"));
    }
    let rows =
        orig.rows.iter().zip(&mirror.rows).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.max(*y)).collect()).collect();
    Ok(ZoomOutFeature { rows, level_offsets: orig.level_offsets.clone(), dim: orig.dim })
}

/// Builds zoom-out features for one image.
#[derive(Clone, Debug)]
pub struct ZoomOutExtractor {
    pub levels: Vec<RegionSpec>,
    /// Include the Lab histogram and location descriptors.
    pub handcrafted: bool,
    /// Fuse with features of the mirror image by element-wise max.
    pub mirror: bool,
    /// How an ingested dense feature map is brought to image resolution.
    pub upsample: Upsample,
}

impl Default for ZoomOutExtractor {
    fn default() -> Self {
        Self {
            levels: vec![RegionSpec::Local, RegionSpec::Proximal { radius: DEFAULT_PROXIMAL_RADIUS }],
            handcrafted: true,
            mirror: false,
            upsample: Upsample::Nearest,
        }
    }
}

impl ZoomOutExtractor {
    pub fn with_levels(levels: Vec<RegionSpec>) -> Self {
        Self { levels, ..Self::default() }
    }

    pub fn extract(&self, lab: &LabImage, map: &SuperpixelMap, featmap: Option<&FeatureMap>) -> Result<ZoomOutFeature> {
        if lab.width() != map.width() || lab.height() != map.height() {
            return Err(Error::shape("image and superpixel map sizes differ"));
        }
        if !self.handcrafted && featmap.is_none() {
            return Err(Error::invalid("no descriptors: hand-crafted features disabled and no feature map given"));
        }
        if self.levels.is_empty() {
            return Err(Error::invalid("at least one zoom-out level is required"));
        }
        let full = featmap.map(|fm| upsample_featuremap(fm, lab.height(), lab.width(), self.upsample));
        let features = self.extract_once(lab, map, full.as_ref())?;
        if !self.mirror {
            return Ok(features);
        }
        let mirrored =
            self.extract_once(&lab.mirrored(), &map.mirrored(), full.as_ref().map(FeatureMap::mirrored).as_ref())?;
        mirror_max_fuse(&features, &mirrored)
    }

    fn extract_once(&self, lab: &LabImage, map: &SuperpixelMap, fm: Option<&FeatureMap>) -> Result<ZoomOutFeature> {
        let binner = ColorBinner::new(lab);
        let needs_graph =
            self.levels.iter().any(|l| matches!(l, RegionSpec::Proximal { .. } | RegionSpec::Subscene { .. }));
        let graph = needs_graph.then(|| build_adjacency(map));

        let needs_local = self.levels.iter().any(|l| matches!(l, RegionSpec::Local | RegionSpec::Proximal { .. }));
        let local = if needs_local {
            let mut parts = Vec::new();
            if self.handcrafted {
                parts.push(local_color_features(lab, map));
                parts.push(all_location_features(map));
            }
            if let Some(fm) = fm {
                parts.push(pool_over_superpixels(fm, map)?);
            }
            concat_levels(&parts)?.into_rows()
        } else {
            Vec::new()
        };

        let describe_rect = |rect: Rect| -> Vec<f32> {
            let mut v = Vec::new();
            if self.handcrafted {
                v.extend(binner.describe_rect(lab, rect));
            }
            if let Some(fm) = fm {
                v.extend(pool_rect(fm, rect));
            }
            v
        };

        let mut levels = Vec::with_capacity(self.levels.len());
        for spec in &self.levels {
            let rows = match *spec {
                RegionSpec::Local => local.clone(),
                RegionSpec::Proximal { radius } => {
                    proximal_average(&local, graph.as_ref().expect("graph built"), radius)
                }
                RegionSpec::Subscene { radius } => {
                    let g = graph.as_ref().expect("graph built");
                    let boxes = superpixel_bboxes(map);
                    (0..map.num_superpixels()).map(|s| describe_rect(subscene_bbox(&boxes, g, s, radius))).collect()
                }
                RegionSpec::Scene => {
                    let whole = describe_rect(Rect { x0: 0, y0: 0, x1: lab.width(), y1: lab.height() });
                    vec![whole; map.num_superpixels()]
                }
                RegionSpec::RectGrid { .. } => {
                    return Err(Error::invalid("rect:N selects the base partition (see `rect`), not a zoom-out level"))
                }
            };
            levels.push(rows);
        }
        concat_levels(&levels)
    }
}
