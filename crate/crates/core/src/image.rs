//! Raster types shared by every stage of the pipeline.
//!
//! All rasters are row-major. Pixel `(x, y)` lives at index `y * width + x`.

use crate::error::{Error, Result};

/// 8-bit sRGB image, interleaved `r, g, b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be at least 1x1"));
        }
        if data.len() != width * height * 3 {
            return Err(Error::shape(format!("rgb payload has {} bytes, expected {}", data.len(), width * height * 3)));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Left-right reflection.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                out.set_pixel(self.width - 1 - x, y, self.pixel(x, y));
            }
        }
        out
    }
}

/// CIELAB image, interleaved `L, a, b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl LabImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be at least 1x1"));
        }
        if data.len() != width * height * 3 {
            return Err(Error::shape(format!(
                "lab payload has {} values, expected {}",
                data.len(),
                width * height * 3
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        self.at(y * self.width + x)
    }

    /// Pixel by flat row-major index.
    pub fn at(&self, index: usize) -> [f32; 3] {
        let i = 3 * index;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn mirrored(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                data.extend_from_slice(&self.pixel(x, y));
            }
        }
        Self { width: self.width, height: self.height, data }
    }
}

/// Per-pixel class indices. `ignore` marks unlabeled pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    data: Vec<u16>,
    ignore: Option<u16>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("label map dimensions must be at least 1x1"));
        }
        if data.len() != width * height {
            return Err(Error::shape(format!("label payload has {} values, expected {}", data.len(), width * height)));
        }
        Ok(Self { width, height, data, ignore: None })
    }

    /// Builds a map from wide integers, rejecting values that do not fit 16 bits.
    pub fn try_from_u32(width: usize, height: usize, values: &[u32]) -> Result<Self> {
        let data = values
            .iter()
            .map(|&v| u16::try_from(v).map_err(|_| Error::invalid(format!("label {v} exceeds 16-bit range"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(width, height, data)
    }

    pub fn with_ignore(mut self, ignore: Option<u16>) -> Self {
        self.ignore = ignore;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u16] {
        &mut self.data
    }

    pub fn ignore(&self) -> Option<u16> {
        self.ignore
    }

    pub fn is_ignored(&self, value: u16) -> bool {
        self.ignore == Some(value)
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn same_shape<T: Raster>(&self, other: &T) -> bool {
        self.width == other.raster_width() && self.height == other.raster_height()
    }
}

/// Per-pixel depth in meters. Nonpositive (or non-finite) samples are holes.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("depth map dimensions must be at least 1x1"));
        }
        if data.len() != width * height {
            return Err(Error::shape(format!("depth payload has {} values, expected {}", data.len(), width * height)));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn is_valid(depth: f32) -> bool {
        depth.is_finite() && depth > 0.0
    }
}

/// Superpixel id per pixel, ids contiguous in `0..num_superpixels`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SuperpixelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: usize,
}

impl SuperpixelMap {
    /// Validates that every id in `0..max+1` occurs at least once.
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("superpixel map dimensions must be at least 1x1"));
        }
        if labels.len() != width * height {
            return Err(Error::shape(format!("superpixel map has {} ids, expected {}", labels.len(), width * height)));
        }
        let count = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut seen = vec![false; count];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::invalid(format!("superpixel ids are not contiguous: id {missing} has no pixels")));
        }
        Ok(Self { width, height, labels, count })
    }

    /// Renumbers arbitrary ids to `0..K` in order of first appearance.
    pub fn from_arbitrary(width: usize, height: usize, labels: &[u32]) -> Result<Self> {
        let mut remap = std::collections::HashMap::new();
        let compact = labels
            .iter()
            .map(|l| {
                let next = remap.len() as u32;
                *remap.entry(*l).or_insert(next)
            })
            .collect();
        Self::new(width, height, compact)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_pixels(&self) -> usize {
        self.labels.len()
    }

    pub fn num_superpixels(&self) -> usize {
        self.count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Pixel count of every superpixel.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.count];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Left-right reflection keeping ids, so superpixel `s` of the result is
    /// the mirror of superpixel `s` of `self`.
    pub fn mirrored(&self) -> Self {
        let mut labels = Vec::with_capacity(self.labels.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                labels.push(self.get(x, y));
            }
        }
        Self { width: self.width, height: self.height, labels, count: self.count }
    }
}

/// Dense multi-channel grid, channel-major (`C x H x W`).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 || width == 0 || height == 0 {
            return Err(Error::invalid("feature map extents must be at least 1"));
        }
        if data.len() != channels * height * width {
            return Err(Error::shape(format!(
                "feature map payload has {} values, expected {}",
                data.len(),
                channels * height * width
            )));
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(channels, height, width, vec![0.0; channels * height * width])
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f32) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    /// Feature vector at one location.
    pub fn vector(&self, y: usize, x: usize) -> Vec<f32> {
        (0..self.channels).map(|c| self.get(c, y, x)).collect()
    }

    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for c in 0..self.channels {
            for y in 0..self.height {
                for x in 0..self.width {
                    out.set(c, y, self.width - 1 - x, self.get(c, y, x));
                }
            }
        }
        out
    }
}

/// Anything with a 2-D pixel grid.
pub trait Raster {
    fn raster_width(&self) -> usize;
    fn raster_height(&self) -> usize;
}

macro_rules! impl_raster {
    ($($t:ty),*) => {$(
        impl Raster for $t {
            fn raster_width(&self) -> usize { self.width }
            fn raster_height(&self) -> usize { self.height }
        }
    )*};
}

impl_raster!(RgbImage, LabImage, LabelMap, DepthMap, SuperpixelMap, FeatureMap);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_payload() {
        assert!(RgbImage::new(2, 2, vec![0; 11]).is_err());
        assert!(RgbImage::new(0, 2, vec![]).is_err());
        assert!(LabelMap::new(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn label_out_of_u16_range() {
        let err = LabelMap::try_from_u32(1, 1, &[70000]).unwrap_err();
        assert!(err.to_string().contains("exceeds 16-bit"));
    }

    #[test]
    fn superpixel_ids_must_be_contiguous() {
        assert!(SuperpixelMap::new(3, 1, vec![0, 2, 2]).is_err());
        let sp = SuperpixelMap::from_arbitrary(3, 1, &[7, 2, 7]).unwrap();
        assert_eq!(sp.labels(), &[0, 1, 0]);
        assert_eq!(sp.sizes(), vec![2, 1]);
    }

    #[test]
    fn mirroring_twice_is_identity() {
        let img = RgbImage::new(3, 1, (0..9).collect()).unwrap();
        assert_eq!(img.mirrored().pixel(0, 0), [6, 7, 8]);
        assert_eq!(img.mirrored().mirrored(), img);
        let sp = SuperpixelMap::new(3, 1, vec![0, 1, 2]).unwrap();
        assert_eq!(sp.mirrored().labels(), &[2, 1, 0]);
    }
}
