//! Superpixel zoom-out semantic segmentation.
//!
//! The crate covers the whole desk-scale pipeline: SLIC oversegmentation,
//! zoom-out region features, softmax classifiers trained with a
//! class-rebalanced log-loss, weakly supervised point sampling from
//! localization score maps, fully connected CRF refinement, and
//! segmentation and depth metrics.

pub mod color;
pub mod crf;
pub mod error;
pub mod image;
pub mod io;
pub mod learner;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod slic;
pub mod synth;
pub mod weaksup;
pub mod zoomout;

pub use color::rgb_to_lab;
pub use error::{Error, Result};
pub use image::{DepthMap, FeatureMap, LabImage, LabelMap, RgbImage, SuperpixelMap};
pub use io::Tensor;
