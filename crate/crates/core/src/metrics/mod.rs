//! Segmentation and depth evaluation.

pub mod depth;
pub mod segmentation;

pub use depth::{depth_metrics, DepthScores, RelDenominator};
pub use segmentation::{
    boundary_recall, class_accuracy, confusion, iou_per_class, mean_iou, oracle_labels, paint_superpixels,
    pixel_accuracy, superpixel_majority, ConfusionMatrix, SegScores,
};
