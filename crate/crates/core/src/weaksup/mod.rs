//! Weak supervision from image-level labels: localization scoring, feature
//! normalization and point sampling.

pub mod localizer;
pub mod normalize;
pub mod sampling;
pub mod scores;

pub use localizer::{localization_scores, train_localizer, LocalizerConfig, LocalizerOutcome};
pub use normalize::{normalize_features, FeatureStats, NormalizedField};
pub use sampling::{
    diverse_sample_bg, diverse_sample_fg, sample_points, spatial_diverse_sample, topk_sample, SampleSet, SamplingMode,
};
pub use scores::{
    global_softmax_prob, image_loss_and_grad, image_prob, logistic, pixel_softmax_prob, FieldGradient, LocalizerModel,
    ScoreField,
};
