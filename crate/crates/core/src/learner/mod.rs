//! Softmax MLP classifiers trained with a class-balanced log loss and
//! momentum SGD.

pub mod loss;
pub mod mlp;
pub mod model_file;
pub mod train;

pub use loss::{
    asymmetric_loss, compute_class_frequencies, loss_gradient, sample_weights, symmetric_loss, ClassFrequencies,
    FrequencyBasis, LossKind,
};
pub use mlp::{argmax, softmax, ForwardTrace, Gradients, Layer, MlpModel};
pub use model_file::{model_from_bytes, model_to_bytes, read_model, write_model, MODEL_MAGIC};
pub use train::{predict_labels, predict_probabilities, sgd_step, train, Dataset, SgdState, TrainConfig, TrainOutcome};
