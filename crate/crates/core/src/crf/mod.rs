//! Fully connected pairwise CRF with Gaussian kernels: exact enumeration for
//! tiny instances and naive mean-field inference.

pub mod features;
pub mod meanfield;
pub mod model;

pub use features::{pixel_features, superpixel_features, KernelParams};
pub use meanfield::{free_energy, map_labels, mean_field_refine, MeanFieldConfig, MeanFieldMode, MeanFieldState};
pub use model::{
    gibbs_distribution_bruteforce, gibbs_energy, kernel_eval, pairwise_potential, CrfModel, GibbsTable, Kernel,
    NodeFeatures, MAX_ENUMERATION,
};
