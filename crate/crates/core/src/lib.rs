//! Sparse clustering with the deterministic information bottleneck.
//!
//! The pipeline builds a kernel similarity matrix over the observed points,
//! clusters it by trading `H(T)` against `β I(Y;T)` with a hard encoder, and
//! alternates that with feature-weight updates constrained to the nonnegative
//! part of the unit L2 ball intersected with an L1 budget.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the common double-precision instantiation.

pub mod datagen;
pub mod dib;
pub mod error;
pub mod info;
pub mod kmeans;
pub mod metrics;
pub mod scalar;
pub mod similarity;
pub mod sparse;

pub use datagen::{generate, Balance, LabeledDataset, MixtureSpec, Shape};
pub use dib::{
    assign_step, dib_score, mutual_information_yt, run_dib, update_cluster_model, ClusterModel,
    DibConfig, DibResult, Partition,
};
pub use error::{Error, Result};
pub use info::{
    entropy, kl_divergence, mutual_information, normalized_weight_entropy, DiscreteDistribution,
    JointDistribution,
};
pub use metrics::{
    adjusted_mutual_information, adjusted_rand_index, ami, ami_with, ari, contingency,
    expected_mutual_information, AmiNormalizer, ContingencyTable,
};
pub use scalar::Scalar;
pub use similarity::{
    default_bandwidths, normalize_columns, per_feature_similarity, weighted_log_scores,
    weighted_similarity, Bandwidths, DataMatrix, SimilarityMatrix, DEFAULT_FLOOR,
};
pub use sparse::{
    find_plateau, per_feature_mi_vector, project_dykstra, run_sparse_dib, run_sparse_dib_with,
    tune_sparsity, update_weights, warm_start_weights, DykstraProjection, Plateau, SparseDibConfig,
    SparseDibResult, TuningPoint, TuningTrajectory, WeightInit, WeightVector,
};

pub type DataMatrix64 = DataMatrix<f64>;
pub type Bandwidths64 = Bandwidths<f64>;
pub type SimilarityMatrix64 = SimilarityMatrix<f64>;
pub type ClusterModel64 = ClusterModel<f64>;
pub type DibResult64 = DibResult<f64>;
pub type WeightVector64 = WeightVector<f64>;
pub type SparseDibResult64 = SparseDibResult<f64>;
pub type TuningTrajectory64 = TuningTrajectory<f64>;
pub type DataMatrix32 = DataMatrix<f32>;
pub type SimilarityMatrix32 = SimilarityMatrix<f32>;
