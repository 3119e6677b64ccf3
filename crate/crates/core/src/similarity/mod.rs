//! Criterion vector series, DTW distance matrices, k-medoids clustering and
//! stratified sampling of the labeling pool.

mod criterion;
mod distance;
mod dtw;
mod kmedoids;
mod sampling;

use thiserror::Error;

pub use criterion::{
    build_criterion_series, ChannelStats, CriterionSeries, EFFICIENCY_DIM, SAFETY_DIM,
    TASK_QUALITY_DIM,
};
pub use distance::{
    combine_matrices, combined_distance_matrix, dataset_distance_matrices, CriterionWeights,
    DistanceMatrices, DistanceMatrix,
};
pub use dtw::dtw_distance;
pub use kmedoids::{cluster_dataset, ClusterAssignment};
pub use sampling::{
    largest_remainder_quotas, sample_weights, stratified_sample, stratified_sample_weighted,
    SampleWeights,
};

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("vector dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("series must be non-empty")]
    EmptySeries,
    #[error("criterion weights must be non-negative and not all zero")]
    ZeroWeightSum,
    #[error("k = {k} is outside 1..={n}")]
    InvalidK { k: usize, n: usize },
    #[error("m = {m} is outside 0..={n}")]
    InvalidM { m: usize, n: usize },
    #[error("inputs disagree in size: {0}")]
    SizeMismatch(String),
}
