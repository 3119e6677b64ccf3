//! Core library for pairwise preference labeling of robot pick-and-place
//! trajectories.
//!
//! The pipeline runs from raw state logs to a labeling campaign:
//!
//! - [`trajectory`]: data model, file codec, validation, dataset filters
//! - [`features`]: phase events, per-step feature channels, scalar features, keyframes
//! - [`similarity`]: criterion series, DTW distance matrices, k-medoids, stratified pool sampling
//! - [`prompt`]: rank-scored pair metrics and the adaptive next-pair engine
//! - [`store`]: append-only label log, campaign statistics, exports
//! - [`charts`]: outlying-feature selection and density-chart payloads
//! - [`campaign`]: multi-user sessions binding engine, store and presentation
//! - [`simulate`]: synthetic labelers driving full campaigns
//! - [`pipeline`]: offline steps and artifact files from raw logs to a labeling pool

pub mod campaign;
pub mod charts;
pub mod features;
pub mod geometry;
pub mod pipeline;
pub mod prompt;
pub mod similarity;
pub mod simulate;
pub mod store;
pub mod synth;
pub mod trajectory;
