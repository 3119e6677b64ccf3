//! Feature extraction: phase events, per-step feature channels, the
//! 17-entry scalar feature vector, keyframes and dataset statistics.

mod events;
mod export;
mod keyframes;
mod series;
mod stats;
mod vector;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trajectory::Trajectory;

pub use events::{detect_phase_events, PhaseEvents};
pub use export::{FeatureExport, TrajectoryFeatures};
pub use keyframes::{extract_keyframes, CollisionEvent, Keyframe, KeyframeSet};
pub use series::{eef_accelerations, extract_feature_series, FeatureSeries, CHANNEL_NAMES};
pub use stats::{dataset_feature_stats, FeatureStat, FeatureStats};
pub use vector::{extract_feature_vector, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("phase not found: {0}")]
    PhaseNotFound(&'static str),
    #[error("empty input")]
    EmptyInput,
}

/// Thresholds used by event detection, smoothness and keyframe windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Height (m) the can must rise above its initial height to count as lifted.
    pub lift_threshold: f64,
    /// Displacements shorter than this (m) have no direction and are skipped.
    pub min_displacement: f64,
    /// Half-width (s) of keyframe loop windows.
    pub loop_half_window: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            lift_threshold: 0.005,
            min_displacement: 1e-6,
            loop_half_window: 0.5,
        }
    }
}

/// Runs the full extraction for one trajectory.
pub fn extract_all(
    traj: &Trajectory,
    config: &FeatureConfig,
) -> Result<TrajectoryFeatures, FeatureError> {
    let events = detect_phase_events(traj, config)?;
    let series = extract_feature_series(traj, config);
    let vector = extract_feature_vector(traj, &series, &events);
    let keyframes = extract_keyframes(traj, &series, &events, config);
    Ok(TrajectoryFeatures {
        id: traj.id.clone(),
        events,
        vector,
        keyframes,
        series,
    })
}
