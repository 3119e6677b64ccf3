use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-feature summary over a set of trajectories, in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub count: usize,
    pub features: Vec<FeatureStat>,
}

impl FeatureStats {
    pub fn get(&self, index: usize) -> &FeatureStat {
        &self.features[index]
    }

    pub fn by_name(&self, name: &str) -> Option<&FeatureStat> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| &self.features[i])
    }

    /// Z-scores of `v`; features with zero spread map to 0.
    pub fn z_normalize(&self, v: &FeatureVector) -> [f64; FEATURE_COUNT] {
        let a = v.to_array();
        std::array::from_fn(|i| {
            let s = &self.features[i];
            if s.std > 0.0 {
                (a[i] - s.mean) / s.std
            } else {
                0.0
            }
        })
    }
}

pub fn dataset_feature_stats(vectors: &[FeatureVector]) -> Result<FeatureStats, FeatureError> {
    if vectors.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let n = vectors.len() as f64;
    let arrays: Vec<[f64; FEATURE_COUNT]> = vectors.iter().map(FeatureVector::to_array).collect();
    let features = (0..FEATURE_COUNT)
        .map(|i| {
            let column = arrays.iter().map(|a| a[i]);
            let mean = column.clone().sum::<f64>() / n;
            let var = column.clone().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let min = column.clone().fold(f64::INFINITY, f64::min);
            let max = column.fold(f64::NEG_INFINITY, f64::max);
            // keep min ≤ μ ≤ max under rounding
            FeatureStat {
                mean: mean.clamp(min, max),
                std: if min == max { 0.0 } else { var.sqrt() },
                min,
                max,
            }
        })
        .collect();
    Ok(FeatureStats {
        count: vectors.len(),
        features,
    })
}
