use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FeatureSeries, FeatureVector, KeyframeSet, PhaseEvents, CHANNEL_NAMES};

/// Everything extracted from one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFeatures {
    pub id: String,
    pub events: PhaseEvents,
    pub vector: FeatureVector,
    pub keyframes: KeyframeSet,
    pub series: FeatureSeries,
}

/// On-disk feature file for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureExport {
    pub id: String,
    pub events: PhaseEvents,
    pub scalars: FeatureVector,
    pub keyframes: KeyframeSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<BTreeMap<String, Vec<f64>>>,
}

impl FeatureExport {
    pub fn new(features: &TrajectoryFeatures, include_series: bool) -> Self {
        let series = include_series.then(|| {
            CHANNEL_NAMES
                .iter()
                .map(|n| n.to_string())
                .zip(features.series.channels())
                .collect()
        });
        Self {
            id: features.id.clone(),
            events: features.events,
            scalars: features.vector,
            keyframes: features.keyframes.clone(),
            series,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("feature export serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_all, FeatureConfig, FEATURE_NAMES};
    use crate::synth::TrajectorySynth;

    #[test]
    fn export_round_trips_and_uses_stable_names() {
        let t = TrajectorySynth::new(8).generate("e", &Default::default());
        let f = extract_all(&t, &FeatureConfig::default()).unwrap();
        for include in [false, true] {
            let e = FeatureExport::new(&f, include);
            let json = e.to_json();
            assert_eq!(FeatureExport::from_json(&json).unwrap(), e);
            let v: serde_json::Value = serde_json::from_str(&json).unwrap();
            for name in FEATURE_NAMES {
                assert!(v["scalars"][name].is_number(), "{name}");
            }
            assert_eq!(v.get("series").is_some(), include);
            if include {
                assert_eq!(v["series"].as_object().unwrap().len(), CHANNEL_NAMES.len());
            }
        }
    }
}
