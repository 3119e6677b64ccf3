use serde::{Deserialize, Serialize};

use crate::features::{FeatureSeries, CHANNEL_NAMES};

pub const SAFETY_DIM: usize = 7;
pub const EFFICIENCY_DIM: usize = 8;
pub const TASK_QUALITY_DIM: usize = 6;

/// Dataset-wide mean and population std of every feature channel, pooled over
/// all steps of all trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ChannelStats {
    pub fn from_series<'a>(series: impl IntoIterator<Item = &'a FeatureSeries>) -> Self {
        let c = CHANNEL_NAMES.len();
        let mut count = 0usize;
        let mut sum = vec![0.0; c];
        let all: Vec<Vec<Vec<f64>>> = series.into_iter().map(FeatureSeries::channels).collect();
        for channels in &all {
            count += channels[0].len();
            for (i, ch) in channels.iter().enumerate() {
                sum[i] += ch.iter().sum::<f64>();
            }
        }
        let n = count.max(1) as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let mut var = vec![0.0; c];
        let mut constant = vec![true; c];
        let first: Vec<Option<f64>> = (0..c)
            .map(|i| all.first().and_then(|ch| ch[i].first().copied()))
            .collect();
        for channels in &all {
            for (i, ch) in channels.iter().enumerate() {
                var[i] += ch.iter().map(|x| (x - mean[i]).powi(2)).sum::<f64>();
                constant[i] &= ch.iter().all(|x| Some(*x) == first[i]);
            }
        }
        Self {
            names: CHANNEL_NAMES.iter().map(|s| s.to_string()).collect(),
            mean,
            std: var
                .iter()
                .zip(&constant)
                .map(|(v, &k)| if k { 0.0 } else { (v / n).sqrt() })
                .collect(),
        }
    }

    fn normalize(&self, i: usize, x: f64) -> f64 {
        if self.std[i] > 0.0 {
            (x - self.mean[i]) / self.std[i]
        } else {
            0.0
        }
    }
}

/// Per-step criterion vectors; channel order follows [`CHANNEL_NAMES`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSeries {
    pub safety: Vec<Vec<f64>>,
    pub efficiency: Vec<Vec<f64>>,
    pub task_quality: Vec<Vec<f64>>,
}

impl CriterionSeries {
    pub fn len(&self) -> usize {
        self.safety.len()
    }

    pub fn is_empty(&self) -> bool {
        self.safety.is_empty()
    }

    /// Maps the normalized vectors back to raw channel values, channel-major.
    /// Channels with zero spread come back as their mean.
    pub fn denormalize(&self, stats: &ChannelStats) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.len()); CHANNEL_NAMES.len()];
        for t in 0..self.len() {
            let row = self.safety[t]
                .iter()
                .chain(&self.efficiency[t])
                .chain(&self.task_quality[t]);
            for (i, z) in row.enumerate() {
                out[i].push(z * stats.std[i] + stats.mean[i]);
            }
        }
        out
    }
}

pub fn build_criterion_series(series: &FeatureSeries, stats: &ChannelStats) -> CriterionSeries {
    let channels = series.channels();
    let steps = series.len();
    let rows = |range: std::ops::Range<usize>| -> Vec<Vec<f64>> {
        (0..steps)
            .map(|t| {
                range
                    .clone()
                    .map(|i| stats.normalize(i, channels[i][t]))
                    .collect()
            })
            .collect()
    };
    CriterionSeries {
        safety: rows(0..SAFETY_DIM),
        efficiency: rows(SAFETY_DIM..SAFETY_DIM + EFFICIENCY_DIM),
        task_quality: rows(SAFETY_DIM + EFFICIENCY_DIM..CHANNEL_NAMES.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_feature_series, FeatureConfig};
    use crate::synth::TrajectorySynth;

    fn dataset_series(n: usize) -> Vec<FeatureSeries> {
        TrajectorySynth::new(3)
            .generate_many(n, 30..=60)
            .iter()
            .map(|g| extract_feature_series(&g.trajectory, &FeatureConfig::default()))
            .collect()
    }

    #[test]
    fn criterion_vectors_have_fixed_dimensions() {
        let all = dataset_series(4);
        let stats = ChannelStats::from_series(&all);
        let c = build_criterion_series(&all[0], &stats);
        assert_eq!(c.len(), all[0].len());
        assert!(c.safety.iter().all(|v| v.len() == 7));
        assert!(c.efficiency.iter().all(|v| v.len() == 8));
        assert!(c.task_quality.iter().all(|v| v.len() == 6));
        assert_eq!(
            SAFETY_DIM + EFFICIENCY_DIM + TASK_QUALITY_DIM,
            CHANNEL_NAMES.len()
        );
    }

    #[test]
    fn constant_channel_normalizes_to_zeros() {
        let mut all = dataset_series(3);
        for s in &mut all {
            s.eef_force.iter_mut().for_each(|f| *f = 4.2);
        }
        let stats = ChannelStats::from_series(&all);
        assert_eq!(stats.std[6], 0.0);
        let c = build_criterion_series(&all[1], &stats);
        assert!(c.safety.iter().all(|v| v[6] == 0.0));
    }

    #[test]
    fn denormalize_round_trips() {
        let all = dataset_series(5);
        let stats = ChannelStats::from_series(&all);
        let c = build_criterion_series(&all[2], &stats);
        let raw = c.denormalize(&stats);
        let channels = all[2].channels();
        for t in 0..c.len() {
            let z: Vec<f64> = c.safety[t]
                .iter()
                .chain(&c.efficiency[t])
                .chain(&c.task_quality[t])
                .copied()
                .collect();
            for i in 0..z.len() {
                assert!((stats.normalize(i, raw[i][t]) - z[i]).abs() <= 1e-12);
                if stats.std[i] > 0.0 {
                    assert!(
                        (raw[i][t] - channels[i][t]).abs() <= 1e-12 * channels[i][t].abs().max(1.0)
                    );
                }
            }
        }
    }
}
