use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_criterion_series, dtw_distance, ChannelStats, CriterionSeries, SimilarityError};
use crate::features::FeatureSeries;

/// Symmetric n×n distance matrix stored row-major, indexed by trajectory id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(ids: Vec<String>) -> Self {
        let n = ids.len();
        Self {
            ids,
            values: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from the upper-triangle function `f(i, j)`, `i < j`.
    pub fn from_fn(ids: Vec<String>, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let n = ids.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let upper: Vec<f64> = pairs.par_iter().map(|&(i, j)| f(i, j)).collect();
        let mut m = Self::zeros(ids);
        for (&(i, j), d) in pairs.iter().zip(upper) {
            m.values[i * n + j] = d;
            m.values[j * n + i] = d;
        }
        m
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionWeights {
    pub safety: f64,
    pub efficiency: f64,
    pub task_quality: f64,
}

impl Default for CriterionWeights {
    fn default() -> Self {
        Self {
            safety: 1.0,
            efficiency: 1.0,
            task_quality: 1.0,
        }
    }
}

impl CriterionWeights {
    fn check(&self) -> Result<f64, SimilarityError> {
        let w = [self.safety, self.efficiency, self.task_quality];
        let sum: f64 = w.iter().sum();
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || sum <= 0.0 {
            return Err(SimilarityError::ZeroWeightSum);
        }
        Ok(sum)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrices {
    pub safety: DistanceMatrix,
    pub efficiency: DistanceMatrix,
    pub task_quality: DistanceMatrix,
    pub combined: DistanceMatrix,
    pub weights: CriterionWeights,
}

/// Weighted mean of the three per-criterion matrices.
pub fn combine_matrices(
    safety: &DistanceMatrix,
    efficiency: &DistanceMatrix,
    task_quality: &DistanceMatrix,
    weights: CriterionWeights,
) -> Result<DistanceMatrix, SimilarityError> {
    let sum = weights.check()?;
    if safety.ids != efficiency.ids || safety.ids != task_quality.ids {
        return Err(SimilarityError::SizeMismatch(
            "criterion matrices index different ids".into(),
        ));
    }
    let values = safety
        .values
        .iter()
        .zip(&efficiency.values)
        .zip(&task_quality.values)
        .map(|((s, e), t)| {
            (weights.safety * s + weights.efficiency * e + weights.task_quality * t) / sum
        })
        .collect();
    Ok(DistanceMatrix {
        ids: safety.ids.clone(),
        values,
    })
}

pub fn combined_distance_matrix(
    ids: &[String],
    series: &[CriterionSeries],
    weights: CriterionWeights,
) -> Result<DistanceMatrices, SimilarityError> {
    weights.check()?;
    if ids.len() != series.len() {
        return Err(SimilarityError::SizeMismatch(format!(
            "{} ids for {} series",
            ids.len(),
            series.len()
        )));
    }
    if series.iter().any(CriterionSeries::is_empty) {
        return Err(SimilarityError::EmptySeries);
    }
    let per_criterion = |pick: fn(&CriterionSeries) -> &Vec<Vec<f64>>| {
        DistanceMatrix::from_fn(ids.to_vec(), |i, j| {
            dtw_distance(pick(&series[i]), pick(&series[j]))
                .expect("criterion series share dimensions")
        })
    };
    let safety = per_criterion(|c| &c.safety);
    let efficiency = per_criterion(|c| &c.efficiency);
    let task_quality = per_criterion(|c| &c.task_quality);
    let combined = combine_matrices(&safety, &efficiency, &task_quality, weights)?;
    Ok(DistanceMatrices {
        safety,
        efficiency,
        task_quality,
        combined,
        weights,
    })
}

/// Normalizes channels over the given series, builds criterion series and
/// fills all distance matrices. Returns the normalization stats alongside.
pub fn dataset_distance_matrices(
    ids: &[String],
    series: &[FeatureSeries],
    weights: CriterionWeights,
) -> Result<(DistanceMatrices, ChannelStats), SimilarityError> {
    let stats = ChannelStats::from_series(series);
    let criteria: Vec<CriterionSeries> = series
        .iter()
        .map(|s| build_criterion_series(s, &stats))
        .collect();
    Ok((combined_distance_matrix(ids, &criteria, weights)?, stats))
}
