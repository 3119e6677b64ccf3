//! Outlying-feature selection and density chart payloads.

mod kde;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kde::{
    gaussian_kde, histogram_density, linear_grid, quantile, silverman_bandwidth, trapezoid,
    GRID_POINTS,
};

use crate::features::{FeatureStat, FeatureStats, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
use crate::prompt::PairKey;

/// Pools smaller than this get a histogram instead of a KDE.
pub const KDE_MIN_POOL: usize = 5;
const HISTOGRAM_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("every feature of {0} has zero spread over the pool")]
    AllDegenerate(String),
    #[error("trajectory {0} is not in the chart pool")]
    UnknownTrajectory(String),
    #[error("chart pool needs at least 2 trajectories, got {0}")]
    PoolTooSmall(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlyingFeature {
    pub trajectory_id: String,
    pub feature: String,
    pub index: usize,
    pub value: f64,
    pub z_score: f64,
    pub mean: f64,
    pub std: f64,
}

/// Feature with the largest |z|; features with σ = 0 are skipped and ties keep the earlier feature.
pub fn select_outlying_feature(
    id: &str,
    vector: &FeatureVector,
    stats: &FeatureStats,
) -> Result<OutlyingFeature, ChartError> {
    let values = vector.to_array();
    let mut best: Option<(usize, f64)> = None;
    for (i, stat) in stats.features.iter().enumerate() {
        if stat.std <= 0.0 {
            continue;
        }
        let z = (values[i] - stat.mean) / stat.std;
        if best.is_none_or(|(_, b)| z.abs() > b.abs()) {
            best = Some((i, z));
        }
    }
    let (index, z_score) = best.ok_or_else(|| ChartError::AllDegenerate(id.to_string()))?;
    let stat = stats.get(index);
    Ok(OutlyingFeature {
        trajectory_id: id.to_string(),
        feature: FEATURE_NAMES[index].to_string(),
        index,
        value: values[index],
        z_score,
        mean: stat.mean,
        std: stat.std,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineColor {
    Red,
    Blue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueLine {
    pub trajectory_id: String,
    pub color: LineColor,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityChartData {
    pub feature: String,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub mean_band: (f64, f64),
    pub value_lines: Vec<ValueLine>,
}

/// Grid, density and band for one feature, shared by every pair.
fn base_chart(feature: usize, column: &[f64], stat: &FeatureStat) -> DensityChartData {
    let pad = if stat.std > 0.0 { stat.std } else { 0.5 };
    let grid = linear_grid(stat.min - pad, stat.max + pad, GRID_POINTS);
    let raw = if column.len() < KDE_MIN_POOL {
        histogram_density(column, &grid, HISTOGRAM_BINS)
    } else {
        gaussian_kde(column, silverman_bandwidth(column), &grid)
    };
    // renormalize to the displayed range
    let mass = trapezoid(&grid, &raw);
    let density = if mass > 0.0 {
        raw.iter().map(|y| y / mass).collect()
    } else {
        raw
    };
    DensityChartData {
        feature: FEATURE_NAMES[feature].to_string(),
        grid,
        density,
        mean_band: (stat.mean - 0.5 * stat.std, stat.mean + 0.5 * stat.std),
        value_lines: Vec::new(),
    }
}

/// The trajectory pool that charts are drawn against.
#[derive(Debug, Clone)]
pub struct ChartPool {
    vectors: BTreeMap<String, FeatureVector>,
    stats: FeatureStats,
    bases: Vec<DensityChartData>,
}

impl ChartPool {
    pub fn new(
        vectors: BTreeMap<String, FeatureVector>,
        stats: FeatureStats,
    ) -> Result<Self, ChartError> {
        if vectors.len() < 2 {
            return Err(ChartError::PoolTooSmall(vectors.len()));
        }
        let arrays: Vec<[f64; FEATURE_COUNT]> =
            vectors.values().map(FeatureVector::to_array).collect();
        let bases = (0..FEATURE_COUNT)
            .map(|i| {
                let column: Vec<f64> = arrays.iter().map(|a| a[i]).collect();
                base_chart(i, &column, stats.get(i))
            })
            .collect();
        Ok(Self {
            vectors,
            stats,
            bases,
        })
    }

    pub fn stats(&self) -> &FeatureStats {
        &self.stats
    }

    pub fn vector(&self, id: &str) -> Result<&FeatureVector, ChartError> {
        self.vectors
            .get(id)
            .ok_or_else(|| ChartError::UnknownTrajectory(id.to_string()))
    }

    pub fn outlying_feature(&self, id: &str) -> Result<OutlyingFeature, ChartError> {
        select_outlying_feature(id, self.vector(id)?, &self.stats)
    }

    /// One chart per distinct outlying feature, in canonical pair order.
    pub fn chart_payload(&self, pair: &PairKey) -> Result<Vec<DensityChartData>, ChartError> {
        let a = self.outlying_feature(pair.id_a())?;
        let b = self.outlying_feature(pair.id_b())?;
        if a.index == b.index {
            let mut chart = self.bases[a.index].clone();
            chart.value_lines = vec![
                red(&a.trajectory_id, a.value),
                red(&b.trajectory_id, b.value),
            ];
            return Ok(vec![chart]);
        }
        let mut charts = Vec::with_capacity(2);
        for (own, partner) in [(&a, &b), (&b, &a)] {
            let mut chart = self.bases[own.index].clone();
            let partner_value = self.vector(&partner.trajectory_id)?.to_array()[own.index];
            chart.value_lines = vec![
                red(&own.trajectory_id, own.value),
                ValueLine {
                    trajectory_id: partner.trajectory_id.clone(),
                    color: LineColor::Blue,
                    value: partner_value,
                },
            ];
            charts.push(chart);
        }
        Ok(charts)
    }
}

fn red(id: &str, value: f64) -> ValueLine {
    ValueLine {
        trajectory_id: id.to_string(),
        color: LineColor::Red,
        value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::dataset_feature_stats;

    fn pool(rows: &[[f64; FEATURE_COUNT]]) -> ChartPool {
        let vectors: BTreeMap<String, FeatureVector> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (format!("t{i}"), FeatureVector::from_array(*r)))
            .collect();
        let stats = dataset_feature_stats(&vectors.values().copied().collect::<Vec<_>>()).unwrap();
        ChartPool::new(vectors, stats).unwrap()
    }

    /// Ten rows varying in every feature, then one row per outlier.
    fn rows_with(outliers: &[(usize, f64)]) -> Vec<[f64; FEATURE_COUNT]> {
        let mut rows: Vec<[f64; FEATURE_COUNT]> = (0..10)
            .map(|r| std::array::from_fn(|i| ((r * 7 + i * 3) % 10) as f64))
            .collect();
        for &(feature, value) in outliers {
            let mut row = [4.5; FEATURE_COUNT];
            row[feature] = value;
            rows.push(row);
        }
        rows
    }

    #[test]
    fn single_far_feature_is_selected() {
        let stats = dataset_feature_stats(&[
            FeatureVector::from_array([0.0; FEATURE_COUNT]),
            FeatureVector::from_array([2.0; FEATURE_COUNT]),
        ])
        .unwrap();
        let mut v = [1.0; FEATURE_COUNT];
        v[4] = 4.0;
        let o = select_outlying_feature("x", &FeatureVector::from_array(v), &stats).unwrap();
        assert_eq!((o.index, o.z_score), (4, 3.0));
        assert_eq!(o.feature, FEATURE_NAMES[4]);
    }

    #[test]
    fn mean_vector_picks_first_eligible_feature() {
        let mut lo = [1.0; FEATURE_COUNT];
        let mut hi = [1.0; FEATURE_COUNT];
        lo[2] = 0.0;
        hi[2] = 2.0;
        lo[9] = 0.0;
        hi[9] = 2.0;
        let stats =
            dataset_feature_stats(&[FeatureVector::from_array(lo), FeatureVector::from_array(hi)])
                .unwrap();
        let o = select_outlying_feature(
            "x",
            &FeatureVector::from_array([1.0; FEATURE_COUNT]),
            &stats,
        )
        .unwrap();
        assert_eq!((o.index, o.z_score), (2, 0.0));
    }

    #[test]
    fn all_degenerate_is_an_error() {
        let v = FeatureVector::from_array([1.0; FEATURE_COUNT]);
        let stats = dataset_feature_stats(&[v, v]).unwrap();
        assert_eq!(
            select_outlying_feature("x", &v, &stats),
            Err(ChartError::AllDegenerate("x".into()))
        );
    }

    #[test]
    fn distinct_outliers_give_two_charts() {
        let p = pool(&rows_with(&[(3, 40.0), (11, -30.0)]));
        let pair = PairKey::new("t10", "t11").unwrap();
        let charts = p.chart_payload(&pair).unwrap();
        assert_eq!(charts.len(), 2);
        assert_eq!(charts[0].feature, FEATURE_NAMES[3]);
        assert_eq!(charts[1].feature, FEATURE_NAMES[11]);
        for c in &charts {
            let colors: Vec<LineColor> = c.value_lines.iter().map(|l| l.color).collect();
            assert_eq!(colors, [LineColor::Red, LineColor::Blue]);
        }
        assert_eq!(charts[0].value_lines[0].value, 40.0);
        assert_eq!(charts[0].value_lines[1].value, 4.5);
    }

    #[test]
    fn shared_outlier_gives_one_chart_with_two_red_lines() {
        let p = pool(&rows_with(&[(6, 50.0), (6, -50.0)]));
        let charts = p
            .chart_payload(&PairKey::new("t10", "t11").unwrap())
            .unwrap();
        assert_eq!(charts.len(), 1);
        let lines = &charts[0].value_lines;
        assert!(lines.iter().all(|l| l.color == LineColor::Red));
        assert_eq!(
            lines.iter().map(|l| l.value).collect::<Vec<_>>(),
            [50.0, -50.0]
        );
    }

    #[test]
    fn charts_have_unit_mass_and_sigma_wide_band() {
        let p = pool(&rows_with(&[(0, 20.0)]));
        for (i, base) in p.bases.iter().enumerate() {
            assert_eq!(base.grid.len(), GRID_POINTS);
            assert!(base.grid.windows(2).all(|w| w[0] < w[1]));
            assert!(base.density.iter().all(|&d| d >= 0.0));
            assert!((trapezoid(&base.grid, &base.density) - 1.0).abs() <= 0.02);
            let width = base.mean_band.1 - base.mean_band.0;
            assert!((width - p.stats.get(i).std).abs() < 1e-12);
        }
    }

    #[test]
    fn small_pool_uses_histogram() {
        let p = pool(&rows_with(&[])[..3]);
        let b = &p.bases[1];
        assert!((trapezoid(&b.grid, &b.density) - 1.0).abs() <= 0.02);
    }

    #[test]
    fn unknown_trajectory_is_reported() {
        let p = pool(&rows_with(&[]));
        assert!(matches!(
            p.chart_payload(&PairKey::new("t0", "zz").unwrap()),
            Err(ChartError::UnknownTrajectory(_))
        ));
    }
}
