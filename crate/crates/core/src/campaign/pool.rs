use std::collections::BTreeMap;

use super::CampaignError;
use crate::charts::ChartPool;
use crate::features::{dataset_feature_stats, FeatureExport, FeatureVector, KeyframeSet};
use crate::prompt::PoolContext;
use crate::similarity::ClusterAssignment;

/// Everything the campaign needs to know about the sampled trajectories.
#[derive(Debug, Clone)]
pub struct CampaignPool {
    pub ids: Vec<String>,
    pub context: PoolContext,
    pub charts: ChartPool,
    pub keyframes: BTreeMap<String, KeyframeSet>,
}

impl CampaignPool {
    pub fn new(
        ids: &[String],
        clusters: &ClusterAssignment,
        features: &BTreeMap<String, FeatureExport>,
    ) -> Result<Self, CampaignError> {
        let mut rows: Vec<(String, usize, FeatureVector)> = Vec::with_capacity(ids.len());
        let mut keyframes = BTreeMap::new();
        for id in ids {
            let f = features.get(id).ok_or_else(|| {
                CampaignError::Inconsistent(format!("no features for pool trajectory {id}"))
            })?;
            let cluster = clusters.label_of(id).ok_or_else(|| {
                CampaignError::Inconsistent(format!("pool trajectory {id} has no cluster label"))
            })?;
            rows.push((id.clone(), cluster, f.scalars));
            keyframes.insert(id.clone(), f.keyframes.clone());
        }
        let vectors: Vec<FeatureVector> = rows.iter().map(|r| r.2).collect();
        let stats = dataset_feature_stats(&vectors)?;
        let context = PoolContext::new(&rows, &stats)?;
        let charts = ChartPool::new(rows.iter().map(|r| (r.0.clone(), r.2)).collect(), stats)?;
        Ok(Self {
            ids: ids.to_vec(),
            context,
            charts,
            keyframes,
        })
    }
}
