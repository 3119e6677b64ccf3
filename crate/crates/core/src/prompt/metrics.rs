use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{PairKey, PromptError};
use crate::features::{FeatureStats, FeatureVector, FEATURE_COUNT};

pub const METRIC_NAMES: [&str; 6] = [
    "cluster_coverage",
    "combination_familiarity",
    "pair_similarity",
    "pair_disagreement",
    "cluster_disagreement",
    "label_skewness",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub cluster_coverage: f64,
    pub combination_familiarity: f64,
    /// Euclidean distance between the z-normalized feature vectors.
    pub pair_similarity: f64,
    pub pair_disagreement: f64,
    pub cluster_disagreement: f64,
    pub label_skewness: f64,
}

impl PairMetrics {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.cluster_coverage,
            self.combination_familiarity,
            self.pair_similarity,
            self.pair_disagreement,
            self.cluster_disagreement,
            self.label_skewness,
        ]
    }
}

/// Population variance; 0 for fewer than two values.
pub fn population_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Fixed facts about the labeling pool: cluster membership, pair geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolContext {
    ids: Vec<String>,
    cluster_of: BTreeMap<String, usize>,
    clusters: BTreeSet<usize>,
    cluster_sizes: BTreeMap<usize, usize>,
    pairs: Vec<PairKey>,
    combo_pairs: BTreeMap<(usize, usize), usize>,
    similarity: BTreeMap<PairKey, f64>,
}

impl PoolContext {
    /// `pool` lists (id, cluster, feature vector); vectors are z-normalized with `stats`.
    pub fn new(
        pool: &[(String, usize, FeatureVector)],
        stats: &FeatureStats,
    ) -> Result<Self, PromptError> {
        if pool.len() < 2 {
            return Err(PromptError::InvalidPool(
                "a pool needs at least two trajectories".into(),
            ));
        }
        let mut ids: Vec<String> = pool.iter().map(|(id, _, _)| id.clone()).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(PromptError::InvalidPool("duplicate trajectory id".into()));
        }
        let cluster_of: BTreeMap<String, usize> =
            pool.iter().map(|(id, c, _)| (id.clone(), *c)).collect();
        let z: BTreeMap<&str, [f64; FEATURE_COUNT]> = pool
            .iter()
            .map(|(id, _, v)| (id.as_str(), stats.z_normalize(v)))
            .collect();
        let mut cluster_sizes = BTreeMap::new();
        for c in cluster_of.values() {
            *cluster_sizes.entry(*c).or_insert(0) += 1;
        }
        let mut pairs = Vec::new();
        let mut combo_pairs = BTreeMap::new();
        let mut similarity = BTreeMap::new();
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                let key = PairKey::new(a.clone(), b.clone())?;
                let combo = combo(cluster_of[a], cluster_of[b]);
                *combo_pairs.entry(combo).or_insert(0) += 1;
                let d = z[a.as_str()]
                    .iter()
                    .zip(&z[b.as_str()])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                similarity.insert(key.clone(), d);
                pairs.push(key);
            }
        }
        Ok(Self {
            ids,
            clusters: cluster_of.values().copied().collect(),
            cluster_of,
            cluster_sizes,
            pairs,
            combo_pairs,
            similarity,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// All pool pairs in canonical order.
    pub fn pairs(&self) -> &[PairKey] {
        &self.pairs
    }

    /// Clusters with at least one pool trajectory.
    pub fn clusters(&self) -> &BTreeSet<usize> {
        &self.clusters
    }

    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.cluster_of.get(id).copied()
    }

    pub fn contains(&self, pair: &PairKey) -> bool {
        self.similarity.contains_key(pair)
    }

    pub fn pair_clusters(&self, pair: &PairKey) -> Result<(usize, usize), PromptError> {
        match (self.cluster_of(pair.id_a()), self.cluster_of(pair.id_b())) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(PromptError::UnknownPair(pair.clone())),
        }
    }

    pub fn combo_of(&self, pair: &PairKey) -> Result<(usize, usize), PromptError> {
        let (a, b) = self.pair_clusters(pair)?;
        Ok(combo(a, b))
    }
}

fn combo(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Campaign-wide label state the metrics are computed from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CampaignSnapshot {
    /// Canonical score values of every unique label per pair.
    pub pair_scores: BTreeMap<PairKey, Vec<f64>>,
    /// Trajectories that have appeared in any issued unique prompt.
    pub prompted: BTreeSet<String>,
}

impl CampaignSnapshot {
    pub fn label_count(&self, pair: &PairKey) -> usize {
        self.pair_scores.get(pair).map_or(0, Vec::len)
    }
}

/// Per-combination aggregates shared by all pairs in one metrics pass.
pub(crate) struct ComboAggregates {
    labeled_pairs: BTreeMap<(usize, usize), usize>,
    scores: BTreeMap<(usize, usize), Vec<f64>>,
}

impl ComboAggregates {
    pub(crate) fn new(ctx: &PoolContext, snapshot: &CampaignSnapshot) -> Self {
        let mut labeled_pairs = BTreeMap::new();
        let mut scores: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for (pair, s) in &snapshot.pair_scores {
            if s.is_empty() {
                continue;
            }
            if let Ok(c) = ctx.combo_of(pair) {
                *labeled_pairs.entry(c).or_insert(0) += 1;
                scores.entry(c).or_default().extend(s);
            }
        }
        Self {
            labeled_pairs,
            scores,
        }
    }
}

fn coverage(ctx: &PoolContext, prompted: &BTreeSet<String>, cluster: usize) -> f64 {
    let seen = prompted
        .iter()
        .filter(|id| ctx.cluster_of(id) == Some(cluster))
        .count();
    seen as f64 / ctx.cluster_sizes[&cluster] as f64
}

pub(crate) fn metrics_with(
    pair: &PairKey,
    ctx: &PoolContext,
    snapshot: &CampaignSnapshot,
    prompted: &BTreeSet<String>,
    agg: &ComboAggregates,
) -> Result<PairMetrics, PromptError> {
    let similarity = *ctx
        .similarity
        .get(pair)
        .ok_or_else(|| PromptError::UnknownPair(pair.clone()))?;
    let (ca, cb) = ctx.pair_clusters(pair)?;
    let c = combo(ca, cb);
    let scores = snapshot
        .pair_scores
        .get(pair)
        .map(Vec::as_slice)
        .unwrap_or(&[]);
    Ok(PairMetrics {
        cluster_coverage: (coverage(ctx, prompted, ca) + coverage(ctx, prompted, cb)) / 2.0,
        combination_familiarity: agg.labeled_pairs.get(&c).copied().unwrap_or(0) as f64
            / ctx.combo_pairs[&c] as f64,
        pair_similarity: similarity,
        pair_disagreement: population_variance(scores),
        cluster_disagreement: agg.scores.get(&c).map_or(0.0, |s| population_variance(s)),
        label_skewness: scores.len() as f64,
    })
}

/// Metrics of one pool pair with campaign-wide coverage.
pub fn compute_pair_metrics(
    pair: &PairKey,
    ctx: &PoolContext,
    snapshot: &CampaignSnapshot,
) -> Result<PairMetrics, PromptError> {
    metrics_with(
        pair,
        ctx,
        snapshot,
        &snapshot.prompted,
        &ComboAggregates::new(ctx, snapshot),
    )
}
