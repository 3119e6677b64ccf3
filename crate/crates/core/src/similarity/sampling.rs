use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClusterAssignment, SimilarityError};
use crate::features::{dataset_feature_stats, FeatureVector};

/// Positive sampling weight per trajectory id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleWeights(pub BTreeMap<String, f64>);

impl SampleWeights {
    pub fn uniform<'a>(ids: impl IntoIterator<Item = &'a str>) -> Self {
        Self(ids.into_iter().map(|id| (id.to_string(), 1.0)).collect())
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.0.get(id).copied()
    }
}

/// Inverse local density in z-normalized feature space.
///
/// `density(i) = 1 / (1 + r_i)` with `r_i` the mean distance to the ⌈√n⌉
/// nearest neighbours, and `weight(i) = 1 / (1 + density(i))`, so isolated
/// trajectories weigh more than those in crowded regions.
pub fn sample_weights(
    ids: &[String],
    vectors: &[FeatureVector],
) -> Result<SampleWeights, SimilarityError> {
    if ids.len() != vectors.len() {
        return Err(SimilarityError::SizeMismatch(format!(
            "{} ids for {} vectors",
            ids.len(),
            vectors.len()
        )));
    }
    if ids.is_empty() {
        return Ok(SampleWeights(BTreeMap::new()));
    }
    let stats = dataset_feature_stats(vectors).expect("non-empty");
    let z: Vec<_> = vectors.iter().map(|v| stats.z_normalize(v)).collect();
    let n = z.len();
    let neighbours = ((n as f64).sqrt().ceil() as usize).min(n - 1);
    let weights = (0..n)
        .map(|i| {
            let mut dist: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    z[i].iter()
                        .zip(&z[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            dist.sort_by(f64::total_cmp);
            let r = if neighbours == 0 {
                0.0
            } else {
                dist[..neighbours].iter().sum::<f64>() / neighbours as f64
            };
            let density = 1.0 / (1.0 + r);
            (ids[i].clone(), 1.0 / (1.0 + density))
        })
        .collect();
    Ok(SampleWeights(weights))
}

/// Splits `m` across groups proportionally to `sizes`; leftover units go to
/// the largest fractional parts, lower index first on ties.
pub fn largest_remainder_quotas(sizes: &[usize], m: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return vec![0; sizes.len()];
    }
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| s * m / n).collect();
    let mut remainders: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| ((s * m) % n, i))
        .collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let left = m - quotas.iter().sum::<usize>();
    for &(_, i) in remainders.iter().take(left) {
        quotas[i] += 1;
    }
    quotas
}

/// Draws per-cluster quotas by weighted sampling without replacement.
/// Output follows the order of `ids`.
pub fn stratified_sample_weighted(
    ids: &[String],
    weights: &SampleWeights,
    clusters: &ClusterAssignment,
    m: usize,
    seed: u64,
) -> Result<Vec<String>, SimilarityError> {
    let n = ids.len();
    if m > n {
        return Err(SimilarityError::InvalidM { m, n });
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); clusters.k];
    for (i, id) in ids.iter().enumerate() {
        let c = clusters
            .label_of(id)
            .ok_or_else(|| SimilarityError::SizeMismatch(format!("`{id}` has no cluster")))?;
        members[c].push(i);
    }
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let quotas = largest_remainder_quotas(&sizes, m);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![false; n];
    for (group, &quota) in members.iter().zip(&quotas) {
        let w: Vec<f64> = group
            .iter()
            .map(|&i| {
                weights
                    .get(&ids[i])
                    .filter(|w| w.is_finite() && *w > 0.0)
                    .unwrap_or(1.0)
            })
            .collect();
        let picked = rand::seq::index::sample_weighted(&mut rng, group.len(), |j| w[j], quota)
            .expect("weights are positive and finite");
        for j in picked {
            chosen[group[j]] = true;
        }
    }
    Ok(ids
        .iter()
        .zip(chosen)
        .filter(|(_, c)| *c)
        .map(|(id, _)| id.clone())
        .collect())
}

pub fn stratified_sample(
    ids: &[String],
    vectors: &[FeatureVector],
    clusters: &ClusterAssignment,
    m: usize,
    seed: u64,
) -> Result<Vec<String>, SimilarityError> {
    let weights = sample_weights(ids, vectors)?;
    stratified_sample_weighted(ids, &weights, clusters, m, seed)
}
