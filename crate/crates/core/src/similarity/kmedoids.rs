use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DistanceMatrix, SimilarityError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub k: usize,
    pub seed: u64,
    /// Trajectory id to cluster index; cluster `c` is the one whose medoid is `medoids[c]`.
    pub labels: BTreeMap<String, usize>,
    /// Medoid ids sorted ascending.
    pub medoids: Vec<String>,
}

impl ClusterAssignment {
    pub fn label_of(&self, id: &str) -> Option<usize> {
        self.labels.get(id).copied()
    }

    pub fn members(&self, cluster: usize) -> Vec<&str> {
        self.labels
            .iter()
            .filter(|(_, &c)| c == cluster)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in self.labels.values() {
            sizes[c] += 1;
        }
        sizes
    }

    /// Sum of distances from each trajectory to its cluster medoid.
    pub fn cost(&self, d: &DistanceMatrix) -> f64 {
        self.labels
            .iter()
            .map(|(id, &c)| {
                d.get(
                    d.index_of(id).unwrap(),
                    d.index_of(&self.medoids[c]).unwrap(),
                )
            })
            .sum()
    }
}

fn total_cost(d: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..d.len())
        .map(|j| {
            medoids
                .iter()
                .map(|&m| d.get(m, j))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// k-medoids by PAM: greedy BUILD then steepest-descent SWAP until no swap
/// lowers the total cost. The seed fixes the order in which ties are broken.
pub fn cluster_dataset(
    d: &DistanceMatrix,
    k: usize,
    seed: u64,
) -> Result<ClusterAssignment, SimilarityError> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(SimilarityError::InvalidK { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut nearest = vec![f64::INFINITY; n];
    while medoids.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for &c in order.iter().filter(|c| !medoids.contains(c)) {
            // first pick minimizes total distance, later picks maximize the cost reduction
            let score: f64 = if medoids.is_empty() {
                -(0..n).map(|j| d.get(c, j)).sum::<f64>()
            } else {
                (0..n).map(|j| (nearest[j] - d.get(c, j)).max(0.0)).sum()
            };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((c, score));
            }
        }
        let (c, _) = best.expect("k ≤ n leaves a candidate");
        medoids.push(c);
        for (j, near) in nearest.iter_mut().enumerate() {
            *near = near.min(d.get(c, j));
        }
    }

    let mut cost = total_cost(d, &medoids);
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..k {
            for &o in order.iter().filter(|o| !medoids.contains(o)) {
                let mut trial = medoids.clone();
                trial[slot] = o;
                let c = total_cost(d, &trial);
                if c < best.map_or(cost, |b| b.2) {
                    best = Some((slot, o, c));
                }
            }
        }
        match best {
            Some((slot, o, c)) if c < cost - 1e-12 * cost.abs() => {
                medoids[slot] = o;
                cost = c;
            }
            _ => break,
        }
    }

    medoids.sort_by(|&a, &b| d.ids[a].cmp(&d.ids[b]));
    let labels = (0..n)
        .map(|j| {
            let c = match medoids.iter().position(|&m| m == j) {
                Some(own) => own,
                None => {
                    let mut best = 0;
                    for c in 1..k {
                        if d.get(medoids[c], j) < d.get(medoids[best], j) {
                            best = c;
                        }
                    }
                    best
                }
            };
            (d.ids[j].clone(), c)
        })
        .collect();
    Ok(ClusterAssignment {
        k,
        seed,
        labels,
        medoids: medoids.iter().map(|&m| d.ids[m].clone()).collect(),
    })
}
