use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ConsistencyRecord, PreferenceLabel, StoreError};
use crate::prompt::{population_variance, CampaignSnapshot, PairKey};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStatistics {
    /// Distinct users with a unique label on the pair.
    pub label_count: usize,
    pub score_variance: f64,
}

/// In-memory label sequence with indexes by pair and by user.
#[derive(Debug, Clone, Default)]
pub struct LabelLog {
    records: Vec<PreferenceLabel>,
    by_pair: BTreeMap<PairKey, Vec<usize>>,
    by_user: BTreeMap<String, Vec<usize>>,
    unique: BTreeMap<(String, PairKey), usize>,
    unique_scores: BTreeMap<PairKey, Vec<f64>>,
}

impl PartialEq for LabelLog {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}

impl LabelLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(
        records: impl IntoIterator<Item = PreferenceLabel>,
    ) -> Result<Self, StoreError> {
        let mut log = Self::new();
        for r in records {
            log.append(r)?;
        }
        Ok(log)
    }

    /// Checks that `label` could be appended without changing the log.
    pub fn validate(&self, label: &PreferenceLabel) -> Result<(), StoreError> {
        if label.submitted_at < label.issued_at {
            return Err(StoreError::InvalidTimestamps);
        }
        if !label.is_check
            && self
                .unique
                .contains_key(&(label.user_id.clone(), label.pair.clone()))
        {
            return Err(StoreError::DuplicateUniqueLabel {
                user: label.user_id.clone(),
                pair: label.pair.clone(),
            });
        }
        Ok(())
    }

    pub fn append(&mut self, label: PreferenceLabel) -> Result<(), StoreError> {
        self.validate(&label)?;
        let i = self.records.len();
        self.by_pair.entry(label.pair.clone()).or_default().push(i);
        self.by_user
            .entry(label.user_id.clone())
            .or_default()
            .push(i);
        if !label.is_check {
            self.unique
                .insert((label.user_id.clone(), label.pair.clone()), i);
            self.unique_scores
                .entry(label.pair.clone())
                .or_default()
                .push(label.score.value());
        }
        self.records.push(label);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[PreferenceLabel] {
        &self.records
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.by_user.keys().map(String::as_str)
    }

    pub fn user_labels(&self, user: &str) -> impl Iterator<Item = &PreferenceLabel> {
        self.by_user
            .get(user)
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    pub fn pair_labels(&self, pair: &PairKey) -> impl Iterator<Item = &PreferenceLabel> {
        self.by_pair
            .get(pair)
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    pub fn unique_label(&self, user: &str, pair: &PairKey) -> Option<&PreferenceLabel> {
        self.unique
            .get(&(user.to_string(), pair.clone()))
            .map(|&i| &self.records[i])
    }

    pub fn unique_count(&self) -> usize {
        self.unique.len()
    }

    pub fn check_count(&self) -> usize {
        self.records.len() - self.unique.len()
    }

    pub fn pair_statistics(&self, pair: &PairKey) -> PairStatistics {
        let scores = self
            .unique_scores
            .get(pair)
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        PairStatistics {
            label_count: scores.len(),
            score_variance: population_variance(scores),
        }
    }

    /// Unique-label scores per pair, for the prompt engine.
    pub fn pair_scores(&self) -> &BTreeMap<PairKey, Vec<f64>> {
        &self.unique_scores
    }

    /// Pooled variance of unique-label scores over pairs whose unordered
    /// cluster combination equals `combo`.
    pub fn cluster_combo_variance(
        &self,
        combo: (usize, usize),
        cluster_of: impl Fn(&str) -> Option<usize>,
    ) -> f64 {
        let want = (combo.0.min(combo.1), combo.0.max(combo.1));
        let mut pooled = Vec::new();
        for (pair, scores) in &self.unique_scores {
            if let (Some(a), Some(b)) = (cluster_of(pair.id_a()), cluster_of(pair.id_b())) {
                if (a.min(b), a.max(b)) == want {
                    pooled.extend(scores);
                }
            }
        }
        population_variance(&pooled)
    }

    pub fn consistency_records(&self, user: &str) -> Vec<ConsistencyRecord> {
        self.user_labels(user)
            .filter(|l| l.is_check)
            .filter_map(|check| {
                let original = self.unique_label(user, &check.pair)?;
                Some(ConsistencyRecord {
                    user_id: user.to_string(),
                    pair: check.pair.clone(),
                    original_score: original.score,
                    recheck_score: check.score,
                    consistent: original.score == check.score,
                })
            })
            .collect()
    }

    /// Fraction of consistent checks for `user`.
    pub fn consistency_score(&self, user: &str) -> Result<f64, StoreError> {
        let records = self.consistency_records(user);
        if records.is_empty() {
            return Err(StoreError::NoChecks(user.to_string()));
        }
        let consistent = records.iter().filter(|r| r.consistent).count();
        Ok(consistent as f64 / records.len() as f64)
    }

    pub fn total_view_ms(&self, user: &str) -> u64 {
        self.user_labels(user).map(|l| l.view_ms).sum()
    }

    pub fn snapshot(&self, prompted: BTreeSet<String>) -> CampaignSnapshot {
        CampaignSnapshot {
            pair_scores: self.unique_scores.clone(),
            prompted,
        }
    }
}
