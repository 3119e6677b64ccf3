use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::prompt::{PairKey, Score};

/// One pairwise judgment. `score` is in canonical orientation: 1 prefers
/// `pair.id_a`, 0 prefers `pair.id_b`, 0.5 is a tie.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceLabel {
    pub user_id: String,
    pub pair: PairKey,
    pub score: Score,
    pub side_swap: bool,
    pub is_check: bool,
    pub issued_at: DateTime<Utc>,
    pub submitted_at: DateTime<Utc>,
    /// Active viewing time reported by the client, loading excluded.
    pub view_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRecord {
    pub user_id: String,
    pub pair: PairKey,
    pub original_score: Score,
    /// Re-check answer in canonical orientation.
    pub recheck_score: Score,
    pub consistent: bool,
}
