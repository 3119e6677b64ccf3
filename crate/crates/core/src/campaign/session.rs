use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::prompt::{DecisionKind, PairKey, PromptDecision, Stage};

pub const LABELS_FILE: &str = "labels.jsonl";
pub const SESSIONS_FILE: &str = "sessions.jsonl";

/// One issued prompt as written to the session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssuedPrompt {
    pub user_id: String,
    pub seq: u64,
    pub token: String,
    pub kind: DecisionKind,
    pub pair: PairKey,
    pub side_swap: bool,
    pub stage: Option<Stage>,
    pub score: Option<f64>,
    pub candidates: usize,
    pub issued_at: DateTime<Utc>,
}

impl IssuedPrompt {
    pub fn decision(&self) -> PromptDecision {
        PromptDecision {
            kind: self.kind,
            pair: Some(self.pair.clone()),
            side_swap: self.side_swap,
            step_advanced: self.kind == DecisionKind::ConsistencyCheck,
            stage: self.stage,
            score: self.score,
            candidates: self.candidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Registered { user_id: String, at: DateTime<Utc> },
    Issued(IssuedPrompt),
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, b| (h ^ *b as u64).wrapping_mul(FNV_PRIME))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable per-prompt seed from the campaign seed, user and prompt index.
pub(crate) fn prompt_seed(campaign_seed: u64, user: &str, seq: u64) -> u64 {
    splitmix(splitmix(campaign_seed ^ fnv1a(user.as_bytes())) ^ seq)
}

pub(crate) fn prompt_token(campaign_seed: u64, user: &str, seq: u64) -> String {
    let s = prompt_seed(campaign_seed, user, seq);
    format!(
        "{:016x}{:016x}",
        splitmix(s ^ 0x746f_6b65_6e00),
        splitmix(s ^ 0x6e6f_6e63_6500)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_by_user_and_sequence() {
        assert_eq!(prompt_seed(1, "a", 0), prompt_seed(1, "a", 0));
        assert_ne!(prompt_seed(1, "a", 0), prompt_seed(1, "b", 0));
        assert_ne!(prompt_seed(1, "a", 0), prompt_seed(1, "a", 1));
        assert_ne!(prompt_seed(1, "a", 0), prompt_seed(2, "a", 0));
        assert_eq!(prompt_token(1, "a", 3).len(), 32);
    }

    #[test]
    fn events_round_trip() {
        let e = SessionEvent::Issued(IssuedPrompt {
            user_id: "u".into(),
            seq: 0,
            token: prompt_token(0, "u", 0),
            kind: DecisionKind::UniquePair,
            pair: PairKey::new("b", "a").unwrap(),
            side_swap: false,
            stage: Some(Stage::Initial),
            score: Some(0.75),
            candidates: 12,
            issued_at: DateTime::from_timestamp(0, 0).unwrap(),
        });
        let line = serde_json::to_string(&e).unwrap();
        assert!(line.starts_with(r#"{"event":"issued""#));
        assert_eq!(serde_json::from_str::<SessionEvent>(&line).unwrap(), e);
    }
}
