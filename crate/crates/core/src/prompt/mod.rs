//! Adaptive pair prompting: rank-scored pair metrics, the two-stage
//! selection strategy and the consistency-check schedule.

mod engine;
mod feedback;
mod metrics;
mod pair;
mod rank;

use thiserror::Error;

pub use engine::{
    baseline_prompt, check_thresholds, next_prompt, CoverageScope, DecisionKind, EngineConfig,
    InitialStageOmit, PromptDecision, SessionState, Stage,
};
pub use feedback::{consistency_feedback, CONSISTENT_MESSAGE, INCONSISTENT_MESSAGE};
pub use metrics::{
    compute_pair_metrics, population_variance, CampaignSnapshot, PairMetrics, PoolContext,
    METRIC_NAMES,
};
pub use pair::{PairKey, Score};
pub use rank::{rank_scores, Direction, METRIC_DIRECTIONS};

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("pair {0} is not in the pool")]
    UnknownPair(PairKey),
    #[error("empty input")]
    EmptyInput,
    #[error("no unprompted pairs left for user `{0}`")]
    NoCandidates(String),
    #[error("invalid pair: {0}")]
    InvalidPair(String),
    #[error("invalid pool: {0}")]
    InvalidPool(String),
}
