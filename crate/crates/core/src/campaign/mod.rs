//! Multi-user labeling campaign: prompt issue, label submission, progress and replay.

mod labeling;
mod pool;
mod progress;
mod session;

use thiserror::Error;

pub use labeling::{
    Campaign, CampaignOptions, CheckFeedback, Clock, Mode, PairKeyframes, PromptPayload,
    SubmitResponse, TrajectoryRef,
};
pub use pool::CampaignPool;
pub use progress::{progress_view, ProgressView, StepStatus};
pub use session::{IssuedPrompt, SessionEvent, LABELS_FILE, SESSIONS_FILE};

use crate::charts::ChartError;
use crate::features::FeatureError;
use crate::prompt::PromptError;
use crate::store::StoreError;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("no further prompts for user {0}")]
    CampaignComplete(String),
    #[error("unknown user {0}")]
    UnknownUser(String),
    #[error("token does not match the outstanding prompt of user {0}")]
    StaleToken(String),
    #[error("score {0} is not one of 0, 0.5, 1")]
    InvalidScore(f64),
    #[error("inconsistent campaign inputs: {0}")]
    Inconsistent(String),
    #[error("session log does not match label log: {0}")]
    ReplayMismatch(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}
