use serde::{Deserialize, Serialize};

use crate::prompt::{EngineConfig, SessionState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepStatus {
    Incomplete,
    Active,
    Completed,
}

/// Stepper state shown to a labeler. Carries no pair counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgressView {
    pub step_index: usize,
    pub steps: Vec<StepStatus>,
    pub done: bool,
}

pub fn progress_view(state: &SessionState, config: &EngineConfig) -> ProgressView {
    let total = config.total_checks().max(1);
    let done = state.is_complete(config);
    let step_index = state.step_index(config);
    let steps = (1..=total)
        .map(|s| match s.cmp(&step_index) {
            _ if done => StepStatus::Completed,
            std::cmp::Ordering::Less => StepStatus::Completed,
            std::cmp::Ordering::Equal => StepStatus::Active,
            std::cmp::Ordering::Greater => StepStatus::Incomplete,
        })
        .collect();
    ProgressView {
        step_index,
        steps,
        done,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::{DecisionKind, PairKey};

    #[test]
    fn fresh_session_has_first_step_active() {
        let v = progress_view(&SessionState::new("u"), &EngineConfig::default());
        assert_eq!(v.step_index, 1);
        assert_eq!(v.steps.len(), 10);
        assert_eq!(v.steps[0], StepStatus::Active);
        assert!(v.steps[1..].iter().all(|s| *s == StepStatus::Incomplete));
        assert!(!v.done);
    }

    #[test]
    fn answered_checks_complete_steps() {
        let config = EngineConfig {
            quota_unique: 2,
            first_check_after: 1,
            check_interval: 1,
            ..Default::default()
        };
        let mut s = SessionState::new("u");
        let p = PairKey::new("a", "b").unwrap();
        s.record_label(&p, DecisionKind::UniquePair);
        s.record_label(&p, DecisionKind::ConsistencyCheck);
        let v = progress_view(&s, &config);
        assert_eq!(
            (v.step_index, v.steps.clone()),
            (2, vec![StepStatus::Completed, StepStatus::Active])
        );
        s.record_label(&PairKey::new("a", "c").unwrap(), DecisionKind::UniquePair);
        s.record_label(&p, DecisionKind::ConsistencyCheck);
        let v = progress_view(&s, &config);
        assert!(v.done);
        assert!(v.steps.iter().all(|s| *s == StepStatus::Completed));
    }

    #[test]
    fn serialized_view_has_no_counts() {
        let json = serde_json::to_value(progress_view(
            &SessionState::new("u"),
            &EngineConfig::default(),
        ))
        .unwrap();
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["done", "step_index", "steps"]);
    }
}
