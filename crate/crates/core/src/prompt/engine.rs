use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics_with, ComboAggregates};
use super::{
    rank_scores, CampaignSnapshot, Direction, PairKey, PoolContext, PromptError, METRIC_DIRECTIONS,
};

/// Whose prompts count toward cluster coverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageScope {
    #[default]
    Campaign,
    User,
}

/// The initial stage filters on cluster coverage; the second stage filters on label skewness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStageOmit {
    /// Rank on everything but the filtering metric.
    #[default]
    Coverage,
    /// Rank on everything but label skewness, as in the second stage.
    Skewness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub quota_unique: usize,
    pub first_check_after: usize,
    pub check_interval: usize,
    pub metric_directions: [Direction; 6],
    pub coverage_scope: CoverageScope,
    /// Metric left out of the initial-stage ranking.
    pub initial_stage_omit: InitialStageOmit,
    /// Keep only the least-labeled pairs among initial-stage candidates too.
    pub initial_stage_min_count: bool,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            quota_unique: 105,
            first_check_after: 15,
            check_interval: 10,
            metric_directions: METRIC_DIRECTIONS,
            coverage_scope: CoverageScope::Campaign,
            initial_stage_omit: InitialStageOmit::Coverage,
            initial_stage_min_count: true,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn total_checks(&self) -> usize {
        check_thresholds(self).len()
    }

    /// Total prompts in a complete session.
    pub fn session_length(&self) -> usize {
        self.quota_unique + self.total_checks()
    }
}

/// Unique-label counts after which a consistency check is due:
/// `first, first + interval, …` below the quota, then the quota itself.
pub fn check_thresholds(config: &EngineConfig) -> Vec<usize> {
    let q = config.quota_unique;
    if q == 0 {
        return Vec::new();
    }
    let mut out: Vec<usize> = (0..)
        .map(|i| config.first_check_after + i * config.check_interval.max(1))
        .take_while(|&t| t < q)
        .collect();
    out.push(q);
    out
}

/// Per-labeler progress through a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub user_id: String,
    pub prompted_pairs: Vec<PairKey>,
    pub labeled_pairs: BTreeSet<PairKey>,
    pub seen_clusters: BTreeSet<usize>,
    pub unique_count: usize,
    pub checks_issued: usize,
    pub checks_answered: usize,
}

impl SessionState {
    pub fn new(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            prompted_pairs: Vec::new(),
            labeled_pairs: BTreeSet::new(),
            seen_clusters: BTreeSet::new(),
            unique_count: 0,
            checks_issued: 0,
            checks_answered: 0,
        }
    }

    /// Current step, 1-based, capped at the number of checks.
    pub fn step_index(&self, config: &EngineConfig) -> usize {
        (self.checks_answered + 1).min(config.total_checks().max(1))
    }

    pub fn next_check_at(&self, config: &EngineConfig) -> Option<usize> {
        check_thresholds(config).get(self.checks_issued).copied()
    }

    pub fn is_complete(&self, config: &EngineConfig) -> bool {
        self.unique_count >= config.quota_unique && self.checks_answered >= config.total_checks()
    }

    pub fn record_issued(&mut self, decision: &PromptDecision, ctx: &PoolContext) {
        match (&decision.kind, &decision.pair) {
            (DecisionKind::UniquePair, Some(pair)) => {
                if let Ok((a, b)) = ctx.pair_clusters(pair) {
                    self.seen_clusters.extend([a, b]);
                }
                self.prompted_pairs.push(pair.clone());
            }
            (DecisionKind::ConsistencyCheck, Some(_)) => self.checks_issued += 1,
            _ => {}
        }
    }

    pub fn record_label(&mut self, pair: &PairKey, kind: DecisionKind) {
        match kind {
            DecisionKind::UniquePair => {
                if self.labeled_pairs.insert(pair.clone()) {
                    self.unique_count += 1;
                }
            }
            DecisionKind::ConsistencyCheck => self.checks_answered += 1,
            DecisionKind::Done => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionKind {
    UniquePair,
    ConsistencyCheck,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Initial,
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptDecision {
    pub kind: DecisionKind,
    pub pair: Option<PairKey>,
    pub side_swap: bool,
    pub step_advanced: bool,
    pub stage: Option<Stage>,
    /// Final ranking score of the chosen unique pair.
    pub score: Option<f64>,
    pub candidates: usize,
}

impl PromptDecision {
    fn done() -> Self {
        Self {
            kind: DecisionKind::Done,
            pair: None,
            side_swap: false,
            step_advanced: false,
            stage: None,
            score: None,
            candidates: 0,
        }
    }
}

/// A due consistency check, or `Done` once the quota is met.
fn scheduled_decision(
    state: &SessionState,
    config: &EngineConfig,
    seed: u64,
) -> Option<PromptDecision> {
    if let Some(at) = state.next_check_at(config) {
        if state.unique_count >= at && !state.labeled_pairs.is_empty() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let i = rng.random_range(0..state.labeled_pairs.len());
            return Some(PromptDecision {
                kind: DecisionKind::ConsistencyCheck,
                pair: state.labeled_pairs.iter().nth(i).cloned(),
                side_swap: rng.random_bool(0.5),
                step_advanced: true,
                stage: None,
                score: None,
                candidates: state.labeled_pairs.len(),
            });
        }
    }
    (state.unique_count >= config.quota_unique).then(PromptDecision::done)
}

fn open_pairs<'a>(
    state: &SessionState,
    ctx: &'a PoolContext,
) -> Result<Vec<&'a PairKey>, PromptError> {
    let prompted: BTreeSet<&PairKey> = state.prompted_pairs.iter().collect();
    let open: Vec<&PairKey> = ctx
        .pairs()
        .iter()
        .filter(|p| !prompted.contains(p))
        .collect();
    if open.is_empty() {
        return Err(PromptError::NoCandidates(state.user_id.clone()));
    }
    Ok(open)
}

fn least_labeled<'a>(open: &[&'a PairKey], snapshot: &CampaignSnapshot) -> Vec<&'a PairKey> {
    let min = open
        .iter()
        .map(|p| snapshot.label_count(p))
        .min()
        .unwrap_or(0);
    open.iter()
        .copied()
        .filter(|p| snapshot.label_count(p) == min)
        .collect()
}

/// Control-condition prompting: same check schedule, unique pairs drawn uniformly
/// from this user's unprompted pairs with the fewest labels campaign-wide.
pub fn baseline_prompt(
    state: &SessionState,
    config: &EngineConfig,
    ctx: &PoolContext,
    snapshot: &CampaignSnapshot,
    seed: u64,
) -> Result<PromptDecision, PromptError> {
    if let Some(d) = scheduled_decision(state, config, seed) {
        return Ok(d);
    }
    let candidates = least_labeled(&open_pairs(state, ctx)?, snapshot);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = candidates[rng.random_range(0..candidates.len())];
    Ok(PromptDecision {
        kind: DecisionKind::UniquePair,
        pair: Some(pick.clone()),
        side_swap: false,
        step_advanced: false,
        stage: None,
        score: None,
        candidates: candidates.len(),
    })
}

pub fn next_prompt(
    state: &SessionState,
    config: &EngineConfig,
    ctx: &PoolContext,
    snapshot: &CampaignSnapshot,
    seed: u64,
) -> Result<PromptDecision, PromptError> {
    if let Some(d) = scheduled_decision(state, config, seed) {
        return Ok(d);
    }
    let open = open_pairs(state, ctx)?;
    let initial = !ctx.clusters().is_subset(&state.seen_clusters);
    let candidates: Vec<&PairKey> = if initial {
        let unseen = |p: &PairKey| {
            let (a, b) = ctx.pair_clusters(p).expect("pool pair");
            (
                !state.seen_clusters.contains(&a),
                !state.seen_clusters.contains(&b),
            )
        };
        let both: Vec<&PairKey> = open
            .iter()
            .copied()
            .filter(|p| unseen(p) == (true, true))
            .collect();
        let covering = if both.is_empty() {
            open.iter()
                .copied()
                .filter(|p| unseen(p) != (false, false))
                .collect()
        } else {
            both
        };
        if config.initial_stage_min_count {
            least_labeled(&covering, snapshot)
        } else {
            covering
        }
    } else {
        least_labeled(&open, snapshot)
    };

    let user_prompted: BTreeSet<String>;
    let coverage_set = match config.coverage_scope {
        CoverageScope::Campaign => &snapshot.prompted,
        CoverageScope::User => {
            user_prompted = state
                .prompted_pairs
                .iter()
                .flat_map(|p| [p.id_a().to_string(), p.id_b().to_string()])
                .collect();
            &user_prompted
        }
    };
    let agg = ComboAggregates::new(ctx, snapshot);
    let metrics = candidates
        .iter()
        .map(|p| metrics_with(p, ctx, snapshot, coverage_set, &agg).map(|m| m.to_array()))
        .collect::<Result<Vec<_>, _>>()?;

    let omit = match (initial, config.initial_stage_omit) {
        (true, InitialStageOmit::Coverage) => 0,
        _ => 5,
    };
    let mut total = vec![0.0; candidates.len()];
    for m in (0..6).filter(|&m| m != omit) {
        let column: Vec<f64> = metrics.iter().map(|row| row[m]).collect();
        for (t, s) in total
            .iter_mut()
            .zip(rank_scores(&column, config.metric_directions[m])?)
        {
            *t += s;
        }
    }
    let mut best = 0;
    for i in 1..total.len() {
        if total[i] > total[best] {
            best = i;
        }
    }
    Ok(PromptDecision {
        kind: DecisionKind::UniquePair,
        pair: Some(candidates[best].clone()),
        side_swap: false,
        step_advanced: false,
        stage: Some(if initial {
            Stage::Initial
        } else {
            Stage::Second
        }),
        score: Some(total[best] / 5.0),
        candidates: candidates.len(),
    })
}
