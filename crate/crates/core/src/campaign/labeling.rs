use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::progress::{progress_view, ProgressView};
use super::session::{
    prompt_seed, prompt_token, IssuedPrompt, SessionEvent, LABELS_FILE, SESSIONS_FILE,
};
use super::{CampaignError, CampaignPool};
use crate::charts::DensityChartData;
use crate::features::KeyframeSet;
use crate::prompt::{
    baseline_prompt, consistency_feedback, next_prompt, DecisionKind, EngineConfig, PromptError,
    Score, SessionState,
};
use crate::store::{ExportFormat, JsonlFile, LabelLog, LabelStore, PreferenceLabel, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Baseline,
    #[default]
    Farpls,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CampaignOptions {
    pub mode: Mode,
    pub engine: EngineConfig,
}

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRef {
    pub id: String,
    pub frames_url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keyframes_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairKeyframes {
    pub left: KeyframeSet,
    pub right: KeyframeSet,
}

/// What a labeler is shown, with trajectories in presentation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptPayload {
    pub token: String,
    pub kind: DecisionKind,
    pub left: TrajectoryRef,
    pub right: TrajectoryRef,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keyframes: Option<PairKeyframes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charts: Option<Vec<DensityChartData>>,
    pub progress: ProgressView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckFeedback {
    pub consistent: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedback: Option<CheckFeedback>,
    pub progress: ProgressView,
}

enum Labels {
    Memory(LabelLog),
    Durable(LabelStore),
}

impl Labels {
    fn log(&self) -> &LabelLog {
        match self {
            Labels::Memory(log) => log,
            Labels::Durable(store) => store.log(),
        }
    }

    fn append(&mut self, label: PreferenceLabel) -> Result<(), StoreError> {
        match self {
            Labels::Memory(log) => log.append(label),
            Labels::Durable(store) => store.append(label),
        }
    }
}

#[derive(Debug, Clone)]
struct UserSession {
    state: SessionState,
    issued: Vec<IssuedPrompt>,
    outstanding: Option<IssuedPrompt>,
}

impl UserSession {
    fn new(user: &str) -> Self {
        Self {
            state: SessionState::new(user),
            issued: Vec::new(),
            outstanding: None,
        }
    }
}

pub struct Campaign {
    options: CampaignOptions,
    pool: Arc<CampaignPool>,
    labels: Labels,
    sessions_file: Option<JsonlFile>,
    users: BTreeMap<String, UserSession>,
    prompted: BTreeSet<String>,
    clock: Clock,
}

impl Campaign {
    pub fn in_memory(options: CampaignOptions, pool: Arc<CampaignPool>) -> Self {
        Self {
            options,
            pool,
            labels: Labels::Memory(LabelLog::new()),
            sessions_file: None,
            users: BTreeMap::new(),
            prompted: BTreeSet::new(),
            clock: Arc::new(Utc::now),
        }
    }

    /// Opens or resumes a campaign persisted under `dir`, replaying both logs.
    pub fn open(
        options: CampaignOptions,
        pool: Arc<CampaignPool>,
        dir: impl AsRef<Path>,
    ) -> Result<Self, CampaignError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(StoreError::from)?;
        let store = LabelStore::open(dir.join(LABELS_FILE))?;
        let (file, events) = JsonlFile::open::<SessionEvent>(dir.join(SESSIONS_FILE))?;
        let mut campaign = Self {
            options,
            pool,
            labels: Labels::Durable(store),
            sessions_file: Some(file),
            users: BTreeMap::new(),
            prompted: BTreeSet::new(),
            clock: Arc::new(Utc::now),
        };
        campaign.replay(events)?;
        Ok(campaign)
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    fn replay(&mut self, events: Vec<SessionEvent>) -> Result<(), CampaignError> {
        for event in events {
            match event {
                SessionEvent::Registered { user_id, .. } => {
                    self.users
                        .insert(user_id.clone(), UserSession::new(&user_id));
                }
                SessionEvent::Issued(p) => self
                    .users
                    .get_mut(&p.user_id)
                    .ok_or_else(|| {
                        CampaignError::ReplayMismatch(format!(
                            "prompt for unregistered user {}",
                            p.user_id
                        ))
                    })?
                    .issued
                    .push(p),
            }
        }
        let log = self.labels.log();
        if let Some(u) = log.users().find(|u| !self.users.contains_key(*u)) {
            return Err(CampaignError::ReplayMismatch(format!(
                "labels from unregistered user {u}"
            )));
        }
        let ctx = &self.pool.context;
        for (user, session) in &mut self.users {
            let labels: Vec<&PreferenceLabel> = log.user_labels(user).collect();
            if labels.len() > session.issued.len() || session.issued.len() > labels.len() + 1 {
                return Err(CampaignError::ReplayMismatch(format!(
                    "user {user} has {} prompts and {} labels",
                    session.issued.len(),
                    labels.len()
                )));
            }
            for (i, p) in session.issued.iter().enumerate() {
                session.state.record_issued(&p.decision(), ctx);
                if p.kind == DecisionKind::UniquePair {
                    self.prompted
                        .extend([p.pair.id_a().to_string(), p.pair.id_b().to_string()]);
                }
                match labels.get(i) {
                    Some(l)
                        if l.pair == p.pair
                            && l.is_check == (p.kind == DecisionKind::ConsistencyCheck) =>
                    {
                        session.state.record_label(&p.pair, p.kind)
                    }
                    Some(_) => {
                        return Err(CampaignError::ReplayMismatch(format!(
                            "label {i} of user {user} answers a different prompt"
                        )))
                    }
                    None => session.outstanding = Some(p.clone()),
                }
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> Mode {
        self.options.mode
    }

    pub fn options(&self) -> &CampaignOptions {
        &self.options
    }

    pub fn pool(&self) -> &Arc<CampaignPool> {
        &self.pool
    }

    pub fn log(&self) -> &LabelLog {
        self.labels.log()
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.users.keys().map(String::as_str)
    }

    pub fn session(&self, user: &str) -> Result<&SessionState, CampaignError> {
        Ok(&self.user(user)?.state)
    }

    /// Every prompt issued to `user`, in order.
    pub fn trace(&self, user: &str) -> Result<&[IssuedPrompt], CampaignError> {
        Ok(&self.user(user)?.issued)
    }

    fn user(&self, user: &str) -> Result<&UserSession, CampaignError> {
        self.users
            .get(user)
            .ok_or_else(|| CampaignError::UnknownUser(user.to_string()))
    }

    fn write_event(&mut self, event: &SessionEvent) -> Result<(), CampaignError> {
        if let Some(file) = &mut self.sessions_file {
            file.append(event)?;
        }
        Ok(())
    }

    /// Registers `requested` or a fresh id; registering a known id is a no-op.
    pub fn register(&mut self, requested: Option<&str>) -> Result<String, CampaignError> {
        let user_id = match requested {
            Some(id) if id.trim().is_empty() => {
                return Err(CampaignError::UnknownUser(id.to_string()))
            }
            Some(id) if self.users.contains_key(id) => return Ok(id.to_string()),
            Some(id) => id.to_string(),
            None => (self.users.len() + 1..)
                .map(|n| format!("user-{n:04}"))
                .find(|id| !self.users.contains_key(id))
                .expect("unbounded range"),
        };
        let at = (self.clock)();
        self.write_event(&SessionEvent::Registered {
            user_id: user_id.clone(),
            at,
        })?;
        self.users
            .insert(user_id.clone(), UserSession::new(&user_id));
        Ok(user_id)
    }

    pub fn progress(&self, user: &str) -> Result<ProgressView, CampaignError> {
        Ok(progress_view(&self.user(user)?.state, &self.options.engine))
    }

    /// The user's outstanding prompt, issuing a new one if none is pending.
    pub fn next(&mut self, user: &str) -> Result<PromptPayload, CampaignError> {
        let session = self.user(user)?;
        if let Some(p) = &session.outstanding {
            return self.payload(p);
        }
        let seq = session.issued.len() as u64;
        let seed = prompt_seed(self.options.engine.seed, user, seq);
        let snapshot = self.labels.log().snapshot(self.prompted.clone());
        let pool = Arc::clone(&self.pool);
        let ctx = &pool.context;
        let decided = match self.options.mode {
            Mode::Farpls => next_prompt(&session.state, &self.options.engine, ctx, &snapshot, seed),
            Mode::Baseline => {
                baseline_prompt(&session.state, &self.options.engine, ctx, &snapshot, seed)
            }
        };
        let decision = match decided {
            Ok(d) if d.kind != DecisionKind::Done => d,
            Ok(_) | Err(PromptError::NoCandidates(_)) => {
                return Err(CampaignError::CampaignComplete(user.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        let issued = IssuedPrompt {
            user_id: user.to_string(),
            seq,
            token: prompt_token(self.options.engine.seed, user, seq),
            kind: decision.kind,
            pair: decision.pair.clone().expect("non-done decision has a pair"),
            side_swap: decision.side_swap,
            stage: decision.stage,
            score: decision.score,
            candidates: decision.candidates,
            issued_at: (self.clock)(),
        };
        self.write_event(&SessionEvent::Issued(issued.clone()))?;
        if issued.kind == DecisionKind::UniquePair {
            self.prompted.extend([
                issued.pair.id_a().to_string(),
                issued.pair.id_b().to_string(),
            ]);
        }
        let session = self.users.get_mut(user).expect("checked above");
        session.state.record_issued(&decision, ctx);
        session.issued.push(issued.clone());
        session.outstanding = Some(issued.clone());
        self.payload(&issued)
    }

    fn payload(&self, p: &IssuedPrompt) -> Result<PromptPayload, CampaignError> {
        let (left, right) = p.pair.sides(p.side_swap);
        let farpls = self.options.mode == Mode::Farpls;
        let reference = |id: &str| TrajectoryRef {
            id: id.to_string(),
            frames_url: format!("/trajectories/{id}/frames"),
            keyframes_url: farpls.then(|| format!("/trajectories/{id}/keyframes")),
        };
        let (keyframes, charts) = if farpls {
            let kf =
                |id: &str| {
                    self.pool.keyframes.get(id).cloned().ok_or_else(|| {
                        CampaignError::Inconsistent(format!("no keyframes for {id}"))
                    })
                };
            (
                Some(PairKeyframes {
                    left: kf(left)?,
                    right: kf(right)?,
                }),
                Some(self.pool.charts.chart_payload(&p.pair)?),
            )
        } else {
            (None, None)
        };
        Ok(PromptPayload {
            token: p.token.clone(),
            kind: p.kind,
            left: reference(left),
            right: reference(right),
            keyframes,
            charts,
            progress: self.progress(&p.user_id)?,
        })
    }

    /// Accepts a score given in presentation frame (1 = left preferred) for the outstanding prompt.
    pub fn submit(
        &mut self,
        user: &str,
        token: &str,
        score: f64,
        view_ms: u64,
    ) -> Result<SubmitResponse, CampaignError> {
        let session = self.user(user)?;
        let p = match &session.outstanding {
            Some(p) if p.token == token => p.clone(),
            _ => return Err(CampaignError::StaleToken(user.to_string())),
        };
        let presented = Score::from_value(score).ok_or(CampaignError::InvalidScore(score))?;
        let is_check = p.kind == DecisionKind::ConsistencyCheck;
        let feedback = if is_check {
            let original = self
                .labels
                .log()
                .unique_label(user, &p.pair)
                .ok_or_else(|| {
                    CampaignError::ReplayMismatch(format!(
                        "check on {} without a unique label",
                        p.pair
                    ))
                })?
                .score;
            let (consistent, message) = consistency_feedback(original, presented, p.side_swap);
            Some(CheckFeedback {
                consistent,
                message: message.to_string(),
            })
        } else {
            None
        };
        let submitted_at = (self.clock)().max(p.issued_at);
        self.labels.append(PreferenceLabel {
            user_id: user.to_string(),
            pair: p.pair.clone(),
            score: presented.unswap(p.side_swap),
            side_swap: p.side_swap,
            is_check,
            issued_at: p.issued_at,
            submitted_at,
            view_ms,
        })?;
        let session = self.users.get_mut(user).expect("checked above");
        session.state.record_label(&p.pair, p.kind);
        session.outstanding = None;
        Ok(SubmitResponse {
            accepted: true,
            feedback,
            progress: self.progress(user)?,
        })
    }

    pub fn export(&self, format: ExportFormat) -> Vec<u8> {
        crate::store::export_labels(self.labels.log(), format)
    }
}
