//! HTTP routes over a shared campaign.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use farpls_core::campaign::{Campaign, CampaignError, CampaignPool};
use farpls_core::geometry::Vec3;
use farpls_core::pipeline::{load_features, load_trajectory, read_json, PipelineError, PoolFile};
use farpls_core::prompt::PairKey;
use farpls_core::similarity::ClusterAssignment;
use farpls_core::store::ExportFormat;
use farpls_core::trajectory::{TableBounds, Trajectory};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use crate::config::CampaignConfig;

pub struct AppState {
    campaign: Mutex<Campaign>,
    trajectories: BTreeMap<String, Trajectory>,
}

impl AppState {
    pub fn new(campaign: Campaign, trajectories: BTreeMap<String, Trajectory>) -> Self {
        Self {
            campaign: Mutex::new(campaign),
            trajectories,
        }
    }

    /// Loads the pool, replays the campaign logs and reads the pool's trajectories.
    pub fn from_config(config: &CampaignConfig) -> anyhow::Result<Self> {
        config.check_inputs()?;
        let pool: PoolFile = read_json(&config.pool_path())?;
        let clusters: ClusterAssignment = read_json(&config.clusters_path())?;
        let features = load_features(&config.work_dir, &pool.ids)?;
        let campaign_pool = Arc::new(CampaignPool::new(&pool.ids, &clusters, &features)?);
        let campaign = Campaign::open(config.options(), campaign_pool, &config.data_dir)?;
        let trajectories = pool
            .ids
            .iter()
            .map(|id| Ok((id.clone(), load_trajectory(&config.work_dir, id)?)))
            .collect::<Result<_, PipelineError>>()?;
        Ok(Self::new(campaign, trajectories))
    }

    pub fn campaign(&self) -> MutexGuard<'_, Campaign> {
        self.campaign.lock().unwrap_or_else(|p| p.into_inner())
    }
}

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }
}

impl From<CampaignError> for ApiError {
    fn from(e: CampaignError) -> Self {
        let (status, code) = match &e {
            CampaignError::CampaignComplete(_) => (StatusCode::GONE, "campaign_complete"),
            CampaignError::UnknownUser(_) => (StatusCode::NOT_FOUND, "unknown_user"),
            CampaignError::StaleToken(_) => (StatusCode::CONFLICT, "stale_token"),
            CampaignError::InvalidScore(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_score"),
            CampaignError::Chart(farpls_core::charts::ChartError::UnknownTrajectory(_)) => {
                (StatusCode::NOT_FOUND, "unknown_trajectory")
            }
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(json!({ "error": self.code, "message": self.message })),
        )
            .into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/users", post(register))
        .route("/users/{id}/next", get(next))
        .route("/users/{id}/labels", post(submit))
        .route("/users/{id}/progress", get(progress))
        .route("/trajectories/{id}/frames", get(frames))
        .route("/trajectories/{id}/keyframes", get(keyframes))
        .route("/pairs/{a}/{b}/charts", get(charts))
        .route("/admin/export", get(export))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(index)),
    }
}

async fn index() -> Html<&'static str> {
    Html(include_str!("index.html"))
}

#[derive(Debug, Default, Deserialize)]
pub struct RegisterRequest {
    pub user_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Registration {
    pub user_id: String,
    pub progress: farpls_core::campaign::ProgressView,
}

async fn register(
    State(state): State<Arc<AppState>>,
    body: Option<Json<RegisterRequest>>,
) -> Result<(StatusCode, Json<Registration>), ApiError> {
    let request = body.map(|Json(b)| b).unwrap_or_default();
    let mut c = state.campaign();
    let user_id = c.register(request.user_id.as_deref())?;
    let progress = c.progress(&user_id)?;
    Ok((
        StatusCode::CREATED,
        Json(Registration { user_id, progress }),
    ))
}

async fn next(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<farpls_core::campaign::PromptPayload> {
    Ok(Json(state.campaign().next(&id)?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LabelRequest {
    pub token: String,
    /// Presentation frame: 1 = left preferred, 0.5 = tie, 0 = right preferred.
    pub score: f64,
    #[serde(default)]
    pub view_ms: u64,
}

async fn submit(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<LabelRequest>,
) -> ApiResult<farpls_core::campaign::SubmitResponse> {
    Ok(Json(state.campaign().submit(
        &id,
        &body.token,
        body.score,
        body.view_ms,
    )?))
}

async fn progress(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<farpls_core::campaign::ProgressView> {
    Ok(Json(state.campaign().progress(&id)?))
}

#[derive(Debug, Deserialize)]
pub struct FrameRange {
    pub from: Option<usize>,
    pub to: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PlaybackFrame {
    pub t: usize,
    pub time_s: f64,
    pub eef_pos: Vec3,
    pub gripper_closed: bool,
    pub eef_force: f64,
    pub objects: BTreeMap<String, Vec3>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Playback {
    pub id: String,
    pub fps: u32,
    pub steps: usize,
    pub total_time_s: f64,
    pub table: TableBounds,
    pub from: usize,
    pub to: usize,
    pub frames: Vec<PlaybackFrame>,
}

fn trajectory<'a>(state: &'a AppState, id: &str) -> Result<&'a Trajectory, ApiError> {
    state.trajectories.get(id).ok_or_else(|| {
        ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_trajectory",
            format!("unknown trajectory {id}"),
        )
    })
}

/// Frames `from..=to`, clamped to the trajectory.
async fn frames(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(range): Query<FrameRange>,
) -> ApiResult<Playback> {
    let t = trajectory(&state, &id)?;
    let last = t.steps();
    let from = range.from.unwrap_or(0);
    let to = range.to.unwrap_or(last).min(last);
    if from > to {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "bad_range",
            format!("empty frame range {from}..={to}"),
        ));
    }
    let dt = t.scene.dt();
    let frames = t.frames[from..=to]
        .iter()
        .enumerate()
        .map(|(i, f)| PlaybackFrame {
            t: from + i,
            time_s: (from + i) as f64 * dt,
            eef_pos: f.eef_pos,
            gripper_closed: f.gripper_closed,
            eef_force: f.eef_force,
            objects: f
                .object_poses
                .iter()
                .map(|(k, p)| (k.clone(), p.pos))
                .collect(),
        })
        .collect();
    Ok(Json(Playback {
        id: t.id.clone(),
        fps: t.scene.fps,
        steps: last,
        total_time_s: t.duration_s(),
        table: t.scene.table,
        from,
        to,
        frames,
    }))
}

async fn keyframes(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> ApiResult<farpls_core::features::KeyframeSet> {
    let c = state.campaign();
    c.pool()
        .keyframes
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::NOT_FOUND,
                "unknown_trajectory",
                format!("unknown trajectory {id}"),
            )
        })
}

async fn charts(
    State(state): State<Arc<AppState>>,
    Path((a, b)): Path<(String, String)>,
) -> ApiResult<Vec<farpls_core::charts::DensityChartData>> {
    let pair = PairKey::new(a, b)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_pair", e.to_string()))?;
    let pool = Arc::clone(state.campaign().pool());
    Ok(Json(
        pool.charts
            .chart_payload(&pair)
            .map_err(CampaignError::from)?,
    ))
}

#[derive(Debug, Deserialize)]
pub struct ExportQuery {
    pub format: Option<String>,
}

async fn export(
    State(state): State<Arc<AppState>>,
    Query(q): Query<ExportQuery>,
) -> Result<Response, ApiError> {
    let format: ExportFormat = q.format.as_deref().unwrap_or("labels").parse().map_err(
        |e: farpls_core::store::StoreError| {
            ApiError::new(StatusCode::BAD_REQUEST, "unsupported_format", e.to_string())
        },
    )?;
    let content_type = match format {
        ExportFormat::Labels => "application/x-ndjson",
        ExportFormat::Summary => "application/json",
    };
    let bytes = state.campaign().export(format);
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}
