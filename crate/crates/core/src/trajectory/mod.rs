//! Trajectory data model: scene geometry, per-frame robot and object state,
//! trajectory files, validation and dataset-level filtering.

mod codec;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Mat3, Vec3};

pub use codec::{
    parse_scene_header, parse_trajectory, parse_trajectory_with_header, serialize_trajectory,
};
pub use validate::{validate_trajectory, Violation, ViolationKind, ROTATION_TOLERANCE};

/// Object id of the can being picked and placed.
pub const TARGET_CAN: &str = "target_can";
pub const FINGER_LEFT: &str = "finger_left";
pub const FINGER_RIGHT: &str = "finger_right";

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("malformed trajectory file at line {line}: {message}")]
    MalformedFile { line: usize, message: String },
    #[error("schema violation at line {line}: {message}")]
    SchemaViolation { line: usize, message: String },
    #[error("invariant violation: {0}")]
    InvariantViolation(Violation),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("duplicate trajectory id `{0}`")]
    DuplicateId(String),
    #[error("trajectory `{0}` does not share the dataset scene")]
    SceneMismatch(String),
}

/// Horizontal bounds and surface height of the pick table, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub surface_z: f64,
}

impl TableBounds {
    pub fn contains_xy(&self, p: Vec3) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub table: TableBounds,
    pub fps: u32,
    pub joint_count: usize,
    pub object_ids: Vec<String>,
}

impl SceneConfig {
    pub fn new(
        table: TableBounds,
        fps: u32,
        joint_count: usize,
        object_ids: Vec<String>,
    ) -> Result<Self, TrajectoryError> {
        let scene = Self {
            table,
            fps,
            joint_count,
            object_ids,
        };
        scene.check()?;
        Ok(scene)
    }

    pub fn check(&self) -> Result<(), TrajectoryError> {
        let t = &self.table;
        let finite = [t.x_min, t.x_max, t.y_min, t.y_max, t.surface_z]
            .iter()
            .all(|v| v.is_finite());
        if !finite || t.x_min >= t.x_max || t.y_min >= t.y_max {
            return Err(TrajectoryError::InvalidScene(format!(
                "table bounds must be finite with x_min < x_max and y_min < y_max, got {t:?}"
            )));
        }
        if self.fps == 0 {
            return Err(TrajectoryError::InvalidScene("fps must be positive".into()));
        }
        if self.joint_count == 0 {
            return Err(TrajectoryError::InvalidScene(
                "joint_count must be at least 1".into(),
            ));
        }
        let targets = self.object_ids.iter().filter(|o| *o == TARGET_CAN).count();
        if targets != 1 {
            return Err(TrajectoryError::InvalidScene(format!(
                "`{TARGET_CAN}` must appear exactly once in objects, found {targets}"
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.object_ids.iter().find(|o| !seen.insert(o.as_str())) {
            return Err(TrajectoryError::InvalidScene(format!(
                "duplicate object id `{dup}`"
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectorySource {
    Ph,
    Mh,
    Mg,
    Paired,
}

impl TrajectorySource {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectorySource::Ph => "ph",
            TrajectorySource::Mh => "mh",
            TrajectorySource::Mg => "mg",
            TrajectorySource::Paired => "paired",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectPose {
    pub pos: Vec3,
    pub rot: Mat3,
}

/// Unordered pair of object ids in contact, stored with `first <= second`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContactPair {
    first: String,
    second: String,
}

impl ContactPair {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            Self {
                first: a,
                second: b,
            }
        } else {
            Self {
                first: b,
                second: a,
            }
        }
    }

    pub fn first(&self) -> &str {
        &self.first
    }

    pub fn second(&self) -> &str {
        &self.second
    }

    pub fn involves(&self, id: &str) -> bool {
        self.first == id || self.second == id
    }

    pub fn is_self_pair(&self) -> bool {
        self.first == self.second
    }

    /// Finger ↔ target can contacts are grasping, not collisions.
    pub fn is_grasp_contact(&self) -> bool {
        self.involves(TARGET_CAN) && (self.involves(FINGER_LEFT) || self.involves(FINGER_RIGHT))
    }
}

impl fmt::Display for ContactPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}–{}", self.first, self.second)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub index: usize,
    pub joint_angles: Vec<f64>,
    pub eef_pos: Vec3,
    pub eef_rot: Mat3,
    pub eef_lin_vel: Option<Vec3>,
    pub eef_ang_vel: Option<Vec3>,
    pub eef_force: f64,
    pub gripper_closed: bool,
    pub object_poses: BTreeMap<String, ObjectPose>,
    pub contacts: BTreeSet<ContactPair>,
}

impl FrameState {
    pub fn target_pose(&self) -> Option<&ObjectPose> {
        self.object_poses.get(TARGET_CAN)
    }

    pub fn finger_contacts(&self, object: &str) -> (bool, bool) {
        (
            self.contacts
                .contains(&ContactPair::new(FINGER_LEFT, object)),
            self.contacts
                .contains(&ContactPair::new(FINGER_RIGHT, object)),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    pub source: TrajectorySource,
    pub frames: Vec<FrameState>,
    pub scene: Arc<SceneConfig>,
}

impl Trajectory {
    /// Number of steps `s`; frames are indexed `0..=s`.
    pub fn steps(&self) -> usize {
        self.frames.len().saturating_sub(1)
    }

    pub fn duration_s(&self) -> f64 {
        self.steps() as f64 / self.scene.fps as f64
    }

    /// Position of the target can at step `t`.
    ///
    /// Panics if the frame lacks a target pose; parsed trajectories always carry one.
    pub fn can_pos(&self, t: usize) -> Vec3 {
        self.frames[t]
            .target_pose()
            .map(|p| p.pos)
            .expect("validated trajectory has a target can pose")
    }

    pub fn can_rot(&self, t: usize) -> Mat3 {
        self.frames[t]
            .target_pose()
            .map(|p| p.rot)
            .expect("validated trajectory has a target can pose")
    }

    fn inside_table_xy(&self) -> bool {
        self.frames
            .iter()
            .all(|f| self.scene.table.contains_xy(f.eef_pos))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub scene: Arc<SceneConfig>,
    pub trajectories: Vec<Trajectory>,
}

impl Dataset {
    pub fn new(
        scene: Arc<SceneConfig>,
        trajectories: Vec<Trajectory>,
    ) -> Result<Self, TrajectoryError> {
        let mut ids = HashSet::new();
        for t in &trajectories {
            if !ids.insert(t.id.as_str()) {
                return Err(TrajectoryError::DuplicateId(t.id.clone()));
            }
            if *t.scene != *scene {
                return Err(TrajectoryError::SceneMismatch(t.id.clone()));
            }
        }
        Ok(Self {
            scene,
            trajectories,
        })
    }

    pub fn ids(&self) -> Vec<String> {
        self.trajectories.iter().map(|t| t.id.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.id == id)
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// Keeps trajectories no longer than `max_duration_s` whose end-effector
/// stays horizontally within the table bounds for every frame.
///
/// The duration cutoff is inclusive. Order of retained trajectories is preserved.
pub fn filter_dataset(ds: &Dataset, max_duration_s: f64) -> Dataset {
    assert!(max_duration_s > 0.0, "max_duration_s must be positive");
    let trajectories = ds
        .trajectories
        .iter()
        .filter(|t| t.duration_s() <= max_duration_s && t.inside_table_xy())
        .cloned()
        .collect();
    Dataset {
        scene: Arc::clone(&ds.scene),
        trajectories,
    }
}
