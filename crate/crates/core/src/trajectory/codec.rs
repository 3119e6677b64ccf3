//! Line-delimited JSON trajectory files.
//!
//! Line 1 is a header carrying the trajectory id, source and scene; every
//! following non-blank line is one frame. The writer emits a canonical form:
//! fixed key order, sorted object and contact lists, and floats with 17
//! significant digits so that values round-trip exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::{
    validate_trajectory, ContactPair, FrameState, ObjectPose, SceneConfig, TableBounds, Trajectory,
    TrajectoryError, TrajectorySource,
};
use crate::geometry::{Mat3, Vec3};

#[derive(Deserialize)]
struct RawHeader {
    id: String,
    source: TrajectorySource,
    fps: u32,
    joint_count: usize,
    table: TableBounds,
    objects: Vec<String>,
}

#[derive(Deserialize)]
struct RawPose {
    pos: Vec<f64>,
    rot: Vec<f64>,
}

#[derive(Deserialize)]
struct RawFrame {
    t: usize,
    q: Vec<f64>,
    eef_pos: Vec<f64>,
    eef_rot: Vec<f64>,
    #[serde(default)]
    eef_lin_vel: Option<Vec<f64>>,
    #[serde(default)]
    eef_ang_vel: Option<Vec<f64>>,
    eef_force: f64,
    gripper_closed: bool,
    objects: BTreeMap<String, RawPose>,
    contacts: Vec<Vec<String>>,
}

/// Header fields of a trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryHeader {
    pub id: String,
    pub source: TrajectorySource,
    pub scene: SceneConfig,
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn decode<T: DeserializeOwned>(line: usize, text: &str) -> Result<T, TrajectoryError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| TrajectoryError::MalformedFile {
            line,
            message: e.to_string(),
        })?;
    serde_json::from_value(value).map_err(|e| TrajectoryError::SchemaViolation {
        line,
        message: e.to_string(),
    })
}

fn fixed<const N: usize>(
    line: usize,
    field: &str,
    v: Vec<f64>,
) -> Result<[f64; N], TrajectoryError> {
    let len = v.len();
    v.try_into().map_err(|_| TrajectoryError::SchemaViolation {
        line,
        message: format!("`{field}` must have {N} numbers, found {len}"),
    })
}

fn as_text(bytes: &[u8]) -> Result<&str, TrajectoryError> {
    std::str::from_utf8(bytes).map_err(|e| TrajectoryError::MalformedFile {
        line: 0,
        message: format!("not UTF-8: {e}"),
    })
}

fn read_header(text: &str) -> Result<TrajectoryHeader, TrajectoryError> {
    let (line, first) = lines(text).next().ok_or(TrajectoryError::MalformedFile {
        line: 1,
        message: "empty file".into(),
    })?;
    let raw: RawHeader = decode(line, first)?;
    let scene = SceneConfig {
        table: raw.table,
        fps: raw.fps,
        joint_count: raw.joint_count,
        object_ids: raw.objects,
    };
    scene
        .check()
        .map_err(|e| TrajectoryError::SchemaViolation {
            line,
            message: e.to_string(),
        })?;
    Ok(TrajectoryHeader {
        id: raw.id,
        source: raw.source,
        scene,
    })
}

/// Reads only the header line, e.g. to discover the scene of a new dataset.
pub fn parse_scene_header(bytes: &[u8]) -> Result<TrajectoryHeader, TrajectoryError> {
    read_header(as_text(bytes)?)
}

fn convert_frame(
    line: usize,
    raw: RawFrame,
    scene: &SceneConfig,
) -> Result<FrameState, TrajectoryError> {
    if raw.q.len() != scene.joint_count {
        return Err(TrajectoryError::SchemaViolation {
            line,
            message: format!(
                "`q` must have joint_count = {} entries, found {}",
                scene.joint_count,
                raw.q.len()
            ),
        });
    }
    let mut object_poses = BTreeMap::new();
    for (id, pose) in raw.objects {
        let pos: Vec3 = fixed(line, &format!("objects.{id}.pos"), pose.pos)?;
        let rot: Mat3 = fixed(line, &format!("objects.{id}.rot"), pose.rot)?;
        object_poses.insert(id, ObjectPose { pos, rot });
    }
    for id in &scene.object_ids {
        if !object_poses.contains_key(id) {
            return Err(TrajectoryError::SchemaViolation {
                line,
                message: format!("missing pose for object `{id}`"),
            });
        }
    }
    let mut contacts = BTreeSet::new();
    for pair in raw.contacts {
        match <[String; 2]>::try_from(pair) {
            Ok([a, b]) => {
                contacts.insert(ContactPair::new(a, b));
            }
            Err(p) => {
                return Err(TrajectoryError::SchemaViolation {
                    line,
                    message: format!("contact entries must name 2 objects, found {}", p.len()),
                })
            }
        }
    }
    Ok(FrameState {
        index: raw.t,
        joint_angles: raw.q,
        eef_pos: fixed(line, "eef_pos", raw.eef_pos)?,
        eef_rot: fixed(line, "eef_rot", raw.eef_rot)?,
        eef_lin_vel: raw
            .eef_lin_vel
            .map(|v| fixed(line, "eef_lin_vel", v))
            .transpose()?,
        eef_ang_vel: raw
            .eef_ang_vel
            .map(|v| fixed(line, "eef_ang_vel", v))
            .transpose()?,
        eef_force: raw.eef_force,
        gripper_closed: raw.gripper_closed,
        object_poses,
        contacts,
    })
}

fn parse_body(
    text: &str,
    header: TrajectoryHeader,
    scene: Arc<SceneConfig>,
) -> Result<Trajectory, TrajectoryError> {
    let mut frames = Vec::new();
    for (line, content) in lines(text).skip(1) {
        let raw: RawFrame = decode(line, content)?;
        frames.push(convert_frame(line, raw, &scene)?);
    }
    let traj = Trajectory {
        id: header.id,
        source: header.source,
        frames,
        scene,
    };
    if let Some(first) = validate_trajectory(&traj).into_iter().next() {
        return Err(TrajectoryError::InvariantViolation(first));
    }
    Ok(traj)
}

/// Parses a trajectory file recorded in `scene`.
///
/// The header's scene must equal `scene`; the returned trajectory shares it.
pub fn parse_trajectory(
    bytes: &[u8],
    scene: &Arc<SceneConfig>,
) -> Result<Trajectory, TrajectoryError> {
    let text = as_text(bytes)?;
    let header = read_header(text)?;
    if header.scene != **scene {
        return Err(TrajectoryError::SchemaViolation {
            line: 1,
            message: format!(
                "header scene of `{}` differs from the dataset scene",
                header.id
            ),
        });
    }
    parse_body(text, header, Arc::clone(scene))
}

/// Parses a trajectory file using the scene declared in its own header.
pub fn parse_trajectory_with_header(bytes: &[u8]) -> Result<Trajectory, TrajectoryError> {
    let text = as_text(bytes)?;
    let header = read_header(text)?;
    let scene = Arc::new(header.scene.clone());
    parse_body(text, header, scene)
}

fn push_f64(out: &mut String, v: f64) {
    // 17 significant digits: one before the point, sixteen after
    let _ = write!(out, "{v:.16e}");
}

fn push_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_f64(out, *v);
    }
    out.push(']');
}

fn push_str(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

/// Writes the canonical file form of `traj`.
pub fn serialize_trajectory(traj: &Trajectory) -> String {
    let scene = &traj.scene;
    let mut out = String::new();
    out.push_str("{\"id\":");
    push_str(&mut out, &traj.id);
    let _ = write!(
        out,
        ",\"source\":\"{}\",\"fps\":{},\"joint_count\":{},\"table\":{{\"x_min\":",
        traj.source.as_str(),
        scene.fps,
        scene.joint_count
    );
    let t = &scene.table;
    push_f64(&mut out, t.x_min);
    out.push_str(",\"x_max\":");
    push_f64(&mut out, t.x_max);
    out.push_str(",\"y_min\":");
    push_f64(&mut out, t.y_min);
    out.push_str(",\"y_max\":");
    push_f64(&mut out, t.y_max);
    out.push_str(",\"surface_z\":");
    push_f64(&mut out, t.surface_z);
    out.push_str("},\"objects\":[");
    for (i, o) in scene.object_ids.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_str(&mut out, o);
    }
    out.push_str("]}\n");

    for f in &traj.frames {
        let _ = write!(out, "{{\"t\":{},\"q\":", f.index);
        push_array(&mut out, &f.joint_angles);
        out.push_str(",\"eef_pos\":");
        push_array(&mut out, &f.eef_pos);
        out.push_str(",\"eef_rot\":");
        push_array(&mut out, &f.eef_rot);
        if let Some(v) = f.eef_lin_vel {
            out.push_str(",\"eef_lin_vel\":");
            push_array(&mut out, &v);
        }
        if let Some(v) = f.eef_ang_vel {
            out.push_str(",\"eef_ang_vel\":");
            push_array(&mut out, &v);
        }
        out.push_str(",\"eef_force\":");
        push_f64(&mut out, f.eef_force);
        let _ = write!(
            out,
            ",\"gripper_closed\":{},\"objects\":{{",
            f.gripper_closed
        );
        for (i, (id, pose)) in f.object_poses.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            push_str(&mut out, id);
            out.push_str(":{\"pos\":");
            push_array(&mut out, &pose.pos);
            out.push_str(",\"rot\":");
            push_array(&mut out, &pose.rot);
            out.push('}');
        }
        out.push_str("},\"contacts\":[");
        for (i, c) in f.contacts.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            push_str(&mut out, c.first());
            out.push(',');
            push_str(&mut out, c.second());
            out.push(']');
        }
        out.push_str("]}\n");
    }
    out
}
