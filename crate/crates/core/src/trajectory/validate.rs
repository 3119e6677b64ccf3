use std::fmt;

use super::Trajectory;
use crate::geometry::{orthonormality_error, Mat3};

/// Maximum allowed deviation of `RᵀR` from identity (and of det R from +1).
pub const ROTATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    TooFewFrames { len: usize },
    IndexOutOfSequence { found: usize },
    JointCount { expected: usize, found: usize },
    NonFinite { field: String },
    NonOrthonormalRotation { body: String, error: f64 },
    NegativeForce { value: f64 },
    MissingObjectPose { object: String },
    UnknownObjectPose { object: String },
    SelfContact { object: String },
}

/// One broken invariant, located at a frame when it is frame-specific.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub frame: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(frame) = self.frame {
            write!(f, "frame {frame}: ")?;
        }
        match &self.kind {
            ViolationKind::TooFewFrames { len } => {
                write!(f, "trajectory needs at least 2 frames, has {len}")
            }
            ViolationKind::IndexOutOfSequence { found } => {
                write!(f, "frame index {found} out of sequence")
            }
            ViolationKind::JointCount { expected, found } => {
                write!(f, "expected {expected} joint angles, found {found}")
            }
            ViolationKind::NonFinite { field } => write!(f, "non-finite value in `{field}`"),
            ViolationKind::NonOrthonormalRotation { body, error } => {
                write!(
                    f,
                    "rotation of `{body}` is not orthonormal (error {error:.3e})"
                )
            }
            ViolationKind::NegativeForce { value } => write!(f, "negative eef_force {value}"),
            ViolationKind::MissingObjectPose { object } => write!(f, "missing pose for `{object}`"),
            ViolationKind::UnknownObjectPose { object } => {
                write!(f, "pose for undeclared object `{object}`")
            }
            ViolationKind::SelfContact { object } => write!(f, "`{object}` in contact with itself"),
        }
    }
}

fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

fn check_rotation(out: &mut Vec<Violation>, frame: usize, body: &str, rot: &Mat3) {
    if !all_finite(rot) {
        out.push(Violation {
            frame: Some(frame),
            kind: ViolationKind::NonFinite {
                field: format!("{body}.rot"),
            },
        });
        return;
    }
    let error = orthonormality_error(rot);
    if error > ROTATION_TOLERANCE {
        out.push(Violation {
            frame: Some(frame),
            kind: ViolationKind::NonOrthonormalRotation {
                body: body.to_string(),
                error,
            },
        });
    }
}

/// Lists every broken invariant of `traj`; empty iff the trajectory is valid.
pub fn validate_trajectory(traj: &Trajectory) -> Vec<Violation> {
    let mut out = Vec::new();
    let scene = &traj.scene;
    if traj.frames.len() < 2 {
        out.push(Violation {
            frame: None,
            kind: ViolationKind::TooFewFrames {
                len: traj.frames.len(),
            },
        });
    }
    for (i, frame) in traj.frames.iter().enumerate() {
        let at = |kind| Violation {
            frame: Some(i),
            kind,
        };
        if frame.index != i {
            out.push(at(ViolationKind::IndexOutOfSequence { found: frame.index }));
        }
        if frame.joint_angles.len() != scene.joint_count {
            out.push(at(ViolationKind::JointCount {
                expected: scene.joint_count,
                found: frame.joint_angles.len(),
            }));
        } else if !all_finite(&frame.joint_angles) {
            out.push(at(ViolationKind::NonFinite { field: "q".into() }));
        }
        if !all_finite(&frame.eef_pos) {
            out.push(at(ViolationKind::NonFinite {
                field: "eef_pos".into(),
            }));
        }
        check_rotation(&mut out, i, "eef", &frame.eef_rot);
        if frame.eef_lin_vel.is_some_and(|v| !all_finite(&v)) {
            out.push(at(ViolationKind::NonFinite {
                field: "eef_lin_vel".into(),
            }));
        }
        if frame.eef_ang_vel.is_some_and(|v| !all_finite(&v)) {
            out.push(at(ViolationKind::NonFinite {
                field: "eef_ang_vel".into(),
            }));
        }
        if !frame.eef_force.is_finite() {
            out.push(at(ViolationKind::NonFinite {
                field: "eef_force".into(),
            }));
        } else if frame.eef_force < 0.0 {
            out.push(at(ViolationKind::NegativeForce {
                value: frame.eef_force,
            }));
        }
        for object in &scene.object_ids {
            match frame.object_poses.get(object) {
                None => out.push(at(ViolationKind::MissingObjectPose {
                    object: object.clone(),
                })),
                Some(pose) => {
                    if !all_finite(&pose.pos) {
                        out.push(at(ViolationKind::NonFinite {
                            field: format!("{object}.pos"),
                        }));
                    }
                    check_rotation(&mut out, i, object, &pose.rot);
                }
            }
        }
        for object in frame.object_poses.keys() {
            if !scene.object_ids.contains(object) {
                out.push(at(ViolationKind::UnknownObjectPose {
                    object: object.clone(),
                }));
            }
        }
        for pair in frame.contacts.iter().filter(|p| p.is_self_pair()) {
            out.push(at(ViolationKind::SelfContact {
                object: pair.first().to_string(),
            }));
        }
    }
    out
}
