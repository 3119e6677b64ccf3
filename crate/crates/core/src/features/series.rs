use serde::{Deserialize, Serialize};

use super::FeatureConfig;
use crate::geometry::{
    self, angle_between, log_map, mat_mul, norm, relative_rotation_angle, scale, sub, Mat3, Vec3,
};
use crate::trajectory::Trajectory;

/// Scalar channel names in criterion-stacking order: 7 safety, 8 efficiency,
/// 6 task-quality channels.
pub const CHANNEL_NAMES: [&str; 21] = [
    "num_collisions",
    "dis_to_left",
    "dis_to_right",
    "dis_to_front",
    "dis_to_back",
    "dis_to_table",
    "eef_force",
    "speed",
    "eef_pos_x",
    "eef_pos_y",
    "eef_pos_z",
    "can_pos_x",
    "can_pos_y",
    "can_pos_z",
    "pseudo_cost_cum",
    "speed_smoothness_running",
    "trajectory_smoothness_running",
    "rel_angle",
    "grasp_offset_x",
    "grasp_offset_y",
    "grasp_offset_z",
];

/// Per-step feature channels, each of length `s + 1`.
///
/// Difference-based channels (speed, pseudo cost, smoothness) are zero at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSeries {
    pub num_collisions: Vec<f64>,
    pub dis_to_left: Vec<f64>,
    pub dis_to_right: Vec<f64>,
    pub dis_to_front: Vec<f64>,
    pub dis_to_back: Vec<f64>,
    pub dis_to_table: Vec<f64>,
    pub eef_force: Vec<f64>,
    pub speed: Vec<f64>,
    pub eef_pos: Vec<Vec3>,
    pub can_pos: Vec<Vec3>,
    pub pseudo_cost_cum: Vec<f64>,
    pub speed_smoothness_running: Vec<f64>,
    pub trajectory_smoothness_running: Vec<f64>,
    pub rel_angle: Vec<f64>,
    pub grasp_offset: Vec<Vec3>,
}

impl FeatureSeries {
    pub fn len(&self) -> usize {
        self.speed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speed.is_empty()
    }

    /// All 21 scalar channels in [`CHANNEL_NAMES`] order.
    pub fn channels(&self) -> Vec<Vec<f64>> {
        let axis = |v: &[Vec3], i: usize| v.iter().map(|p| p[i]).collect::<Vec<f64>>();
        vec![
            self.num_collisions.clone(),
            self.dis_to_left.clone(),
            self.dis_to_right.clone(),
            self.dis_to_front.clone(),
            self.dis_to_back.clone(),
            self.dis_to_table.clone(),
            self.eef_force.clone(),
            self.speed.clone(),
            axis(&self.eef_pos, 0),
            axis(&self.eef_pos, 1),
            axis(&self.eef_pos, 2),
            axis(&self.can_pos, 0),
            axis(&self.can_pos, 1),
            axis(&self.can_pos, 2),
            self.pseudo_cost_cum.clone(),
            self.speed_smoothness_running.clone(),
            self.trajectory_smoothness_running.clone(),
            self.rel_angle.clone(),
            axis(&self.grasp_offset, 0),
            axis(&self.grasp_offset, 1),
            axis(&self.grasp_offset, 2),
        ]
    }
}

/// Finite difference of a sampled signal: central inside, one-sided at the ends.
fn differentiate<const N: usize>(samples: &[[f64; N]], fps: f64) -> Vec<[f64; N]> {
    let n = samples.len();
    (0..n)
        .map(|t| {
            let (a, b) = (t.saturating_sub(1), (t + 1).min(n - 1));
            let mut out = [0.0; N];
            if b > a {
                let k = fps / (b - a) as f64;
                for i in 0..N {
                    out[i] = (samples[b][i] - samples[a][i]) * k;
                }
            }
            out
        })
        .collect()
}

/// World-frame angular velocity from orientation samples via the log map of
/// the rotation between neighbouring frames.
fn angular_velocity(rots: &[Mat3], fps: f64) -> Vec<Vec3> {
    let n = rots.len();
    (0..n)
        .map(|t| {
            let (a, b) = (t.saturating_sub(1), (t + 1).min(n - 1));
            if b == a || rots[b] == rots[a] {
                return [0.0; 3];
            }
            let delta = mat_mul(&rots[b], &geometry::transpose(&rots[a]));
            scale(log_map(&delta), fps / (b - a) as f64)
        })
        .collect()
}

/// 6-D end-effector accelerations (linear then angular) for every step.
///
/// Recorded velocity channels are used when every frame carries them;
/// otherwise velocities are reconstructed from poses.
pub fn eef_accelerations(traj: &Trajectory) -> Vec<[f64; 6]> {
    let fps = traj.scene.fps as f64;
    let lin: Vec<Vec3> = match traj
        .frames
        .iter()
        .map(|f| f.eef_lin_vel)
        .collect::<Option<Vec<_>>>()
    {
        Some(v) => v,
        None => differentiate(
            &traj.frames.iter().map(|f| f.eef_pos).collect::<Vec<_>>(),
            fps,
        ),
    };
    let ang: Vec<Vec3> = match traj
        .frames
        .iter()
        .map(|f| f.eef_ang_vel)
        .collect::<Option<Vec<_>>>()
    {
        Some(v) => v,
        None => angular_velocity(
            &traj.frames.iter().map(|f| f.eef_rot).collect::<Vec<_>>(),
            fps,
        ),
    };
    let twist: Vec<[f64; 6]> = lin
        .iter()
        .zip(&ang)
        .map(|(l, w)| [l[0], l[1], l[2], w[0], w[1], w[2]])
        .collect();
    differentiate(&twist, fps)
}

pub fn extract_feature_series(traj: &Trajectory, config: &FeatureConfig) -> FeatureSeries {
    let n = traj.frames.len();
    let fps = traj.scene.fps as f64;
    let table = traj.scene.table;
    let eef_pos: Vec<Vec3> = traj.frames.iter().map(|f| f.eef_pos).collect();
    let can_pos: Vec<Vec3> = (0..n).map(|t| traj.can_pos(t)).collect();

    let num_collisions = traj
        .frames
        .iter()
        .map(|f| f.contacts.iter().filter(|c| !c.is_grasp_contact()).count() as f64)
        .collect();
    let dis_to_left = can_pos.iter().map(|p| (p[0] - table.x_min).abs()).collect();
    let dis_to_right = can_pos.iter().map(|p| (table.x_max - p[0]).abs()).collect();
    let dis_to_front = can_pos.iter().map(|p| (p[1] - table.y_min).abs()).collect();
    let dis_to_back = can_pos.iter().map(|p| (table.y_max - p[1]).abs()).collect();
    let dis_to_table = can_pos
        .iter()
        .map(|p| (p[2] - table.surface_z).max(0.0))
        .collect();
    let eef_force = traj.frames.iter().map(|f| f.eef_force).collect();

    let step_len: Vec<f64> = (0..n)
        .map(|t| {
            if t == 0 {
                0.0
            } else {
                norm(sub(eef_pos[t], eef_pos[t - 1]))
            }
        })
        .collect();
    let speed = step_len.iter().map(|d| d * fps).collect();

    let mut pseudo_cost_cum = vec![0.0; n];
    for t in 1..n {
        let step: f64 = traj.frames[t]
            .joint_angles
            .iter()
            .zip(&traj.frames[t - 1].joint_angles)
            .map(|(a, b)| (a - b).abs())
            .sum();
        pseudo_cost_cum[t] = pseudo_cost_cum[t - 1] + step;
    }

    let accel = eef_accelerations(traj);
    let mut speed_smoothness_running = vec![0.0; n];
    let mut acc_sum = 0.0;
    for t in 0..n {
        acc_sum += accel[t].iter().map(|v| v * v).sum::<f64>().sqrt();
        if t > 0 {
            speed_smoothness_running[t] = acc_sum / t as f64;
        }
    }

    // turning angle at state τ between displacements x(τ) = p(τ) − p(τ−1) and x(τ+1)
    let displacement = |t: usize| sub(eef_pos[t], eef_pos[t - 1]);
    let mut trajectory_smoothness_running = vec![0.0; n];
    let mut angle_sum = 0.0;
    for (t, slot) in trajectory_smoothness_running.iter_mut().enumerate().skip(1) {
        if t + 1 < n {
            let (x0, x1) = (displacement(t), displacement(t + 1));
            if norm(x0) >= config.min_displacement && norm(x1) >= config.min_displacement {
                angle_sum += angle_between(x0, x1);
            }
        }
        *slot = angle_sum / t as f64;
    }

    let rel_angle = (0..n)
        .map(|t| relative_rotation_angle(&traj.frames[t].eef_rot, &traj.can_rot(t)))
        .collect();
    let grasp_offset = (0..n).map(|t| sub(can_pos[t], eef_pos[t])).collect();

    FeatureSeries {
        num_collisions,
        dis_to_left,
        dis_to_right,
        dis_to_front,
        dis_to_back,
        dis_to_table,
        eef_force,
        speed,
        eef_pos,
        can_pos,
        pseudo_cost_cum,
        speed_smoothness_running,
        trajectory_smoothness_running,
        rel_angle,
        grasp_offset,
    }
}
