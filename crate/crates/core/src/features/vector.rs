use serde::{Deserialize, Serialize};

use super::{FeatureSeries, PhaseEvents};
use crate::geometry::{norm, sub, Vec3};
use crate::trajectory::Trajectory;

pub const FEATURE_COUNT: usize = 17;

/// Feature names in the fixed order used for arrays, statistics and tie-breaking.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "max_num_collisions",
    "min_dis_to_edge",
    "max_height_to_table",
    "max_eef_force",
    "avg_speed",
    "reach_length",
    "grasp_length",
    "transport_length",
    "t_reach_s",
    "t_grasp_s",
    "t_transport_s",
    "total_time",
    "pseudo_cost",
    "speed_smoothness",
    "trajectory_smoothness",
    "max_rel_angle",
    "max_grasp_offset_dist",
];

/// The 17 scalar features of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub max_num_collisions: f64,
    pub min_dis_to_edge: f64,
    pub max_height_to_table: f64,
    pub max_eef_force: f64,
    pub avg_speed: f64,
    /// End-effector path from start to pick-up.
    pub reach_length: f64,
    /// End-effector path from pick-up to release.
    pub grasp_length: f64,
    /// Can path from pick-up to release.
    pub transport_length: f64,
    pub t_reach_s: f64,
    pub t_grasp_s: f64,
    pub t_transport_s: f64,
    pub total_time: f64,
    pub pseudo_cost: f64,
    pub speed_smoothness: f64,
    pub trajectory_smoothness: f64,
    pub max_rel_angle: f64,
    pub max_grasp_offset_dist: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.max_num_collisions,
            self.min_dis_to_edge,
            self.max_height_to_table,
            self.max_eef_force,
            self.avg_speed,
            self.reach_length,
            self.grasp_length,
            self.transport_length,
            self.t_reach_s,
            self.t_grasp_s,
            self.t_transport_s,
            self.total_time,
            self.pseudo_cost,
            self.speed_smoothness,
            self.trajectory_smoothness,
            self.max_rel_angle,
            self.max_grasp_offset_dist,
        ]
    }

    pub fn from_array(a: [f64; FEATURE_COUNT]) -> Self {
        Self {
            max_num_collisions: a[0],
            min_dis_to_edge: a[1],
            max_height_to_table: a[2],
            max_eef_force: a[3],
            avg_speed: a[4],
            reach_length: a[5],
            grasp_length: a[6],
            transport_length: a[7],
            t_reach_s: a[8],
            t_grasp_s: a[9],
            t_transport_s: a[10],
            total_time: a[11],
            pseudo_cost: a[12],
            speed_smoothness: a[13],
            trajectory_smoothness: a[14],
            max_rel_angle: a[15],
            max_grasp_offset_dist: a[16],
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.to_array()[i])
    }
}

fn path_length(points: &[Vec3], steps: std::ops::RangeInclusive<usize>) -> f64 {
    steps.map(|t| norm(sub(points[t], points[t - 1]))).sum()
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(f64::NEG_INFINITY, f64::max)
}

pub fn extract_feature_vector(
    traj: &Trajectory,
    series: &FeatureSeries,
    events: &PhaseEvents,
) -> FeatureVector {
    let s = traj.steps();
    let fps = traj.scene.fps as f64;
    let PhaseEvents {
        t_grip, t_release, ..
    } = *events;

    let min_dis_to_edge = [
        &series.dis_to_left,
        &series.dis_to_right,
        &series.dis_to_front,
        &series.dis_to_back,
    ]
    .iter()
    .flat_map(|ch| ch.iter().copied())
    .fold(f64::INFINITY, f64::min);

    let grasp_window = t_grip..=t_release;
    let t_grasp_s = (t_release - t_grip) as f64 / fps;

    FeatureVector {
        max_num_collisions: max_of(series.num_collisions.iter().copied()),
        min_dis_to_edge,
        max_height_to_table: max_of(series.dis_to_table.iter().copied()),
        max_eef_force: max_of(series.eef_force.iter().copied()),
        avg_speed: if s == 0 {
            0.0
        } else {
            series.speed[1..].iter().sum::<f64>() / s as f64
        },
        reach_length: path_length(&series.eef_pos, 1..=t_grip),
        grasp_length: path_length(&series.eef_pos, t_grip + 1..=t_release),
        transport_length: path_length(&series.can_pos, t_grip + 1..=t_release),
        t_reach_s: t_grip as f64 / fps,
        t_grasp_s,
        t_transport_s: t_grasp_s,
        total_time: s as f64 / fps,
        pseudo_cost: series.pseudo_cost_cum[s],
        speed_smoothness: series.speed_smoothness_running[s],
        trajectory_smoothness: series.trajectory_smoothness_running[s],
        max_rel_angle: max_of(grasp_window.clone().map(|t| series.rel_angle[t])),
        max_grasp_offset_dist: max_of(grasp_window.map(|t| norm(series.grasp_offset[t]))),
    }
}
