//! Seeded generator of synthetic pick-and-place trajectories.
//!
//! Used by tests, the simulation harness and demo datasets. Every generated
//! trajectory is valid, stays above the pick table, and has exactly known
//! phase events (see [`SynthTrajectory`]).

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{
    self, add, lerp3, mat_mul, rotation_from_axis_angle, scale, sub, Mat3, Vec3,
};
use crate::trajectory::{
    ContactPair, FrameState, ObjectPose, SceneConfig, TableBounds, Trajectory, TrajectorySource,
    FINGER_LEFT, FINGER_RIGHT, TARGET_CAN,
};

pub const CAN_HALF_HEIGHT: f64 = 0.06;
const OTHER_CANS: [&str; 4] = ["can_2", "can_3", "can_4", "can_5"];

#[derive(Debug, Clone)]
pub struct SynthParams {
    /// Number of steps `s`; the trajectory has `s + 1` frames.
    pub steps: usize,
    /// Probability of injecting each kind of collision run.
    pub collision_prob: f64,
    /// Emit explicit eef velocity channels instead of leaving them absent.
    pub with_velocities: bool,
    /// Standard deviation of positional jitter, meters.
    pub jitter: f64,
    pub source: TrajectorySource,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            steps: 80,
            collision_prob: 0.5,
            with_velocities: false,
            jitter: 0.002,
            source: TrajectorySource::Mg,
        }
    }
}

/// Phase events planted by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlantedEvents {
    pub first_contact: usize,
    pub lift: usize,
    pub release: usize,
}

#[derive(Debug, Clone)]
pub struct SynthTrajectory {
    pub trajectory: Trajectory,
    pub events: PlantedEvents,
}

pub struct TrajectorySynth {
    rng: ChaCha8Rng,
    scene: Arc<SceneConfig>,
}

pub fn default_scene() -> SceneConfig {
    let mut objects = vec![TARGET_CAN.to_string()];
    objects.extend(OTHER_CANS.iter().map(|s| s.to_string()));
    SceneConfig::new(
        TableBounds {
            x_min: -0.4,
            x_max: 0.4,
            y_min: -0.6,
            y_max: 0.6,
            surface_z: 0.8,
        },
        20,
        7,
        objects,
    )
    .expect("default scene is valid")
}

impl TrajectorySynth {
    pub fn new(seed: u64) -> Self {
        Self::with_scene(seed, Arc::new(default_scene()))
    }

    pub fn with_scene(seed: u64, scene: Arc<SceneConfig>) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            scene,
        }
    }

    pub fn scene(&self) -> Arc<SceneConfig> {
        Arc::clone(&self.scene)
    }

    pub fn generate(&mut self, id: &str, params: &SynthParams) -> Trajectory {
        self.generate_with_events(id, params).trajectory
    }

    fn table_point(&mut self, margin: f64) -> [f64; 2] {
        let t = self.scene.table;
        [
            self.rng.random_range(t.x_min + margin..t.x_max - margin),
            self.rng.random_range(t.y_min + margin..t.y_max - margin),
        ]
    }

    pub fn generate_with_events(&mut self, id: &str, params: &SynthParams) -> SynthTrajectory {
        let s = params.steps.max(12);
        let table = self.scene.table;
        let rest_z = table.surface_z + CAN_HALF_HEIGHT;
        let jitter = Normal::new(0.0, params.jitter.max(0.0)).expect("finite jitter");

        let first_contact = ((s as f64 * self.rng.random_range(0.2..0.35)) as usize).max(2);
        let lift = first_contact + self.rng.random_range(1..=3);
        let release = ((s as f64 * self.rng.random_range(0.7..0.85)) as usize)
            .max(lift + 3)
            .min(s);

        let start_xy = self.table_point(0.12);
        let can_xy = self.table_point(0.12);
        let place_xy = self.table_point(0.12);
        let eef_start = [
            start_xy[0],
            start_xy[1],
            table.surface_z + self.rng.random_range(0.2..0.35),
        ];
        let can_start = [can_xy[0], can_xy[1], rest_z];
        let can_place = [place_xy[0], place_xy[1], rest_z];
        let grasp_offset = [
            self.rng.random_range(-0.01..0.01),
            self.rng.random_range(-0.01..0.01),
            self.rng.random_range(-0.02..0.0),
        ];
        let lift_height = self.rng.random_range(0.08..0.25);
        let bulge = [
            self.rng.random_range(-0.05..0.05),
            self.rng.random_range(-0.05..0.05),
            self.rng.random_range(0.0..0.08),
        ];

        let mut eef = Vec::with_capacity(s + 1);
        let mut can = Vec::with_capacity(s + 1);
        let grasp_eef = sub(can_start, grasp_offset);
        for t in 0..=s {
            let (e, c) = if t < first_contact {
                let u = smoothstep(t as f64 / first_contact as f64);
                let e = add(lerp3(eef_start, grasp_eef, u), scale(bulge, (PI * u).sin()));
                (e, can_start)
            } else if t < lift {
                (grasp_eef, can_start)
            } else if t < release {
                let span = (release - 1 - lift).max(1) as f64;
                let u = smoothstep((t - lift) as f64 / span);
                let mut c = lerp3(can_start, can_place, u);
                c[2] += 0.01 + lift_height * (PI * u).sin();
                (sub(c, grasp_offset), c)
            } else {
                let k = (t + 1 - release) as f64;
                let last = sub(can_place, grasp_offset);
                ([last[0], last[1], last[2] + 0.01 + 0.008 * k], can_place)
            };
            eef.push(e);
            can.push(c);
        }
        // jitter the free-moving eef segments only; clamp inside the table
        for (t, e) in eef.iter_mut().enumerate() {
            if t < first_contact || t >= release {
                for v in e.iter_mut() {
                    *v += jitter.sample(&mut self.rng);
                }
            }
            e[0] = e[0].clamp(table.x_min + 0.01, table.x_max - 0.01);
            e[1] = e[1].clamp(table.y_min + 0.01, table.y_max - 0.01);
        }
        // while carried the can follows the eef with a slowly varying offset
        for t in lift..release {
            let wobble = 0.003 * ((t as f64) * 0.7).sin();
            can[t] = add(eef[t], add(grasp_offset, [wobble, -wobble, 0.0]));
            can[t][2] = can[t][2].max(can_start[2] + 0.006);
        }

        let others: Vec<(String, Vec3)> = OTHER_CANS
            .iter()
            .map(|id| {
                let xy = self.table_point(0.05);
                (id.to_string(), [xy[0], xy[1], rest_z])
            })
            .collect();

        let yaw0 = self.rng.random_range(-PI..PI);
        let yaw_amp = self.rng.random_range(0.05..0.6);
        let tilt_amp = self.rng.random_range(0.0..0.2);
        let eef_rot: Vec<Mat3> = (0..=s)
            .map(|t| {
                let u = t as f64 / s as f64;
                let yaw = rotation_from_axis_angle(
                    [0.0, 0.0, 1.0],
                    yaw0 + yaw_amp * (2.0 * PI * u).sin(),
                );
                let tilt =
                    rotation_from_axis_angle([1.0, 0.0, 0.0], PI + tilt_amp * (3.0 * u).sin());
                mat_mul(&yaw, &tilt)
            })
            .collect();
        let can_yaw = rotation_from_axis_angle([0.0, 0.0, 1.0], self.rng.random_range(-PI..PI));
        let grasp_tilt_amp = self.rng.random_range(0.02..0.3);
        let mut can_rot: Vec<Mat3> = Vec::with_capacity(s + 1);
        for (t, eef) in eef_rot.iter().enumerate() {
            let r = if t < lift {
                can_yaw
            } else if t < release {
                let rel = rotation_from_axis_angle(
                    [1.0, 0.5, 0.0],
                    PI + grasp_tilt_amp * ((t - lift) as f64 * 0.3).sin(),
                );
                mat_mul(eef, &rel)
            } else {
                can_rot[release - 1]
            };
            can_rot.push(r);
        }

        let mut contacts: Vec<BTreeSet<ContactPair>> = vec![BTreeSet::new(); s + 1];
        for c in contacts.iter_mut().take(release).skip(first_contact) {
            c.insert(ContactPair::new(FINGER_LEFT, TARGET_CAN));
            c.insert(ContactPair::new(FINGER_RIGHT, TARGET_CAN));
        }
        let mut inject = |rng: &mut ChaCha8Rng, pair: ContactPair, lo: usize, hi: usize| {
            if hi <= lo || !rng.random_bool(params.collision_prob.clamp(0.0, 1.0)) {
                return;
            }
            let len = rng.random_range(1..=4usize).min(hi - lo);
            let start = rng.random_range(lo..=hi - len);
            for c in contacts.iter_mut().skip(start).take(len) {
                c.insert(pair.clone());
            }
        };
        inject(
            &mut self.rng,
            ContactPair::new(TARGET_CAN, "can_2"),
            lift,
            release,
        );
        inject(
            &mut self.rng,
            ContactPair::new(TARGET_CAN, "table"),
            release.saturating_sub(3),
            s,
        );
        inject(
            &mut self.rng,
            ContactPair::new(FINGER_LEFT, "can_3"),
            0,
            first_contact,
        );
        inject(
            &mut self.rng,
            ContactPair::new(TARGET_CAN, "can_2"),
            lift,
            release,
        );

        let dof = self.scene.joint_count;
        let q_base: Vec<f64> = (0..dof).map(|_| self.rng.random_range(-1.5..1.5)).collect();
        let q_amp: Vec<f64> = (0..dof).map(|_| self.rng.random_range(0.05..0.6)).collect();
        let q_freq: Vec<f64> = (0..dof).map(|_| self.rng.random_range(0.5..2.5)).collect();
        let q_phase: Vec<f64> = (0..dof).map(|_| self.rng.random_range(-PI..PI)).collect();

        let fps = self.scene.fps as f64;
        let mut frames = Vec::with_capacity(s + 1);
        for t in 0..=s {
            let u = t as f64 / s as f64;
            let joint_angles = (0..dof)
                .map(|j| q_base[j] + q_amp[j] * (2.0 * PI * q_freq[j] * u + q_phase[j]).sin())
                .collect();
            let holding = t >= first_contact && t < release;
            let eef_force = if holding {
                self.rng.random_range(4.0..15.0)
            } else {
                self.rng.random_range(0.0..0.5)
            };
            let mut object_poses = BTreeMap::new();
            object_poses.insert(
                TARGET_CAN.to_string(),
                ObjectPose {
                    pos: can[t],
                    rot: can_rot[t],
                },
            );
            for (id, pos) in &others {
                object_poses.insert(
                    id.clone(),
                    ObjectPose {
                        pos: *pos,
                        rot: geometry::IDENTITY,
                    },
                );
            }
            let (eef_lin_vel, eef_ang_vel) = if params.with_velocities {
                let (a, b) = (t.saturating_sub(1), (t + 1).min(s));
                let lin = scale(sub(eef[b], eef[a]), fps / (b - a) as f64);
                let rel = mat_mul(&eef_rot[b], &geometry::transpose(&eef_rot[a]));
                let ang = scale(geometry::log_map(&rel), fps / (b - a) as f64);
                (Some(lin), Some(ang))
            } else {
                (None, None)
            };
            frames.push(FrameState {
                index: t,
                joint_angles,
                eef_pos: eef[t],
                eef_rot: eef_rot[t],
                eef_lin_vel,
                eef_ang_vel,
                eef_force,
                gripper_closed: holding,
                object_poses,
                contacts: std::mem::take(&mut contacts[t]),
            });
        }

        SynthTrajectory {
            trajectory: Trajectory {
                id: id.to_string(),
                source: params.source,
                frames,
                scene: Arc::clone(&self.scene),
            },
            events: PlantedEvents {
                first_contact,
                lift,
                release,
            },
        }
    }

    /// Generates `n` trajectories with step counts drawn from `steps`.
    pub fn generate_many(
        &mut self,
        n: usize,
        steps: std::ops::RangeInclusive<usize>,
    ) -> Vec<SynthTrajectory> {
        (0..n)
            .map(|i| {
                let params = SynthParams {
                    steps: self.rng.random_range(steps.clone()),
                    collision_prob: self.rng.random_range(0.0..0.9),
                    jitter: self.rng.random_range(0.0005..0.004),
                    ..SynthParams::default()
                };
                self.generate_with_events(&format!("traj_{i:03}"), &params)
            })
            .collect()
    }
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}
