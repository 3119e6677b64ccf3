//! Feature formulas checked against straight-loop reimplementations and
//! geometric invariances.

use std::sync::Arc;

use farpls_core::features::{
    dataset_feature_stats, detect_phase_events, extract_all, extract_feature_series,
    extract_feature_vector, FeatureConfig, FeatureVector, FEATURE_COUNT,
};
use farpls_core::synth::{SynthParams, TrajectorySynth};
use farpls_core::trajectory::{Trajectory, TARGET_CAN};
use proptest::prelude::*;

mod common;
use common::naive;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

fn sample(seed: u64, steps: usize, with_velocities: bool) -> Trajectory {
    TrajectorySynth::new(seed).generate(
        "o",
        &SynthParams {
            steps,
            with_velocities,
            ..Default::default()
        },
    )
}

#[test]
fn series_match_naive_oracle() {
    let cfg = FeatureConfig::default();
    for seed in 0..20 {
        let traj = sample(seed, 30, seed % 2 == 0);
        let got = extract_feature_series(&traj, &cfg);
        let want = naive::series(&traj, cfg.min_displacement);
        for t in 0..traj.frames.len() {
            let pairs = [
                (got.num_collisions[t], want.num_collisions[t]),
                (got.dis_to_left[t], want.edges[t][0]),
                (got.dis_to_right[t], want.edges[t][1]),
                (got.dis_to_front[t], want.edges[t][2]),
                (got.dis_to_back[t], want.edges[t][3]),
                (got.dis_to_table[t], want.height[t]),
                (got.speed[t], want.speed[t]),
                (got.pseudo_cost_cum[t], want.pseudo_cost[t]),
                (got.speed_smoothness_running[t], want.speed_smooth[t]),
                (got.trajectory_smoothness_running[t], want.traj_smooth[t]),
                (got.rel_angle[t], want.rel_angle[t]),
                (got.grasp_offset[t][0], want.offset[t][0]),
                (got.grasp_offset[t][1], want.offset[t][1]),
                (got.grasp_offset[t][2], want.offset[t][2]),
            ];
            for (i, (a, b)) in pairs.iter().enumerate() {
                assert!(
                    close(*a, *b, 1e-9),
                    "seed {seed} t {t} channel {i}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn events_and_scalars_match_naive_oracle() {
    let cfg = FeatureConfig::default();
    for seed in 0..20 {
        let traj = sample(100 + seed, 40 + 5 * seed as usize, seed % 3 == 0);
        let ev = detect_phase_events(&traj, &cfg).unwrap();
        let want_ev = naive::events(&traj, cfg.lift_threshold);
        assert_eq!((ev.t_reach, ev.t_grip, ev.t_release), want_ev);
        let got =
            extract_feature_vector(&traj, &extract_feature_series(&traj, &cfg), &ev).to_array();
        let want = naive::vector(&traj, &naive::series(&traj, cfg.min_displacement), want_ev);
        for i in 0..FEATURE_COUNT {
            assert!(
                close(got[i], want[i], 1e-9),
                "seed {seed} feature {i}: {} vs {}",
                got[i],
                want[i]
            );
        }
    }
}

#[test]
fn dataset_stats_match_two_pass_oracle() {
    let cfg = FeatureConfig::default();
    let mut synth = TrajectorySynth::new(77);
    let vectors: Vec<FeatureVector> = synth
        .generate_many(30, 30..=120)
        .iter()
        .map(|g| extract_all(&g.trajectory, &cfg).unwrap().vector)
        .collect();
    let stats = dataset_feature_stats(&vectors).unwrap();
    for i in 0..FEATURE_COUNT {
        let xs: Vec<f64> = vectors.iter().map(|v| v.to_array()[i]).collect();
        let mut mean = 0.0;
        for x in &xs {
            mean += x;
        }
        mean /= xs.len() as f64;
        let mut var = 0.0;
        for x in &xs {
            var += (x - mean) * (x - mean);
        }
        let std = (var / xs.len() as f64).sqrt();
        let st = stats.get(i);
        assert!(
            close(st.mean, mean, 1e-12) && close(st.std, std, 1e-12),
            "feature {i}"
        );
        assert!(st.std >= 0.0 && st.min <= st.mean && st.mean <= st.max);
    }
}

fn translated(traj: &Trajectory, d: [f64; 3]) -> Trajectory {
    let mut scene = (*traj.scene).clone();
    scene.table.x_min += d[0];
    scene.table.x_max += d[0];
    scene.table.y_min += d[1];
    scene.table.y_max += d[1];
    scene.table.surface_z += d[2];
    let mut out = traj.clone();
    out.scene = Arc::new(scene);
    for f in &mut out.frames {
        for (p, step) in f.eef_pos.iter_mut().zip(d) {
            *p += step;
        }
        for pose in f.object_poses.values_mut() {
            for (p, step) in pose.pos.iter_mut().zip(d) {
                *p += step;
            }
        }
    }
    out
}

fn reversed(traj: &Trajectory) -> Trajectory {
    let mut out = traj.clone();
    out.frames.reverse();
    for (i, f) in out.frames.iter_mut().enumerate() {
        f.index = i;
        f.eef_lin_vel = None;
        f.eef_ang_vel = None;
    }
    out
}

/// Linear interpolation of robot motion at `k` times the frame rate; object
/// poses and contacts are held from the preceding original frame.
fn upsampled(traj: &Trajectory, k: usize) -> Trajectory {
    let mut scene = (*traj.scene).clone();
    scene.fps *= k as u32;
    let mut frames = Vec::new();
    let s = traj.steps();
    for j in 0..=s * k {
        let (i, r) = (j / k, j % k);
        let a = &traj.frames[i];
        let mut f = a.clone();
        f.index = j;
        f.eef_lin_vel = None;
        f.eef_ang_vel = None;
        if r > 0 {
            let b = &traj.frames[i + 1];
            let w = r as f64 / k as f64;
            for c in 0..3 {
                f.eef_pos[c] = a.eef_pos[c] + (b.eef_pos[c] - a.eef_pos[c]) * w;
            }
            for (q, (qa, qb)) in f
                .joint_angles
                .iter_mut()
                .zip(a.joint_angles.iter().zip(&b.joint_angles))
            {
                *q = qa + (qb - qa) * w;
            }
        }
        frames.push(f);
    }
    Trajectory {
        id: traj.id.clone(),
        source: traj.source,
        frames,
        scene: Arc::new(scene),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rigid_translation_leaves_features_unchanged(
        seed in 0u64..1000,
        dx in -5.0f64..5.0, dy in -5.0f64..5.0, dz in -2.0f64..2.0,
    ) {
        let cfg = FeatureConfig::default();
        let traj = sample(seed, 50, false);
        let a = extract_all(&traj, &cfg).unwrap();
        let b = extract_all(&translated(&traj, [dx, dy, dz]), &cfg).unwrap();
        prop_assert_eq!(a.events, b.events);
        for (x, y) in a.vector.to_array().iter().zip(b.vector.to_array()) {
            prop_assert!((x - y).abs() <= 1e-9 * 1f64.max(x.abs()), "{} vs {}", x, y);
        }
    }

    #[test]
    fn time_reversal_preserves_path_length_and_pseudo_cost(seed in 0u64..1000, steps in 30usize..120) {
        let cfg = FeatureConfig::default();
        let traj = sample(seed, steps, false);
        let rev = reversed(&traj);
        let total_path = |t: &Trajectory| -> Result<(f64, f64), TestCaseError> {
            let eef: f64 = t.frames.windows(2).map(|w| naive::len3([
                w[1].eef_pos[0] - w[0].eef_pos[0],
                w[1].eef_pos[1] - w[0].eef_pos[1],
                w[1].eef_pos[2] - w[0].eef_pos[2],
            ])).sum();
            let s = extract_feature_series(t, &cfg);
            let speed_path: f64 = s.speed.iter().sum::<f64>() / t.scene.fps as f64;
            prop_assert!((speed_path - eef).abs() <= 1e-9 * eef.max(1.0));
            let can_pos = |f: &farpls_core::trajectory::FrameState| f.object_poses[TARGET_CAN].pos;
            let can: f64 = t.frames.windows(2).map(|w| {
                let (a, b) = (can_pos(&w[0]), can_pos(&w[1]));
                naive::len3([b[0] - a[0], b[1] - a[1], b[2] - a[2]])
            }).sum();
            Ok((speed_path + can, s.pseudo_cost_cum[t.steps()]))
        };
        let (pa, ca) = total_path(&traj)?;
        let (pb, cb) = total_path(&rev)?;
        prop_assert!((pa - pb).abs() <= 1e-9 * pa.max(1.0));
        prop_assert!((ca - cb).abs() <= 1e-9 * ca.max(1.0));
    }

    #[test]
    fn upsampling_keeps_time_and_never_lengthens_paths(seed in 0u64..1000, k in 2usize..5) {
        let cfg = FeatureConfig::default();
        let traj = sample(seed, 40, false);
        let up = upsampled(&traj, k);
        let a = extract_all(&traj, &cfg).unwrap();
        let b = extract_all(&up, &cfg).unwrap();
        prop_assert_eq!(b.events.t_grip, a.events.t_grip * k);
        prop_assert!((b.vector.total_time - a.vector.total_time).abs() < 1.0 / traj.scene.fps as f64);
        prop_assert!(b.vector.reach_length <= a.vector.reach_length + 1e-9);
        prop_assert!(b.vector.grasp_length <= a.vector.grasp_length + 1e-9);
        prop_assert!(b.vector.transport_length <= a.vector.transport_length + 1e-9);
    }
}
