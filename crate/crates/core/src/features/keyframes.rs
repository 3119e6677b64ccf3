use serde::{Deserialize, Serialize};

use super::{FeatureConfig, FeatureSeries, PhaseEvents};
use crate::trajectory::{ContactPair, Trajectory};

/// A feature-critical frame and the playback window looped around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub step: usize,
    pub loop_start_s: f64,
    pub loop_end_s: f64,
    pub caption: String,
}

/// One maximal run of consecutive steps with the same collision contact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub pair: ContactPair,
    pub start_step: usize,
    pub end_step: usize,
    pub loop_start_s: f64,
    pub loop_end_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyframeSet {
    pub collisions: Vec<CollisionEvent>,
    pub nearest_edge: Keyframe,
    pub highest_point: Keyframe,
    pub pick_up: Keyframe,
    pub release: Keyframe,
}

const EDGE_NAMES: [&str; 4] = ["left", "right", "front", "back"];

fn window(start_s: f64, end_s: f64, half: f64, total: f64) -> (f64, f64) {
    ((start_s - half).max(0.0), (end_s + half).min(total))
}

pub fn extract_keyframes(
    traj: &Trajectory,
    series: &FeatureSeries,
    events: &PhaseEvents,
    config: &FeatureConfig,
) -> KeyframeSet {
    let fps = traj.scene.fps as f64;
    let total = traj.duration_s();
    let half = config.loop_half_window;
    let keyframe = |step: usize, caption: String| {
        let at = step as f64 / fps;
        let (loop_start_s, loop_end_s) = window(at, at, half, total);
        Keyframe {
            step,
            loop_start_s,
            loop_end_s,
            caption,
        }
    };

    // runs of each collision contact; a run is closed by the first step without it
    let mut collisions = Vec::new();
    let mut open: Vec<(ContactPair, usize)> = Vec::new();
    for (t, frame) in traj.frames.iter().enumerate() {
        let current: Vec<&ContactPair> = frame
            .contacts
            .iter()
            .filter(|c| !c.is_grasp_contact())
            .collect();
        let mut still_open = Vec::new();
        for (pair, start) in open.drain(..) {
            if current.contains(&&pair) {
                still_open.push((pair, start));
            } else {
                collisions.push((pair, start, t - 1));
            }
        }
        for pair in current {
            if !still_open.iter().any(|(p, _)| p == pair) {
                still_open.push((pair.clone(), t));
            }
        }
        open = still_open;
    }
    let last = traj.frames.len().saturating_sub(1);
    collisions.extend(open.into_iter().map(|(p, s)| (p, s, last)));
    collisions.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    let collisions = collisions
        .into_iter()
        .map(|(pair, start_step, end_step)| {
            let (loop_start_s, loop_end_s) =
                window(start_step as f64 / fps, end_step as f64 / fps, half, total);
            CollisionEvent {
                pair,
                start_step,
                end_step,
                loop_start_s,
                loop_end_s,
            }
        })
        .collect();

    let edges = [
        &series.dis_to_left,
        &series.dis_to_right,
        &series.dis_to_front,
        &series.dis_to_back,
    ];
    let mut nearest = (0, 0, f64::INFINITY);
    for t in 0..series.len() {
        for (e, ch) in edges.iter().enumerate() {
            if ch[t] < nearest.2 {
                nearest = (t, e, ch[t]);
            }
        }
    }
    let mut highest = (0, f64::NEG_INFINITY);
    for (t, &h) in series.dis_to_table.iter().enumerate() {
        if h > highest.1 {
            highest = (t, h);
        }
    }

    KeyframeSet {
        collisions,
        nearest_edge: keyframe(
            nearest.0,
            format!("Nearest point to edge ({})", EDGE_NAMES[nearest.1]),
        ),
        highest_point: keyframe(highest.0, "Highest point".into()),
        pick_up: keyframe(events.t_grip, "Pick up point".into()),
        release: keyframe(events.t_release, "Release point".into()),
    }
}
