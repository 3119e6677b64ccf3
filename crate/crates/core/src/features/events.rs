use serde::{Deserialize, Serialize};

use super::{FeatureConfig, FeatureError};
use crate::trajectory::{Trajectory, TARGET_CAN};

/// Step indices segmenting a pick-and-place episode.
///
/// `t_grip` is the pick-up point and `t_release` the release point;
/// `0 ≤ t_reach ≤ t_grip < t_release ≤ s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseEvents {
    pub t_reach: usize,
    pub t_grip: usize,
    pub t_release: usize,
}

pub fn detect_phase_events(
    traj: &Trajectory,
    config: &FeatureConfig,
) -> Result<PhaseEvents, FeatureError> {
    let frames = &traj.frames;
    let any_finger = |t: usize| {
        let (l, r) = frames[t].finger_contacts(TARGET_CAN);
        l || r
    };
    let t_reach = (0..frames.len())
        .find(|&t| any_finger(t))
        .ok_or(FeatureError::PhaseNotFound(
            "no finger contact with the target can",
        ))?;

    let rest_z = traj.can_pos(0)[2];
    let t_grip = (t_reach..frames.len())
        .find(|&t| {
            let (l, r) = frames[t].finger_contacts(TARGET_CAN);
            l && r && traj.can_pos(t)[2] - rest_z > config.lift_threshold
        })
        .ok_or(FeatureError::PhaseNotFound(
            "target can never lifted while gripped",
        ))?;

    let t_release = (t_grip + 1..frames.len())
        .find(|&t| !any_finger(t))
        .ok_or(FeatureError::PhaseNotFound("target can never released"))?;

    Ok(PhaseEvents {
        t_reach,
        t_grip,
        t_release,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{SynthParams, TrajectorySynth};
    use crate::trajectory::{ContactPair, FINGER_LEFT, FINGER_RIGHT};

    #[test]
    fn planted_events_are_recovered() {
        let mut synth = TrajectorySynth::new(21);
        for g in synth.generate_many(25, 30..=160) {
            let ev = detect_phase_events(&g.trajectory, &FeatureConfig::default()).unwrap();
            assert_eq!(
                (ev.t_reach, ev.t_grip, ev.t_release),
                (g.events.first_contact, g.events.lift, g.events.release)
            );
        }
    }

    #[test]
    fn scripted_contact_lift_release() {
        let mut t = TrajectorySynth::new(2).generate(
            "s",
            &SynthParams {
                steps: 60,
                ..Default::default()
            },
        );
        let rest = t.can_pos(0);
        let grip_pair = [
            ContactPair::new(FINGER_LEFT, TARGET_CAN),
            ContactPair::new(FINGER_RIGHT, TARGET_CAN),
        ];
        for (i, f) in t.frames.iter_mut().enumerate() {
            f.contacts.retain(|c| !c.is_grasp_contact());
            if (10..41).contains(&i) {
                f.contacts.extend(grip_pair.iter().cloned());
            }
            let pose = f.object_poses.get_mut(TARGET_CAN).unwrap();
            pose.pos = rest;
            if (14..41).contains(&i) {
                pose.pos[2] += 0.05;
            }
        }
        let ev = detect_phase_events(&t, &FeatureConfig::default()).unwrap();
        assert_eq!((ev.t_reach, ev.t_grip, ev.t_release), (10, 14, 41));
    }

    #[test]
    fn never_lifting_is_phase_not_found() {
        let mut t = TrajectorySynth::new(4).generate("n", &SynthParams::default());
        let rest = t.can_pos(0);
        for f in t.frames.iter_mut() {
            f.object_poses.get_mut(TARGET_CAN).unwrap().pos = rest;
        }
        assert!(matches!(
            detect_phase_events(&t, &FeatureConfig::default()),
            Err(FeatureError::PhaseNotFound(_))
        ));
    }

    #[test]
    fn simultaneous_contact_and_lift_gives_equal_reach_and_grip() {
        let mut t = TrajectorySynth::new(6).generate(
            "n",
            &SynthParams {
                steps: 40,
                ..Default::default()
            },
        );
        let rest = t.can_pos(0);
        let grip_pair = [
            ContactPair::new(FINGER_LEFT, TARGET_CAN),
            ContactPair::new(FINGER_RIGHT, TARGET_CAN),
        ];
        for (i, f) in t.frames.iter_mut().enumerate() {
            f.contacts.retain(|c| !c.is_grasp_contact());
            let pose = f.object_poses.get_mut(TARGET_CAN).unwrap();
            pose.pos = rest;
            if (8..30).contains(&i) {
                f.contacts.extend(grip_pair.iter().cloned());
                pose.pos[2] += 0.02;
            }
        }
        let ev = detect_phase_events(&t, &FeatureConfig::default()).unwrap();
        assert_eq!((ev.t_reach, ev.t_grip, ev.t_release), (8, 8, 30));
    }
}
