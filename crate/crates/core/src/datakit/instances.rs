use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BankPose, TrajectoryDataset};
use crate::error::{Error, Result};
use crate::geometry::{heading_of, norm, scale, sub, Vec2};
use crate::humanoid::{ObservableState, Pose};
use crate::trajectory::Trajectory;

/// Bank poses within this speed difference (m/s) of the window are preferred.
const POSE_SPEED_TOLERANCE: f64 = 0.3;

/// One supervised example for the trajectory predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInstance {
    pub past: Trajectory,
    pub past_poses: Option<Vec<Pose>>,
    pub future: Trajectory,
    pub observable: ObservableState,
}

impl TrainingInstance {
    /// Last observed position; predictions are anchored here.
    pub fn anchor(&self) -> Vec2 {
        self.past.last()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub instances: usize,
    pub skipped_short_tracks: usize,
}

/// Direction of the last moving step of the past trajectory, 0 if it never moves.
pub(crate) fn past_heading(past: &[Vec2]) -> f64 {
    past.windows(2)
        .rev()
        .map(|w| sub(w[1], w[0]))
        .find(|d| norm(*d) > 1e-9)
        .map_or(0.0, heading_of)
}

/// Sliding windows of `t_p` past and `t_f` future points. The observable root
/// velocity is the last past displacement over dt; with a pose bank, a pose of
/// similar speed is drawn and turned to face the past heading at the last
/// observed point.
pub fn make_training_instances(
    dataset: &TrajectoryDataset,
    pose_bank: Option<&[BankPose]>,
    t_p: usize,
    t_f: usize,
    stride: usize,
    seed: u64,
) -> Result<(Vec<TrainingInstance>, InstanceStats)> {
    if t_p < 2 {
        return Err(Error::Config("t_p must be at least 2 to derive a velocity".into()));
    }
    if t_f < 2 {
        return Err(Error::Config("t_f must be at least 2".into()));
    }
    if pose_bank.is_some_and(|b| b.is_empty()) {
        return Err(Error::input("pose bank is empty"));
    }
    let stride = stride.max(1);
    let dt = dataset.dt;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = InstanceStats::default();
    let mut out = Vec::new();
    for track in &dataset.tracks {
        if track.points.len() < t_p + t_f {
            stats.skipped_short_tracks += 1;
            continue;
        }
        let mut s = 0;
        while s + t_p + t_f <= track.points.len() {
            let past_pts = &track.points[s..s + t_p];
            let future_pts = &track.points[s + t_p..s + t_p + t_f];
            let last = past_pts[t_p - 1];
            let velocity = scale(sub(last, past_pts[t_p - 2]), 1.0 / dt);
            let heading = past_heading(past_pts);
            let observable = match pose_bank {
                Some(bank) => {
                    let speed = norm(velocity);
                    let close: Vec<&BankPose> = bank
                        .iter()
                        .filter(|p| (p.speed - speed).abs() <= POSE_SPEED_TOLERANCE)
                        .collect();
                    let pose = match close.choose(&mut rng) {
                        Some(p) => *p,
                        None => bank
                            .iter()
                            .min_by(|a, b| (a.speed - speed).abs().total_cmp(&(b.speed - speed).abs()))
                            .unwrap(),
                    };
                    pose.aligned(heading, last, velocity).observable()
                }
                None => ObservableState::pose_free(last, velocity),
            };
            out.push(TrainingInstance {
                past: Trajectory::new(past_pts.to_vec(), dt)?,
                past_poses: None,
                future: Trajectory::new(future_pts.to_vec(), dt)?,
                observable,
            });
            s += stride;
        }
    }
    stats.instances = out.len();
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datakit::{generate_pose_bank, Track};
    use crate::geometry::wrap_angle;

    fn line_dataset(n: usize) -> TrajectoryDataset {
        let points = (0..n).map(|i| [0.3 * i as f64, 0.4 * i as f64]).collect();
        TrajectoryDataset {
            tracks: vec![Track { ped_id: "a".into(), start_frame: 0, points }],
            dt: 0.4,
            frame_step: 1,
            source: "test".into(),
        }
    }

    #[test]
    fn exact_length_gives_one_instance() {
        let (v, s) = make_training_instances(&line_dataset(20), None, 8, 12, 1, 0).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(s.instances, 1);
    }

    #[test]
    fn short_track_skipped() {
        let (v, s) = make_training_instances(&line_dataset(10), None, 8, 12, 1, 0).unwrap();
        assert!(v.is_empty());
        assert_eq!(s.skipped_short_tracks, 1);
    }

    #[test]
    fn momentary_observation_and_pose_alignment() {
        let bank = generate_pose_bank(20, (0.8, 1.6), 1).unwrap();
        let (v, _) = make_training_instances(&line_dataset(20), Some(&bank), 2, 12, 3, 7).unwrap();
        assert!(!v.is_empty());
        for inst in &v {
            assert_eq!(inst.past.len(), 2);
            let d = sub(inst.past.last(), inst.past.first());
            let h = heading_of(d);
            let pose_h = inst.observable.heading().unwrap();
            assert!(wrap_angle(pose_h - h).abs() < 1e-9);
            let v_expect = scale(d, 1.0 / 0.4);
            assert!(norm(sub(inst.observable.root_velocity, v_expect)) < 1e-6);
            assert!(norm(sub(inst.observable.root, inst.anchor())) < 1e-12);
        }
    }
}
