use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::humanoid::{Pose, REQUIRED_JOINTS};

/// Centered moving-average window for the consistency filter, in frames.
pub const DEFAULT_CONSISTENCY_WINDOW: usize = 9;

const Z_THRESHOLD: f64 = 2.0;
/// Below this spread (m) a joint's distances are treated as constant.
const MIN_SPREAD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseSequence {
    frames: Vec<(f64, Pose)>,
}

impl PoseSequence {
    pub fn new(frames: Vec<(f64, Pose)>) -> Result<Self> {
        if frames.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::input("pose timestamps must be strictly increasing"));
        }
        if let Some((_, first)) = frames.first() {
            let names: Vec<&str> = first.names().collect();
            if frames.iter().any(|(_, p)| !p.names().eq(names.iter().copied())) {
                return Err(Error::input("every frame must carry the same joints"));
            }
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[(f64, Pose)] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frames at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self { frames: indices.iter().map(|&i| self.frames[i].clone()).collect() }
    }
}

/// Order-preserving partition of frame indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoseSplit {
    pub kept: Vec<usize>,
    pub rejected: Vec<usize>,
}

fn violates_walking_rules(p: &Pose) -> Result<bool> {
    let z = |n: &str| p.joint(n).map(|j| j[2]);
    let head = z("head")?;
    let pelvis = z("pelvis")?;
    let knee = z("left_knee")?.max(z("right_knee")?);
    let ankle = z("left_ankle")?.max(z("right_ankle")?);
    let shoulder = z("left_shoulder")?.min(z("right_shoulder")?);
    Ok(head <= knee || head <= pelvis || pelvis <= ankle || pelvis >= shoulder)
}

/// Rejects frames whose joint heights are inconsistent with upright walking:
/// the head must be above knees and pelvis, and the pelvis above the ankles
/// and below the shoulders.
pub fn pose_rule_filter(seq: &PoseSequence) -> Result<PoseSplit> {
    let mut split = PoseSplit::default();
    for (i, (_, p)) in seq.frames.iter().enumerate() {
        for name in REQUIRED_JOINTS {
            p.joint(name)?;
        }
        if violates_walking_rules(p)? {
            split.rejected.push(i);
        } else {
            split.kept.push(i);
        }
    }
    Ok(split)
}

/// Rejects frames where any joint lies unusually far from its own centered
/// moving average: per joint, distances are z-scored over the sequence and a
/// frame goes when some joint's z-score exceeds 2.
///
/// The window is centered in time. Frame slots come from the timestamps at
/// the smallest frame spacing, and an offset enters the average only when the
/// frames on both sides exist, so the window shrinks symmetrically at the
/// ends and around dropped frames and steady drift cancels.
pub fn pose_consistency_filter(seq: &PoseSequence, window: usize) -> Result<PoseSplit> {
    let n = seq.len();
    if window == 0 || window > n {
        return Err(Error::input(format!("window {window} does not fit a sequence of {n} frames")));
    }
    let half = window / 2;
    let slots = frame_slots(seq);
    let names: Vec<String> = seq.frames[0].1.names().map(str::to_string).collect();
    let positions: Vec<Vec<[f64; 3]>> = seq
        .frames
        .iter()
        .map(|(_, p)| p.iter().map(|(_, c)| *c).collect())
        .collect();

    let mut outlier = vec![false; n];
    for j in 0..names.len() {
        let dist: Vec<f64> = (0..n)
            .map(|i| {
                let mut span = vec![i];
                for d in 1..=half as i64 {
                    let lo = slots.binary_search(&(slots[i] - d));
                    let hi = slots.binary_search(&(slots[i] + d));
                    if let (Ok(lo), Ok(hi)) = (lo, hi) {
                        span.extend([lo, hi]);
                    }
                }
                let k = span.len() as f64;
                let mut avg = [0.0; 3];
                for &f in &span {
                    for a in 0..3 {
                        avg[a] += positions[f][j][a] / k;
                    }
                }
                let c = positions[i][j];
                ((c[0] - avg[0]).powi(2) + (c[1] - avg[1]).powi(2) + (c[2] - avg[2]).powi(2)).sqrt()
            })
            .collect();
        let mean = dist.iter().sum::<f64>() / n as f64;
        let sd = (dist.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        if sd <= MIN_SPREAD {
            continue;
        }
        for (i, d) in dist.iter().enumerate() {
            if (d - mean) / sd > Z_THRESHOLD {
                outlier[i] = true;
            }
        }
    }
    let mut split = PoseSplit::default();
    for (i, o) in outlier.into_iter().enumerate() {
        if o {
            split.rejected.push(i);
        } else {
            split.kept.push(i);
        }
    }
    Ok(split)
}

/// Integer frame slot of every frame, counted in the smallest timestamp step.
fn frame_slots(seq: &PoseSequence) -> Vec<i64> {
    let t = |i: usize| seq.frames[i].0;
    let step = (1..seq.len()).map(|i| t(i) - t(i - 1)).fold(f64::INFINITY, f64::min);
    if !step.is_finite() {
        return vec![0; seq.len()];
    }
    (0..seq.len()).map(|i| ((t(i) - t(0)) / step).round() as i64).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PoseFilterReport {
    pub split: PoseSplit,
    pub rejected_by_rule: usize,
    pub rejected_by_consistency: usize,
}

/// Rule filter, then the consistency filter on the surviving frames. Indices
/// in the result refer to the input sequence.
pub fn apply_pose_filters(seq: &PoseSequence, window: usize) -> Result<PoseFilterReport> {
    let rule = pose_rule_filter(seq)?;
    let survivors = seq.select(&rule.kept);
    let cons = pose_consistency_filter(&survivors, window.min(survivors.len().max(1)))?;
    let mut rejected: Vec<usize> = rule.rejected.clone();
    rejected.extend(cons.rejected.iter().map(|&k| rule.kept[k]));
    rejected.sort_unstable();
    let kept: Vec<usize> = cons.kept.iter().map(|&k| rule.kept[k]).collect();
    Ok(PoseFilterReport {
        rejected_by_rule: rule.rejected.len(),
        rejected_by_consistency: cons.rejected.len(),
        split: PoseSplit { kept, rejected },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datakit::walking_pose;
    use crate::geometry::Rigid2;

    fn standing() -> Pose {
        walking_pose(0.0, 0.0, 0.0).joints
    }

    fn seq_of(poses: Vec<Pose>) -> PoseSequence {
        PoseSequence::new(poses.into_iter().enumerate().map(|(i, p)| (i as f64 * 0.1, p)).collect())
            .unwrap()
    }

    #[test]
    fn standing_pose_kept() {
        let s = pose_rule_filter(&seq_of(vec![standing()])).unwrap();
        assert_eq!(s.kept, vec![0]);
    }

    #[test]
    fn inverted_pose_rejected() {
        let inv = standing().map_positions(|_, p| [p[0], p[1], 2.0 - p[2]]);
        let s = pose_rule_filter(&seq_of(vec![standing(), inv])).unwrap();
        assert_eq!(s.rejected, vec![1]);
    }

    #[test]
    fn pelvis_above_shoulders_rejected() {
        let bent = standing().map_positions(|n, p| if n == "pelvis" { [p[0], p[1], 1.5] } else { p });
        assert_eq!(pose_rule_filter(&seq_of(vec![bent])).unwrap().rejected, vec![0]);
    }

    #[test]
    fn constant_sequence_nothing_rejected() {
        let s = pose_consistency_filter(&seq_of(vec![standing(); 30]), 9).unwrap();
        assert!(s.rejected.is_empty());
    }

    #[test]
    fn translating_sequence_nothing_rejected() {
        let poses = (0..50)
            .map(|i| standing().transformed(&Rigid2::new(0.0, [0.5 * i as f64, 0.1 * i as f64])))
            .collect();
        let s = pose_consistency_filter(&seq_of(poses), 9).unwrap();
        assert!(s.rejected.is_empty(), "{:?}", s.rejected);
    }

    #[test]
    fn single_joint_jump_rejected() {
        let mut poses: Vec<Pose> = (0..50)
            .map(|i| walking_pose(0.0, 1.0, 0.3 * i as f64).joints.transformed(&Rigid2::new(0.0, [0.04 * i as f64, 0.0])))
            .collect();
        poses[23] = poses[23].map_positions(|n, p| if n == "head" { [p[0], p[1] + 1.0, p[2]] } else { p });
        let s = pose_consistency_filter(&seq_of(poses), 9).unwrap();
        assert_eq!(s.rejected, vec![23]);
    }

    #[test]
    fn dropped_frames_keep_drift_cancelled() {
        let frames = (0..50)
            .filter(|i| i % 7 != 3)
            .map(|i| (0.1 * i as f64, standing().transformed(&Rigid2::new(0.0, [0.1 * i as f64, 0.0]))))
            .collect();
        let s = pose_consistency_filter(&PoseSequence::new(frames).unwrap(), 9).unwrap();
        assert!(s.rejected.is_empty(), "{:?}", s.rejected);
    }

    #[test]
    fn window_larger_than_sequence() {
        assert!(pose_consistency_filter(&seq_of(vec![standing(); 3]), 9).is_err());
    }
}
