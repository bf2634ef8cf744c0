use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sub, wrap_angle, Rigid2, Vec2};
use crate::humanoid::{HumanoidState, Pose};

/// A pose-bank entry: joints plus the heading and walking speed they depict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankPose {
    pub name: String,
    pub joints: Pose,
    pub heading: f64,
    pub speed: f64,
}

impl BankPose {
    /// Velocity implied by the entry's heading and speed.
    pub fn velocity(&self) -> Vec2 {
        [self.speed * self.heading.cos(), self.speed * self.heading.sin()]
    }

    /// Oracle state with the pelvis moved to `root`.
    pub fn to_state(&self, root: Vec2) -> HumanoidState {
        let shift = Rigid2::new(0.0, sub(root, self.joints.root()));
        self.state_with(shift, self.heading, self.velocity())
    }

    /// Rotates the pose about its pelvis to face `heading`, moves the pelvis to
    /// `root` and assigns `velocity` as the root velocity.
    pub fn aligned(&self, heading: f64, root: Vec2, velocity: Vec2) -> HumanoidState {
        let turn = wrap_angle(heading - self.heading);
        let pivot = self.joints.root();
        let rotated = crate::geometry::rotate(pivot, turn);
        let tf = Rigid2::new(turn, sub(root, rotated));
        self.state_with(tf, heading, velocity)
    }

    fn state_with(&self, tf: Rigid2, heading: f64, velocity: Vec2) -> HumanoidState {
        let joints = self.joints.transformed(&tf);
        let joint_velocities: BTreeMap<String, [f64; 3]> =
            joints.names().map(|n| (n.to_string(), [velocity[0], velocity[1], 0.0])).collect();
        HumanoidState::new(joints, heading, velocity, joint_velocities)
            .expect("bank poses are validated on construction")
    }
}

/// Parametric walking skeleton facing `heading`, pelvis over the origin.
/// `phase` selects the point in the gait cycle.
pub fn walking_pose(heading: f64, speed: f64, phase: f64) -> BankPose {
    let lean = 0.05 * speed;
    let half_stride = 0.15 + 0.15 * speed;
    let swing = half_stride * phase.sin();
    let lift = 0.05 * phase.cos().max(0.0);
    let pelvis_z = 0.95 - 0.02 * speed;

    let mut j = BTreeMap::new();
    j.insert("pelvis".to_string(), [0.0, 0.0, pelvis_z]);
    j.insert("head".to_string(), [1.5 * lean, 0.0, 1.70 - 0.02 * speed]);
    j.insert("left_shoulder".to_string(), [lean, 0.19, 1.45]);
    j.insert("right_shoulder".to_string(), [lean, -0.19, 1.45]);
    j.insert("left_knee".to_string(), [0.5 * swing, 0.1, 0.5 + 0.03 * phase.sin().abs()]);
    j.insert("right_knee".to_string(), [-0.5 * swing, -0.1, 0.5 + 0.03 * phase.sin().abs()]);
    j.insert("left_ankle".to_string(), [swing, 0.1, 0.08 + lift]);
    j.insert("right_ankle".to_string(), [-swing, -0.1, 0.08 + 0.05 * (-phase.cos()).max(0.0)]);

    let pose = Pose::new(j).expect("all required joints present").transformed(&Rigid2::new(heading, [0.0, 0.0]));
    BankPose {
        name: format!("walk_v{speed:.2}_p{phase:.2}"),
        joints: pose,
        heading: wrap_angle(heading),
        speed,
    }
}

/// Procedural pose bank with headings uniform on the circle and speeds uniform in `speed_range`.
pub fn generate_pose_bank(n: usize, speed_range: (f64, f64), seed: u64) -> Result<Vec<BankPose>> {
    if !(speed_range.0 >= 0.0 && speed_range.0 <= speed_range.1) {
        return Err(Error::Config(format!("bad pose speed range {speed_range:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|i| {
            let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let speed = if speed_range.1 > speed_range.0 {
                rng.random_range(speed_range.0..speed_range.1)
            } else {
                speed_range.0
            };
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let mut p = walking_pose(heading, speed, phase);
            p.name = format!("walk_{i:04}");
            p
        })
        .collect())
}

pub fn save_pose_bank(path: &Path, bank: &[BankPose]) -> Result<()> {
    let text = serde_json::to_string_pretty(bank)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_pose_bank(path: &Path) -> Result<Vec<BankPose>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bank: Vec<BankPose> = serde_json::from_str(&text)?;
    for p in &bank {
        // deserialization bypasses Pose::new
        Pose::new(p.joints.iter().map(|(k, v)| (k.to_string(), *v)).collect())?;
        if !(p.speed >= 0.0 && p.speed.is_finite() && p.heading.is_finite()) {
            return Err(Error::input(format!("pose '{}' has invalid heading/speed", p.name)));
        }
    }
    Ok(bank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::norm;

    #[test]
    fn walking_pose_faces_heading() {
        for h in [-3.0, -1.0, 0.0, 0.7, 2.9] {
            let p = walking_pose(h, 1.2, 0.4);
            assert!((wrap_angle(p.joints.facing() - h)).abs() < 1e-12);
        }
    }

    #[test]
    fn aligned_state_matches_request() {
        let p = walking_pose(0.3, 1.0, 1.0);
        let s = p.aligned(-2.0, [4.0, -1.0], [0.5, 0.1]);
        assert!((s.joints.facing() + 2.0).abs() < 1e-12);
        assert!(norm(sub(s.root(), [4.0, -1.0])) < 1e-12);
        assert_eq!(s.root_velocity, [0.5, 0.1]);
    }

    #[test]
    fn bank_json_round_trip() {
        let bank = generate_pose_bank(5, (0.8, 1.6), 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bank.json");
        save_pose_bank(&path, &bank).unwrap();
        assert_eq!(load_pose_bank(&path).unwrap(), bank);
    }
}
