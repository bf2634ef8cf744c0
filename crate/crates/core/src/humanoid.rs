//! Humanoid pose and state records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{heading_of, norm, rotate, wrap_angle, Rigid2, Vec2};

/// Joints every pose must carry.
pub const REQUIRED_JOINTS: [&str; 8] = [
    "head",
    "left_shoulder",
    "right_shoulder",
    "pelvis",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
];

/// Named 3-D joint positions in meters, z up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pose {
    joints: BTreeMap<String, [f64; 3]>,
}

impl Pose {
    pub fn new(joints: BTreeMap<String, [f64; 3]>) -> Result<Self> {
        for name in REQUIRED_JOINTS {
            if !joints.contains_key(name) {
                return Err(Error::input(format!("pose is missing joint '{name}'")));
            }
        }
        if joints.values().flatten().any(|c| !c.is_finite()) {
            return Err(Error::input("pose contains non-finite coordinates"));
        }
        Ok(Self { joints })
    }

    pub fn joint(&self, name: &str) -> Result<[f64; 3]> {
        self.joints
            .get(name)
            .copied()
            .ok_or_else(|| Error::input(format!("pose is missing joint '{name}'")))
    }

    /// Joints in name order; this is the order used for feature vectors.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64; 3])> {
        self.joints.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.joints.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    /// Ground-plane position of the pelvis.
    pub fn root(&self) -> Vec2 {
        let p = self.joints["pelvis"];
        [p[0], p[1]]
    }

    /// Facing direction: the shoulder axis (left minus right) turned a quarter clockwise.
    pub fn facing(&self) -> f64 {
        let l = self.joints["left_shoulder"];
        let r = self.joints["right_shoulder"];
        let across = [l[0] - r[0], l[1] - r[1]];
        heading_of(rotate(across, -std::f64::consts::FRAC_PI_2))
    }

    pub fn transformed(&self, tf: &Rigid2) -> Self {
        Self {
            joints: self
                .joints
                .iter()
                .map(|(k, &p)| (k.clone(), tf.apply_point3(p)))
                .collect(),
        }
    }

    pub fn map_positions(&self, mut f: impl FnMut(&str, [f64; 3]) -> [f64; 3]) -> Self {
        Self {
            joints: self.joints.iter().map(|(k, &p)| (k.clone(), f(k, p))).collect(),
        }
    }
}

/// Full initial state handed to the locomotion oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanoidState {
    pub joints: Pose,
    pub heading: f64,
    pub root_velocity: Vec2,
    /// Per-joint velocities; only the oracle sees these.
    pub joint_velocities: BTreeMap<String, [f64; 3]>,
}

impl HumanoidState {
    pub fn new(
        joints: Pose,
        heading: f64,
        root_velocity: Vec2,
        joint_velocities: BTreeMap<String, [f64; 3]>,
    ) -> Result<Self> {
        if !heading.is_finite() || root_velocity.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("humanoid state contains non-finite values"));
        }
        if joint_velocities.values().flatten().any(|c| !c.is_finite()) {
            return Err(Error::input("joint velocities contain non-finite values"));
        }
        Ok(Self { joints, heading: wrap_angle(heading), root_velocity, joint_velocities })
    }

    pub fn root(&self) -> Vec2 {
        self.joints.root()
    }

    pub fn speed(&self) -> f64 {
        norm(self.root_velocity)
    }

    /// The subset of the state visible at observation time.
    pub fn observable(&self) -> ObservableState {
        ObservableState {
            root: self.root(),
            joints: Some(self.joints.clone()),
            root_velocity: self.root_velocity,
        }
    }

    pub fn transformed(&self, tf: &Rigid2) -> Self {
        Self {
            joints: self.joints.transformed(tf),
            heading: wrap_angle(self.heading + tf.angle),
            root_velocity: tf.apply_vector(self.root_velocity),
            joint_velocities: self
                .joint_velocities
                .iter()
                .map(|(k, &v)| (k.clone(), tf.apply_vector3(v)))
                .collect(),
        }
    }
}

/// Observation-time cues: initial joints (optional for pose-free data) and root velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableState {
    pub root: Vec2,
    pub joints: Option<Pose>,
    pub root_velocity: Vec2,
}

impl ObservableState {
    pub fn with_pose(joints: Pose, root_velocity: Vec2) -> Self {
        Self { root: joints.root(), joints: Some(joints), root_velocity }
    }

    pub fn pose_free(root: Vec2, root_velocity: Vec2) -> Self {
        Self { root, joints: None, root_velocity }
    }

    /// Heading used for canonicalization: shoulder facing when a pose exists,
    /// otherwise the velocity direction, otherwise `None`.
    pub fn heading(&self) -> Option<f64> {
        if let Some(p) = &self.joints {
            return Some(p.facing());
        }
        if norm(self.root_velocity) > 1e-9 {
            return Some(heading_of(self.root_velocity));
        }
        None
    }

    pub fn transformed(&self, tf: &Rigid2) -> Self {
        Self {
            root: tf.apply_point(self.root),
            joints: self.joints.as_ref().map(|p| p.transformed(tf)),
            root_velocity: tf.apply_vector(self.root_velocity),
        }
    }
}
