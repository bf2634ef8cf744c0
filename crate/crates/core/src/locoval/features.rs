use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{heading_of, norm, rotate, sub, Rigid2, Vec2};
use crate::humanoid::ObservableState;
use crate::trajectory::Trajectory;

/// Which cues the surrogate consumes and in what shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureLayout {
    pub t_f: usize,
    /// Joint names in feature order; empty when poses are excluded.
    pub joint_names: Vec<String>,
    pub include_pose: bool,
    pub include_velocity: bool,
}

impl FeatureLayout {
    pub fn n_joints(&self) -> usize {
        self.joint_names.len()
    }

    pub fn input_size(&self) -> usize {
        2 * self.t_f
            + if self.include_pose { 3 * self.n_joints() } else { 0 }
            + if self.include_velocity { 2 } else { 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_f < 1 {
            return Err(Error::Config("t_f must be positive".into()));
        }
        if self.include_pose && self.joint_names.is_empty() {
            return Err(Error::Config("a pose-consuming layout needs joint names".into()));
        }
        Ok(())
    }
}

/// Origin and yaw of the canonical frame: the observed root, facing along
/// the shoulder heading when poses are used and along the root velocity
/// otherwise. A still, pose-free observation falls back to the first moving
/// step of the trajectory.
pub fn canonical_frame(layout: &FeatureLayout, traj: &Trajectory, obs: &ObservableState) -> Result<(Vec2, f64)> {
    let heading = if layout.include_pose {
        obs.joints
            .as_ref()
            .ok_or_else(|| Error::input("layout requires a pose but the observation has none"))?
            .facing()
    } else if norm(obs.root_velocity) > 1e-9 {
        heading_of(obs.root_velocity)
    } else {
        let mut prev = obs.root;
        traj.points()
            .iter()
            .map(|&p| {
                let d = sub(p, prev);
                prev = p;
                d
            })
            .find(|d| norm(*d) > 1e-9)
            .map_or(0.0, heading_of)
    };
    Ok((obs.root, heading))
}

fn check(layout: &FeatureLayout, traj: &Trajectory, obs: &ObservableState) -> Result<()> {
    if traj.len() != layout.t_f {
        return Err(Error::Shape { expected: layout.t_f, got: traj.len() });
    }
    if layout.include_pose {
        let pose = obs
            .joints
            .as_ref()
            .ok_or_else(|| Error::input("layout requires a pose but the observation has none"))?;
        if !pose.names().eq(layout.joint_names.iter().map(String::as_str)) {
            return Err(Error::input("observation joints do not match the feature layout"));
        }
    }
    Ok(())
}

/// Feature vector in the canonical frame: per-step displacements of the
/// trajectory (the first measured from the root), then joints relative to the
/// root, then root velocity.
pub fn canonicalize(layout: &FeatureLayout, traj: &Trajectory, obs: &ObservableState) -> Result<Vec<f64>> {
    check(layout, traj, obs)?;
    let (root, heading) = canonical_frame(layout, traj, obs)?;
    let mut f = Vec::with_capacity(layout.input_size());
    let mut prev = root;
    for &p in traj.points() {
        let d = rotate(sub(p, prev), -heading);
        f.extend_from_slice(&d);
        prev = p;
    }
    if layout.include_pose {
        for (_, j) in obs.joints.as_ref().unwrap().iter() {
            let r = rotate(sub([j[0], j[1]], root), -heading);
            f.extend_from_slice(&[r[0], r[1], j[2]]);
        }
    }
    if layout.include_velocity {
        f.extend_from_slice(&rotate(obs.root_velocity, -heading));
    }
    Ok(f)
}

/// Trajectory and observation moved into the canonical frame.
pub fn canonical_inputs(
    layout: &FeatureLayout,
    traj: &Trajectory,
    obs: &ObservableState,
) -> Result<(Trajectory, ObservableState)> {
    let (root, heading) = canonical_frame(layout, traj, obs)?;
    let tf = Rigid2::new(-heading, rotate([-root[0], -root[1]], -heading));
    Ok((traj.transformed(&tf), obs.transformed(&tf)))
}

/// Maps a gradient with respect to the displacement features back onto the
/// world-frame trajectory points.
pub(crate) fn displacement_grad_to_points(grad_disp: &[f64], heading: f64) -> Vec<Vec2> {
    let t_f = grad_disp.len() / 2;
    (0..t_f)
        .map(|t| {
            let mut g = [grad_disp[2 * t], grad_disp[2 * t + 1]];
            if t + 1 < t_f {
                g[0] -= grad_disp[2 * t + 2];
                g[1] -= grad_disp[2 * t + 3];
            }
            rotate(g, heading)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datakit::walking_pose;
    use std::f64::consts::FRAC_PI_2;

    fn layout(pose: bool) -> FeatureLayout {
        FeatureLayout {
            t_f: 3,
            joint_names: if pose {
                walking_pose(0.0, 1.0, 0.0).joints.names().map(String::from).collect()
            } else {
                vec![]
            },
            include_pose: pose,
            include_velocity: true,
        }
    }

    #[test]
    fn canonical_input_is_raw_concatenation() {
        let pose = walking_pose(0.0, 1.0, 0.2);
        let obs = pose.to_state([0.0, 0.0]).observable();
        let traj = Trajectory::new(vec![[0.4, 0.0], [0.8, 0.1], [1.2, 0.1]], 0.4).unwrap();
        let f = canonicalize(&layout(true), &traj, &obs).unwrap();
        let mut expect = vec![0.4, 0.0, 0.4, 0.1, 0.4, 0.0];
        for (_, j) in obs.joints.as_ref().unwrap().iter() {
            expect.extend_from_slice(j);
        }
        expect.extend_from_slice(&obs.root_velocity);
        assert_eq!(f.len(), expect.len());
        for (a, b) in f.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn quarter_turn_velocity() {
        let obs = ObservableState::pose_free([2.0, 2.0], [0.0, 1.0]);
        let traj = Trajectory::new(vec![[2.0, 2.4], [2.0, 2.8], [2.0, 3.2]], 0.4).unwrap();
        let f = canonicalize(&layout(false), &traj, &obs).unwrap();
        assert!((f[6] - 1.0).abs() < 1e-15 && f[7].abs() < 1e-15);
        let pose = walking_pose(FRAC_PI_2, 1.0, 0.0);
        let obs = pose.to_state([0.0, 0.0]).observable();
        let f = canonicalize(&layout(true), &Trajectory::new(vec![[0.0, 0.4]; 3], 0.4).unwrap(), &obs).unwrap();
        let n = f.len();
        assert!((f[n - 2] - 1.0).abs() < 1e-12 && f[n - 1].abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let obs = ObservableState::pose_free([0.0, 0.0], [1.0, 0.0]);
        let traj = Trajectory::new(vec![[0.0, 0.0]; 4], 0.4).unwrap();
        assert!(matches!(canonicalize(&layout(false), &traj, &obs), Err(Error::Shape { .. })));
    }

    #[test]
    fn pose_layout_without_pose_is_an_error() {
        let obs = ObservableState::pose_free([0.0, 0.0], [1.0, 0.0]);
        let traj = Trajectory::new(vec![[0.0, 0.0]; 3], 0.4).unwrap();
        assert!(canonicalize(&layout(true), &traj, &obs).is_err());
    }
}
