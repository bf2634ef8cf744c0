use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datakit::BankPose;
use crate::error::{Error, Result};
use crate::geometry::{add, heading_of, norm, rotate, scale, wrap_angle, Vec2};
use crate::humanoid::HumanoidState;
use crate::trajectory::Trajectory;

use super::OracleParams;

const STILL: f64 = 1e-9;
const MAX_ATTEMPTS: usize = 1000;

/// Bookkeeping for draws that had to be rejected and redrawn.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingStats {
    pub plausible_drawn: usize,
    pub implausible_drawn: usize,
    /// Still pose paired with a moving trajectory, or the reverse.
    pub skipped_speed_mismatch: usize,
}

/// Ways an unaligned pair is pushed further toward implausibility. Each is
/// drawn with equal probability; `Unchanged` keeps the plain random pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    HeadingFlip,
    SpeedScale(f64),
    /// Every displacement from `start` on turns by `per_step` radians relative to the previous one.
    SharpTurn { start: usize, per_step: f64 },
    Unchanged,
}

impl Perturbation {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_steps: usize, params: &OracleParams, dt: f64) -> Self {
        match rng.random_range(0..4) {
            3 => Perturbation::Unchanged,
            0 => Perturbation::HeadingFlip,
            1 => Perturbation::SpeedScale(rng.random_range(2.0..4.0)),
            _ => {
                let base = params.turn_rate_max * dt;
                let mag = rng.random_range(1.5 * base..2.5 * base);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                Perturbation::SharpTurn {
                    start: rng.random_range(1..n_steps.max(2)),
                    per_step: sign * mag,
                }
            }
        }
    }
}

fn first_moving(disp: &[Vec2]) -> Option<Vec2> {
    disp.iter().copied().find(|d| norm(*d) > STILL)
}

/// Rebuilds the future points from `start` using `disp` as displacements.
fn integrate(start: Vec2, disp: &[Vec2], dt: f64) -> Result<Trajectory> {
    let mut p = start;
    let pts = disp
        .iter()
        .map(|&d| {
            p = add(p, d);
            p
        })
        .collect();
    Trajectory::new(pts, dt)
}

/// Aligns a bank trajectory (start point plus future points) to a pose:
/// rotation about the start so the first moving step points along the pose
/// heading, uniform scaling so the first-step speed equals the pose speed,
/// and translation of the start onto the pose root. Returns the future points
/// only, or `None` when exactly one of pose and trajectory is still.
pub fn align_to_pose(traj: &Trajectory, pose: &BankPose, root: Vec2) -> Result<Option<Trajectory>> {
    let disp = traj.displacements();
    let dt = traj.dt();
    let traj_speed = norm(disp[0]) / dt;
    let pose_moving = pose.speed > STILL;
    let traj_moving = traj_speed > STILL;
    if pose_moving != traj_moving {
        return Ok(None);
    }
    let turn = first_moving(&disp).map_or(0.0, |d| wrap_angle(pose.heading - heading_of(d)));
    let k = if traj_moving { pose.speed / traj_speed } else { 1.0 };
    let aligned: Vec<Vec2> = disp.iter().map(|&d| scale(rotate(d, turn), k)).collect();
    integrate(root, &aligned, dt).map(Some)
}

fn check_banks(pose_bank: &[BankPose], traj_bank: &[Trajectory]) -> Result<()> {
    if pose_bank.is_empty() || traj_bank.is_empty() {
        return Err(Error::input("pose bank and trajectory bank must be non-empty"));
    }
    Ok(())
}

/// Draws a pose and a trajectory independently and aligns their orientation
/// and speed. Trajectory bank entries hold a start point followed by the
/// future points; the returned trajectory holds the future points only.
pub fn sample_plausible_pair<R: Rng + ?Sized>(
    pose_bank: &[BankPose],
    traj_bank: &[Trajectory],
    rng: &mut R,
    stats: &mut SamplingStats,
) -> Result<(Trajectory, HumanoidState)> {
    check_banks(pose_bank, traj_bank)?;
    for _ in 0..MAX_ATTEMPTS {
        let pose = pose_bank.choose(rng).unwrap();
        let traj = traj_bank.choose(rng).unwrap();
        let state = pose.to_state(pose.joints.root());
        match align_to_pose(traj, pose, state.root())? {
            Some(aligned) => {
                stats.plausible_drawn += 1;
                return Ok((aligned, state));
            }
            None => stats.skipped_speed_mismatch += 1,
        }
    }
    Err(Error::input("could not draw a pose/trajectory pair with compatible speeds"))
}

/// Draws a pose and a trajectory without aligning them (the trajectory is only
/// moved onto the pose root) and applies one perturbation, random when `None`.
pub fn sample_implausible_pair<R: Rng + ?Sized>(
    pose_bank: &[BankPose],
    traj_bank: &[Trajectory],
    rng: &mut R,
    perturbation: Option<Perturbation>,
    params: &OracleParams,
    stats: &mut SamplingStats,
) -> Result<(Trajectory, HumanoidState)> {
    check_banks(pose_bank, traj_bank)?;
    let pose = pose_bank.choose(rng).unwrap();
    let traj = traj_bank.choose(rng).unwrap();
    let state = pose.to_state(pose.joints.root());
    let dt = traj.dt();
    let mut disp = traj.displacements();
    let perturbation =
        perturbation.unwrap_or_else(|| Perturbation::random(rng, disp.len(), params, dt));
    apply_perturbation(&mut disp, perturbation, pose.heading);
    stats.implausible_drawn += 1;
    Ok((integrate(state.root(), &disp, dt)?, state))
}

fn apply_perturbation(disp: &mut [Vec2], perturbation: Perturbation, pose_heading: f64) {
    match perturbation {
        Perturbation::HeadingFlip => {
            let opposite = pose_heading + std::f64::consts::PI;
            if let Some(d) = first_moving(disp) {
                let turn = wrap_angle(opposite - heading_of(d));
                for d in disp.iter_mut() {
                    *d = rotate(*d, turn);
                }
            }
        }
        Perturbation::SpeedScale(k) => {
            for d in disp.iter_mut() {
                *d = scale(*d, k);
            }
        }
        Perturbation::Unchanged => {}
        Perturbation::SharpTurn { start, per_step } => {
            let start = start.min(disp.len().saturating_sub(1));
            for (i, d) in disp.iter_mut().enumerate().skip(start) {
                *d = rotate(*d, per_step * (i - start + 1) as f64);
            }
        }
    }
}
