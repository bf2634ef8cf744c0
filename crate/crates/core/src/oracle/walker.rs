use crate::error::{Error, Result};
use crate::geometry::{dot, heading_of, norm, scale, sub, wrap_angle, Vec2};
use crate::humanoid::HumanoidState;
use crate::trajectory::Trajectory;

use super::OracleParams;

const STILL: f64 = 1e-9;

/// Walker state after one simulated frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkerStep {
    pub position: Vec2,
    pub velocity: Vec2,
    pub heading: f64,
    /// Magnitude of the velocity change divided by the frame interval.
    pub acceleration: f64,
    pub reward: f64,
}

fn clamp_norm(v: Vec2, max: f64) -> Vec2 {
    let n = norm(v);
    if n > max {
        scale(v, max / n)
    } else {
        v
    }
}

/// Simulates the walker frame by frame. The walker starts at the state's root
/// with its heading and (capped) root velocity; waypoint `t` of `traj` is the
/// target for frame `t + 1`.
pub fn rollout_trace(
    traj: &Trajectory,
    state: &HumanoidState,
    params: &OracleParams,
) -> Result<Vec<WalkerStep>> {
    params.validate()?;
    if traj.points().iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::input("trajectory contains non-finite coordinates"));
    }
    let dt = traj.dt();
    let max_turn = params.turn_rate_max * dt;
    let max_dv = params.a_max * dt;

    let mut p = state.root();
    let mut v = clamp_norm(state.root_velocity, params.v_max);
    let mut heading = state.heading;
    let mut steps = Vec::with_capacity(traj.len());

    for &target in traj.points() {
        let desired = clamp_norm(scale(sub(target, p), 1.0 / dt), params.v_max);
        let candidate = if norm(desired) > STILL {
            let turn = wrap_angle(heading_of(desired) - heading).clamp(-max_turn, max_turn);
            let (s, c) = (heading + turn).sin_cos();
            let dir = [c, s];
            scale(dir, dot(desired, dir).max(0.0))
        } else {
            [0.0, 0.0]
        };
        let dv = clamp_norm(sub(candidate, v), max_dv);
        v = [v[0] + dv[0], v[1] + dv[1]];
        if norm(v) > STILL {
            let turn = wrap_angle(heading_of(v) - heading).clamp(-max_turn, max_turn);
            heading = wrap_angle(heading + turn);
        }
        p = [p[0] + v[0] * dt, p[1] + v[1] * dt];

        let err = sub(p, target);
        let accel = norm(dv) / dt;
        let follow = (-dot(err, err) / (params.follow_scale * params.follow_scale)).exp();
        let energy = (accel / params.a_max).powi(2);
        let reward = (params.w_follow * follow - params.w_energy * energy).clamp(0.0, 1.0);
        steps.push(WalkerStep { position: p, velocity: v, heading, acceleration: accel, reward });
    }
    Ok(steps)
}

/// Discounted reward normalized by the discount mass, so the result lies in [0, 1].
pub fn rollout(traj: &Trajectory, state: &HumanoidState, params: &OracleParams) -> Result<f64> {
    let steps = rollout_trace(traj, state, params)?;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut w = 1.0;
    for s in &steps {
        num += w * s.reward;
        den += w;
        w *= params.gamma;
    }
    Ok((num / den).clamp(0.0, 1.0))
}
