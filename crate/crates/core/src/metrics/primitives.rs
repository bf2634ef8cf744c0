use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{heading_of, norm, wrap_angle};
use crate::trajectory::Trajectory;

/// Steps shorter than this (m) keep the previous heading.
pub const STILL_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsPrimitives {
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
    pub angular_velocity: Vec<f64>,
    pub angular_acceleration: Vec<f64>,
}

/// Speed, tangential acceleration, turn rate and turn-rate change along a
/// trajectory. A leading still prefix has no heading and contributes zero
/// angular terms.
pub fn physics_primitives(traj: &Trajectory) -> Result<PhysicsPrimitives> {
    if traj.len() < 4 {
        return Err(Error::input(format!("physics primitives need 4 points, got {}", traj.len())));
    }
    let dt = traj.dt();
    let disp = traj.displacements();
    let velocity: Vec<f64> = disp.iter().map(|&d| norm(d) / dt).collect();
    let acceleration: Vec<f64> = velocity.windows(2).map(|w| (w[1] - w[0]) / dt).collect();

    let mut current: Option<f64> = None;
    let headings: Vec<Option<f64>> = disp
        .iter()
        .map(|&d| {
            if norm(d) >= STILL_STEP {
                current = Some(heading_of(d));
            }
            current
        })
        .collect();
    let angular_velocity: Vec<f64> = headings
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => wrap_angle(b - a) / dt,
            _ => 0.0,
        })
        .collect();
    let angular_acceleration: Vec<f64> = angular_velocity.windows(2).map(|w| (w[1] - w[0]) / dt).collect();
    Ok(PhysicsPrimitives { velocity, acceleration, angular_velocity, angular_acceleration })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_constant_velocity() {
        let t = Trajectory::new((0..8).map(|i| [0.5 * i as f64, 0.2 * i as f64]).collect(), 0.4).unwrap();
        let p = physics_primitives(&t).unwrap();
        assert!(p.acceleration.iter().all(|a| a.abs() < 1e-12));
        assert!(p.angular_velocity.iter().all(|a| a.abs() < 1e-12));
        assert!(p.angular_acceleration.iter().all(|a| a.abs() < 1e-12));
    }

    #[test]
    fn circle_turn_rate() {
        let (v, r, dt) = (1.2, 3.0, 0.4);
        let step = v * dt / r;
        let t = Trajectory::new(
            (0..10).map(|i| [r * (step * i as f64).cos(), r * (step * i as f64).sin()]).collect(),
            dt,
        )
        .unwrap();
        let p = physics_primitives(&t).unwrap();
        for w in &p.angular_velocity {
            assert!((w - v / r).abs() < 1e-9, "{w}");
        }
        for s in &p.velocity {
            assert!((s - v).abs() < 0.01, "{s}");
        }
    }

    #[test]
    fn stationary() {
        let t = Trajectory::new(vec![[1.0, 1.0]; 6], 0.4).unwrap();
        let p = physics_primitives(&t).unwrap();
        assert!(p.velocity.iter().all(|&v| v == 0.0));
        assert!(p.angular_velocity.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_short() {
        let t = Trajectory::new(vec![[1.0, 1.0]; 3], 0.4).unwrap();
        assert!(physics_primitives(&t).is_err());
    }
}
