use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, sub, Rigid2, Vec2};

/// Default frame interval: 2.5 frames per second.
pub const DEFAULT_DT: f64 = 0.4;

/// Ordered ground-plane positions sampled at a fixed frame interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<Vec2>,
    dt: f64,
}

impl Trajectory {
    pub fn new(points: Vec<Vec2>, dt: f64) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::input(format!(
                "trajectory needs at least 2 points, got {}",
                points.len()
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::input(format!("frame interval must be positive, got {dt}")));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::input("trajectory contains non-finite coordinates"));
        }
        Ok(Self { points, dt })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Vec2 {
        self.points[0]
    }

    pub fn last(&self) -> Vec2 {
        self.points[self.points.len() - 1]
    }

    /// Per-step displacement vectors, `len() - 1` of them.
    pub fn displacements(&self) -> Vec<Vec2> {
        self.points.windows(2).map(|w| sub(w[1], w[0])).collect()
    }

    /// Speeds between consecutive points, in m/s.
    pub fn speeds(&self) -> Vec<f64> {
        self.displacements().into_iter().map(|d| norm(d) / self.dt).collect()
    }

    pub fn transformed(&self, tf: &Rigid2) -> Self {
        Self {
            points: self.points.iter().map(|&p| tf.apply_point(p)).collect(),
            dt: self.dt,
        }
    }

    /// Sub-trajectory `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if end > self.points.len() || start >= end {
            return Err(Error::input(format!(
                "bad slice {start}..{end} of trajectory with {} points",
                self.points.len()
            )));
        }
        Self::new(self.points[start..end].to_vec(), self.dt)
    }

    pub fn into_points(self) -> Vec<Vec2> {
        self.points
    }
}
