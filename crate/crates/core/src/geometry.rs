//! Small planar helpers shared by every module.

use std::f64::consts::PI;

pub type Vec2 = [f64; 2];

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

#[inline]
pub fn rotate(v: Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Vec2, k: f64) -> Vec2 {
    [a[0] * k, a[1] * k]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn heading_of(v: Vec2) -> f64 {
    v[1].atan2(v[0])
}

/// A planar rigid motion: rotation about the origin followed by a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rigid2 {
    pub angle: f64,
    pub offset: Vec2,
}

impl Rigid2 {
    pub fn new(angle: f64, offset: Vec2) -> Self {
        Self { angle, offset }
    }

    pub fn apply_point(&self, p: Vec2) -> Vec2 {
        add(rotate(p, self.angle), self.offset)
    }

    pub fn apply_vector(&self, v: Vec2) -> Vec2 {
        rotate(v, self.angle)
    }

    pub fn apply_point3(&self, p: [f64; 3]) -> [f64; 3] {
        let q = self.apply_point([p[0], p[1]]);
        [q[0], q[1], p[2]]
    }

    pub fn apply_vector3(&self, v: [f64; 3]) -> [f64; 3] {
        let q = rotate([v[0], v[1]], self.angle);
        [q[0], q[1], v[2]]
    }
}
