//! Plane vectors and segment/circle intersection.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

/// Parameters along `start + λ·dir` where the line meets a circle.
///
/// `entry` is the smaller root, where the line passes from outside to inside;
/// `exit` is the larger. Roots are not restricted to any interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCircleRoots {
    pub entry: f64,
    pub exit: f64,
}

/// Relative discriminant below which a line is treated as tangent.
const TANGENT_TOLERANCE: f64 = 1e-12;

impl Circle {
    pub const fn new(center: Vec2, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Closed disc membership.
    pub fn contains(&self, p: Vec2) -> bool {
        (p - self.center).norm_sq() <= self.radius * self.radius
    }

    pub fn line_roots(&self, start: Vec2, dir: Vec2) -> Option<LineCircleRoots> {
        let a = dir.norm_sq();
        if a == 0.0 {
            return None;
        }
        let rel = start - self.center;
        let b = 2.0 * rel.dot(dir);
        let c = rel.norm_sq() - self.radius * self.radius;
        let disc = b * b - 4.0 * a * c;
        if disc <= TANGENT_TOLERANCE * 4.0 * a * self.radius * self.radius {
            return None;
        }
        // Cancellation-free pair: q carries the sign of b.
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let (r1, r2) = if q == 0.0 {
            let h = (disc.sqrt()) / (2.0 * a);
            (-h, h)
        } else {
            (q / a, c / q)
        };
        Some(LineCircleRoots {
            entry: r1.min(r2),
            exit: r1.max(r2),
        })
    }
}

/// Smallest `λ ∈ (0, 1]` with `p0 + λ·(p1 − p0)` on the circle, if any.
pub fn first_crossing(p0: Vec2, p1: Vec2, circle: &Circle) -> Option<f64> {
    let roots = circle.line_roots(p0, p1 - p0)?;
    [roots.entry, roots.exit]
        .into_iter()
        .find(|&l| l > 0.0 && l <= 1.0)
}
