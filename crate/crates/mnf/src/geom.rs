//! Planar vector arithmetic shared by every module.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A point or displacement in the plane. Serializes as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
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

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Vec2) -> f64 {
        (self - other).norm_sq()
    }

    /// Unit vector in this direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 {
            Some(Vec2::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Distance from `self` to the segment [a, b].
    pub fn dist_to_segment(self, a: Vec2, b: Vec2) -> f64 {
        let ab = b - a;
        let len_sq = ab.norm_sq();
        if len_sq == 0.0 {
            return self.dist(a);
        }
        let t = ((self - a).dot(ab) / len_sq).clamp(0.0, 1.0);
        self.dist(a + ab * t)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Vec2::new(v[0], v[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
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
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Symmetric 2x2 matrix, used for Hessians of scalar fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub fn identity() -> Mat2 {
        Mat2 { xx: 1.0, xy: 0.0, yy: 1.0 }
    }

    /// s * I
    pub fn scaled_identity(s: f64) -> Mat2 {
        Mat2 { xx: s, xy: 0.0, yy: s }
    }

    /// s * (v ⊗ v)
    pub fn outer(v: Vec2, s: f64) -> Mat2 {
        Mat2 { xx: s * v.x * v.x, xy: s * v.x * v.y, yy: s * v.y * v.y }
    }

    pub fn add(self, other: Mat2) -> Mat2 {
        Mat2 { xx: self.xx + other.xx, xy: self.xy + other.xy, yy: self.yy + other.yy }
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    pub fn det(self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Solve (self + mu*I) x = b; `None` when the damped matrix is singular.
    pub fn solve_damped(self, b: Vec2, mu: f64) -> Option<Vec2> {
        let a = Mat2 { xx: self.xx + mu, xy: self.xy, yy: self.yy + mu };
        let det = a.det();
        if det.abs() < 1e-300 || !det.is_finite() {
            return None;
        }
        Some(Vec2::new(
            (a.yy * b.x - a.xy * b.y) / det,
            (a.xx * b.y - a.xy * b.x) / det,
        ))
    }

    /// Eigenvalues of the symmetric matrix, ascending.
    pub fn eigenvalues(self) -> (f64, f64) {
        let tr = self.xx + self.yy;
        let disc = ((self.xx - self.yy) * 0.5).hypot(self.xy);
        (tr * 0.5 - disc, tr * 0.5 + disc)
    }
}
