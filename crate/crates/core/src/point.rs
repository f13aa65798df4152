//! Planar points and 2x2 real matrices.

use serde::Serialize;

use crate::error::{Error, Result};

/// A point in the plane. Fields are public; the checked constructor exists so
/// call sites that must reject NaN and infinity can say so once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::NonFinitePoint { x, y })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Max norm.
    pub fn norm_inf(&self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    /// Max-norm distance to `other`.
    pub fn dist_inf(&self, other: Point2) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    /// Euclidean distance to `other`.
    pub fn dist(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

pub(crate) fn pt(x: f64, y: f64) -> Point2 {
    Point2 { x, y }
}

/// Row-major 2x2 matrix: rows (a, b) and (c, d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }

    /// Solve `self * x = rhs`. None if the matrix is numerically singular.
    pub fn solve(&self, rhs: (f64, f64)) -> Option<(f64, f64)> {
        let det = self.det();
        let scale = self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs());
        if det.abs() <= 1e-14 * scale * scale.max(1.0) {
            return None;
        }
        Some((
            (rhs.0 * self.d - rhs.1 * self.b) / det,
            (rhs.1 * self.a - rhs.0 * self.c) / det,
        ))
    }

    /// Real eigenvalues as (smaller, larger), or None when they are complex.
    ///
    /// Computed with the sign-safe quadratic formula: the root away from
    /// cancellation comes from the formula, the other from the product
    /// identity, so a tiny eigenvalue next to a large one keeps full
    /// relative accuracy.
    pub fn real_eigenvalues(&self) -> Option<(f64, f64)> {
        let t = self.trace();
        let det = self.det();
        let disc = t * t - 4.0 * det;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt();
        if t >= 0.0 {
            let plus = 0.5 * (t + s);
            let minus = if plus != 0.0 { det / plus } else { 0.0 };
            Some((minus, plus))
        } else {
            let minus = 0.5 * (t - s);
            let plus = det / minus;
            Some((minus, plus))
        }
    }
}
