//! Inner, outer and polar convex bodies with exact membership tests, plus
//! the affine-subspace parametrization used by the samplers.
//!
//! All values are immutable once built; growing an inner body or cutting
//! an outer body returns a new value.

mod affine;
mod inner;
mod outer;
mod polar;

pub use affine::AffineSubspace;
pub use inner::{InnerBody, NearestPoint};
pub use outer::OuterBody;
pub use polar::PolarBody;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;

/// Absolute slack used by every closed-form membership inequality.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// The set `{y : normal·y <= offset}` with a unit-norm normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    normal: Vector,
    offset: f64,
}

impl Halfspace {
    /// Builds the halfspace `{y : normal·y <= offset}`, rescaling both sides
    /// so that the stored normal has unit length.
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let norm = normal.norm();
        if !(norm.is_finite() && norm > 0.0) || !offset.is_finite() {
            return Err(Error::InvalidArgument(
                "halfspace normal must be finite and nonzero".into(),
            ));
        }
        Ok(Self { normal: normal / norm, offset: offset / norm })
    }

    /// Halfspace whose boundary passes through `point`.
    pub fn through(normal: Vector, point: &Vector) -> Result<Self> {
        let offset = normal.dot(point);
        Self::new(normal, offset)
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Signed violation `normal·p - offset`; positive outside.
    pub fn violation(&self, p: &Vector) -> f64 {
        self.normal.dot(p) - self.offset
    }

    pub fn contains(&self, p: &Vector) -> bool {
        self.violation(p) <= MEMBERSHIP_TOL
    }

    /// True when both halfspaces describe the same set up to 1e-10.
    pub fn same_as(&self, other: &Halfspace) -> bool {
        self.dim() == other.dim()
            && self.normal.dot(&other.normal) > 1.0 - 1e-10
            && (self.offset - other.offset).abs() <= 1e-10
    }
}

/// Euclidean ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, p: &Vector) -> Result<bool> {
        check_dim(self.dim(), p.len())?;
        Ok((p - &self.center).norm() <= self.radius + MEMBERSHIP_TOL)
    }
}

/// Interval `[lo, hi]` of the line `p + s·dir` inside a Euclidean ball,
/// or `None` when the line misses the ball.
pub(crate) fn ball_chord(center: &[f64], radius: f64, p: &[f64], dir: &[f64]) -> Option<(f64, f64)> {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut c = -radius * radius;
    for k in 0..center.len() {
        let off = p[k] - center[k];
        a += dir[k] * dir[k];
        b += dir[k] * off;
        c += off * off;
    }
    if a <= 0.0 {
        return if c <= 0.0 { Some((f64::NEG_INFINITY, f64::INFINITY)) } else { None };
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Stable root pair of a s^2 + 2 b s + c = 0.
    let q = -(b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some((r1.min(r2), r1.max(r2)))
}

/// Narrows `(lo, hi)` by the linear constraint `slope·s <= rhs`.
pub(crate) fn narrow_linear(lo: &mut f64, hi: &mut f64, slope: f64, rhs: f64) {
    if slope > 0.0 {
        *hi = hi.min(rhs / slope);
    } else if slope < 0.0 {
        *lo = lo.max(rhs / slope);
    } else if rhs < 0.0 {
        *lo = 0.0;
        *hi = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfspace_is_normalized() {
        let h = Halfspace::new(Vector::from_vec(vec![3.0, 4.0]), 10.0).unwrap();
        assert!((h.normal().norm() - 1.0).abs() < 1e-12);
        assert!((h.offset() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_normal_is_rejected() {
        assert!(Halfspace::new(Vector::zeros(2), 1.0).is_err());
    }

    #[test]
    fn ball_chord_matches_unit_ball() {
        let (lo, hi) = ball_chord(&[0.0, 0.0], 1.0, &[0.0, 0.0], &[0.6, 0.8]).unwrap();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_radius_is_rejected() {
        assert!(Ball::new(Vector::zeros(2), 0.0).is_err());
    }
}
