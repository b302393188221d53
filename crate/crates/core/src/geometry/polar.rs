use super::{narrow_linear, InnerBody, MEMBERSHIP_TOL};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, Vector};

/// Polar `(K - x)°` of an inner body `K` about an anchor `x`:
/// `{y : y·(p_j - x) <= 1 for all j, y·(z - x) + r̄‖y‖ <= 1}`.
///
/// Bounded exactly when `x` is interior to `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarBody {
    anchor: Vector,
    /// `p_j - x` for every hull point.
    offsets: Vec<Vector>,
    /// `z - x` for the seed ball center `z`.
    center_offset: Vector,
    radius: f64,
}

impl PolarBody {
    pub fn new(base: &InnerBody, anchor: &Vector) -> Result<Self> {
        check_dim(base.dim(), anchor.len())?;
        Ok(Self {
            anchor: anchor.clone(),
            offsets: base.points().iter().map(|p| p - anchor).collect(),
            center_offset: &base.seed().center - anchor,
            radius: base.seed().radius,
        })
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    pub fn contains(&self, y: &Vector) -> Result<bool> {
        check_dim(self.dim(), y.len())?;
        Ok(self.contains_slice(y.as_slice()))
    }

    pub(crate) fn contains_slice(&self, y: &[f64]) -> bool {
        let norm = dot(y, y).sqrt();
        if dot(y, self.center_offset.as_slice()) + self.radius * norm > 1.0 + MEMBERSHIP_TOL {
            return false;
        }
        self.offsets.iter().all(|a| dot(y, a.as_slice()) <= 1.0 + MEMBERSHIP_TOL)
    }

    /// Closed-form chord `[lo, hi]` of the line `y + s·dir`.
    pub fn chord(&self, y: &Vector, dir: &Vector) -> Result<(f64, f64)> {
        check_dim(self.dim(), y.len())?;
        check_dim(self.dim(), dir.len())?;
        self.chord_slices(y.as_slice(), dir.as_slice())
    }

    pub(crate) fn chord_slices(&self, y: &[f64], dir: &[f64]) -> Result<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for a in &self.offsets {
            let a = a.as_slice();
            narrow_linear(&mut lo, &mut hi, dot(a, dir), 1.0 - dot(a, y));
        }

        // r̄‖y + s·dir‖ <= alpha - beta·s, split into the sign condition and
        // the squared inequality A s² + B s + C <= 0.
        let alpha = 1.0 - dot(self.center_offset.as_slice(), y);
        let beta = dot(self.center_offset.as_slice(), dir);
        narrow_linear(&mut lo, &mut hi, beta, alpha);
        let r2 = self.radius * self.radius;
        let (yy, ys, ss) = (dot(y, y), dot(y, dir), dot(dir, dir));
        let qa = r2 * ss - beta * beta;
        let qb = 2.0 * (r2 * ys + alpha * beta);
        let qc = r2 * yy - alpha * alpha;
        if qc > MEMBERSHIP_TOL {
            return Err(Error::StartNotMember);
        }
        if qa.abs() <= 1e-14 * (r2 * ss + beta * beta) {
            narrow_linear(&mut lo, &mut hi, qb, -qc);
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                let q = -0.5 * (qb + qb.signum() * sq);
                let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / qa, qc / q) };
                let (s1, s2) = (r1.min(r2), r1.max(r2));
                if qa > 0.0 {
                    lo = lo.max(s1);
                    hi = hi.min(s2);
                } else if s1 >= 0.0 {
                    hi = hi.min(s1);
                } else if s2 <= 0.0 {
                    lo = lo.max(s2);
                }
            } else if qa > 0.0 {
                return Err(Error::StartNotMember);
            }
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::UnboundedChord);
        }
        if lo > hi {
            return Err(Error::StartNotMember);
        }
        Ok((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ball;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn polar_of_interval() {
        // K = [0, 2] about x = 0.5 gives (K - x)° = [-2, 2/3].
        let k = InnerBody::new(Ball::new(v(&[1.0]), 1.0).unwrap());
        let polar = PolarBody::new(&k, &v(&[0.5])).unwrap();
        let (lo, hi) = polar.chord(&v(&[0.0]), &v(&[1.0])).unwrap();
        assert!((lo + 2.0).abs() < 1e-12, "{lo}");
        assert!((hi - 2.0 / 3.0).abs() < 1e-12, "{hi}");
        assert!(polar.contains(&v(&[-1.99])).unwrap());
        assert!(!polar.contains(&v(&[0.7])).unwrap());
    }

    #[test]
    fn polar_of_centered_ball_is_ball() {
        let k = InnerBody::new(Ball::new(Vector::zeros(3), 2.0).unwrap());
        let polar = PolarBody::new(&k, &Vector::zeros(3)).unwrap();
        let (lo, hi) = polar.chord(&v(&[0.1, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0])).unwrap();
        let half = (0.25f64 - 0.01).sqrt();
        assert!((lo + half).abs() < 1e-12 && (hi - half).abs() < 1e-12);
    }

    #[test]
    fn anchor_on_boundary_is_unbounded() {
        let k = InnerBody::new(Ball::new(v(&[1.0]), 1.0).unwrap());
        let polar = PolarBody::new(&k, &v(&[0.0])).unwrap();
        assert_eq!(polar.chord(&v(&[0.0]), &v(&[-1.0])), Err(Error::UnboundedChord));
    }
}
