use serde::{Deserialize, Serialize};

use super::{ball_chord, narrow_linear, Ball, Halfspace, MEMBERSHIP_TOL};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, Vector};

/// Shrinking outer approximation: a bounding ball intersected with cuts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterBody {
    ball: Ball,
    cuts: Vec<Halfspace>,
}

impl OuterBody {
    pub fn new(ball: Ball) -> Self {
        Self { ball, cuts: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn cuts(&self) -> &[Halfspace] {
        &self.cuts
    }

    /// Membership in the bounding ball and on the `<=` side of every cut,
    /// each inequality with slack 1e-12.
    pub fn contains(&self, p: &Vector) -> Result<bool> {
        check_dim(self.dim(), p.len())?;
        Ok(self.contains_slice(p.as_slice()))
    }

    pub(crate) fn contains_slice(&self, p: &[f64]) -> bool {
        let c = self.ball.center.as_slice();
        let d2: f64 = p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2.sqrt() > self.ball.radius + MEMBERSHIP_TOL {
            return false;
        }
        self.cuts
            .iter()
            .all(|h| dot(h.normal().as_slice(), p) - h.offset() <= MEMBERSHIP_TOL)
    }

    /// Adds a cut. The witness must be a point known to lie in the true
    /// set; a cut excluding it means the oracle that produced `h` is broken.
    /// Duplicate cuts are dropped.
    pub fn with_cut(&self, h: Halfspace, witness: &Vector) -> Result<OuterBody> {
        check_dim(self.dim(), h.dim())?;
        check_dim(self.dim(), witness.len())?;
        let violation = h.violation(witness);
        if violation > 1e-9 {
            return Err(Error::WitnessExcluded { violation });
        }
        let mut next = self.clone();
        if !self.cuts.iter().any(|c| c.same_as(&h)) {
            next.cuts.push(h);
        }
        Ok(next)
    }

    /// Closed-form chord `[lo, hi]` of the line `p + s·dir`.
    pub fn chord(&self, p: &Vector, dir: &Vector) -> Result<(f64, f64)> {
        check_dim(self.dim(), p.len())?;
        check_dim(self.dim(), dir.len())?;
        let (lo, hi) = self.chord_slices(p.as_slice(), dir.as_slice());
        if lo > hi {
            return Err(Error::StartNotMember);
        }
        Ok((lo, hi))
    }

    /// Chord on raw slices; returns an empty interval (`lo > hi`) when the
    /// line misses the body.
    pub(crate) fn chord_slices(&self, p: &[f64], dir: &[f64]) -> (f64, f64) {
        let Some((mut lo, mut hi)) = ball_chord(self.ball.center.as_slice(), self.ball.radius, p, dir)
        else {
            return (1.0, -1.0);
        };
        for h in &self.cuts {
            let n = h.normal().as_slice();
            narrow_linear(&mut lo, &mut hi, dot(n, dir), h.offset() - dot(n, p));
        }
        (lo, hi)
    }
}
