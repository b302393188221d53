use crate::error::{Error, Result};
use crate::geometry::{InnerBody, OuterBody, PolarBody};
use crate::linalg::Vector;

/// A convex body that hit-and-run can walk through.
pub trait ConvexBody: Sync {
    fn dim(&self) -> usize;

    fn contains(&self, p: &[f64]) -> bool;

    /// Interval `[lo, hi]` of `s` with `p + s·dir` in the body; `p` must be
    /// a member.
    fn chord(&self, p: &[f64], dir: &[f64]) -> Result<(f64, f64)>;
}

impl ConvexBody for OuterBody {
    fn dim(&self) -> usize {
        OuterBody::dim(self)
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.contains_slice(p)
    }

    fn chord(&self, p: &[f64], dir: &[f64]) -> Result<(f64, f64)> {
        let (lo, hi) = self.chord_slices(p, dir);
        if lo > hi {
            return Err(Error::StartNotMember);
        }
        Ok((lo, hi))
    }
}

impl ConvexBody for PolarBody {
    fn dim(&self) -> usize {
        PolarBody::dim(self)
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.contains_slice(p)
    }

    fn chord(&self, p: &[f64], dir: &[f64]) -> Result<(f64, f64)> {
        self.chord_slices(p, dir)
    }
}

/// Membership tolerance used when walking an inner body.
const INNER_WALK_TOL: f64 = 1e-9;

impl ConvexBody for InnerBody {
    fn dim(&self) -> usize {
        InnerBody::dim(self)
    }

    fn contains(&self, p: &[f64]) -> bool {
        InnerBody::contains(self, &Vector::from_column_slice(p), INNER_WALK_TOL).unwrap_or(false)
    }

    fn chord(&self, p: &[f64], dir: &[f64]) -> Result<(f64, f64)> {
        let scale = self.seed().radius;
        chord_by_bisection(|q| ConvexBody::contains(self, q), p, dir, scale)
    }
}

/// Body given only by a membership predicate.
pub struct PredicateBody<F> {
    dim: usize,
    predicate: F,
    /// Rough diameter; seeds the doubling search.
    scale: f64,
}

impl<F: Fn(&[f64]) -> bool + Sync> PredicateBody<F> {
    pub fn new(dim: usize, scale: f64, predicate: F) -> Self {
        Self { dim, predicate, scale }
    }
}

impl<F: Fn(&[f64]) -> bool + Sync> ConvexBody for PredicateBody<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains(&self, p: &[f64]) -> bool {
        (self.predicate)(p)
    }

    fn chord(&self, p: &[f64], dir: &[f64]) -> Result<(f64, f64)> {
        chord_by_bisection(&self.predicate, p, dir, self.scale)
    }
}

const MAX_DOUBLINGS: usize = 200;

/// Chord from a membership predicate: doubling to bracket each endpoint,
/// then bisection down to `1e-9·scale`.
pub fn chord_by_bisection<F: Fn(&[f64]) -> bool>(
    contains: F,
    p: &[f64],
    dir: &[f64],
    scale: f64,
) -> Result<(f64, f64)> {
    if !contains(p) {
        return Err(Error::StartNotMember);
    }
    let dnorm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
    if dnorm == 0.0 {
        return Err(Error::InvalidArgument("zero chord direction".into()));
    }
    let unit = scale.max(1e-12) / dnorm;
    let mut point = vec![0.0; p.len()];
    let mut at = |s: f64| {
        for k in 0..p.len() {
            point[k] = p[k] + s * dir[k];
        }
        contains(&point)
    };
    let mut ends = [0.0; 2];
    for (side, sign) in [-1.0f64, 1.0].into_iter().enumerate() {
        let mut inside = 0.0;
        let mut step = unit * 1e-3;
        let mut outside = None;
        for _ in 0..MAX_DOUBLINGS {
            if at(sign * step) {
                inside = step;
                step *= 2.0;
            } else {
                outside = Some(step);
                break;
            }
        }
        let Some(mut outside) = outside else {
            return Err(Error::UnboundedChord);
        };
        while outside - inside > 1e-9 * unit {
            let mid = 0.5 * (inside + outside);
            if at(sign * mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        ends[side] = sign * inside;
    }
    Ok((ends[0], ends[1]))
}

/// Cartesian product of outer bodies, in ambient coordinates.
pub struct ProductBody<'a> {
    blocks: &'a [OuterBody],
    offsets: Vec<usize>,
}

impl<'a> ProductBody<'a> {
    pub fn new(blocks: &'a [OuterBody]) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for b in blocks {
            offsets.push(offsets.last().unwrap() + b.dim());
        }
        Self { blocks, offsets }
    }
}

impl ConvexBody for ProductBody<'_> {
    fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.blocks
            .iter()
            .enumerate()
            .all(|(i, b)| b.contains_slice(&x[self.offsets[i]..self.offsets[i + 1]]))
    }

    fn chord(&self, x: &[f64], dir: &[f64]) -> Result<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (i, b) in self.blocks.iter().enumerate() {
            let r = self.offsets[i]..self.offsets[i + 1];
            let dx = &dir[r.clone()];
            if dx.iter().all(|v| *v == 0.0) {
                if !b.contains_slice(&x[r]) {
                    return Err(Error::StartNotMember);
                }
                continue;
            }
            let (l, h) = b.chord_slices(&x[r], dx);
            lo = lo.max(l);
            hi = hi.min(h);
        }
        if lo > hi {
            return Err(Error::StartNotMember);
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::UnboundedChord);
        }
        Ok((lo, hi))
    }
}
