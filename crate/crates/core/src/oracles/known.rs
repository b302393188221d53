use super::{SeparationOracle, SeparationResult};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{ball_chord, narrow_linear, Ball, Halfspace, OuterBody, MEMBERSHIP_TOL};
use crate::linalg::{dot, Vector};
use crate::sampling::ConvexBody;

/// Analytically given body with an exact separation oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum KnownBody {
    Ball(Ball),
    Box { lo: Vector, hi: Vector },
    /// Intersection of halfspaces; must be bounded for sampling.
    Polytope(Vec<Halfspace>),
    Outer(OuterBody),
}

impl KnownBody {
    pub fn unit_box(dim: usize) -> Self {
        KnownBody::Box { lo: Vector::zeros(dim), hi: Vector::from_element(dim, 1.0) }
    }

    fn halfspaces(&self) -> Vec<Halfspace> {
        match self {
            KnownBody::Ball(_) => Vec::new(),
            KnownBody::Box { lo, hi } => {
                let d = lo.len();
                let mut hs = Vec::with_capacity(2 * d);
                for k in 0..d {
                    let mut n = Vector::zeros(d);
                    n[k] = 1.0;
                    hs.push(Halfspace::new(n.clone(), hi[k]).expect("unit normal"));
                    hs.push(Halfspace::new(-n, -lo[k]).expect("unit normal"));
                }
                hs
            }
            KnownBody::Polytope(hs) => hs.clone(),
            KnownBody::Outer(o) => o.cuts().to_vec(),
        }
    }

    fn ball(&self) -> Option<&Ball> {
        match self {
            KnownBody::Ball(b) => Some(b),
            KnownBody::Outer(o) => Some(o.ball()),
            _ => None,
        }
    }

    fn body_dim(&self) -> usize {
        match self {
            KnownBody::Ball(b) => b.dim(),
            KnownBody::Box { lo, .. } => lo.len(),
            KnownBody::Polytope(hs) => hs.first().map_or(0, |h| h.dim()),
            KnownBody::Outer(o) => o.dim(),
        }
    }
}

fn box_violation(body: &KnownBody, p: &[f64]) -> Option<(f64, usize, f64)> {
    let KnownBody::Box { lo, hi } = body else { return None };
    let mut worst: Option<(f64, usize, f64)> = None;
    for k in 0..p.len() {
        for (viol, sign) in [(p[k] - hi[k], 1.0), (lo[k] - p[k], -1.0)] {
            if viol > MEMBERSHIP_TOL && worst.is_none_or(|w| viol > w.0) {
                worst = Some((viol, k, sign));
            }
        }
    }
    worst
}

impl SeparationOracle for KnownBody {
    fn dim(&self) -> usize {
        self.body_dim()
    }

    fn separate(&self, q: &Vector) -> Result<SeparationResult> {
        check_dim(self.body_dim(), q.len())?;
        if let Some(b) = self.ball() {
            let diff = q - &b.center;
            let dist = diff.norm();
            if dist > b.radius + MEMBERSHIP_TOL {
                let u = diff / dist;
                let off = u.dot(&b.center) + b.radius;
                return Ok(SeparationResult::Separated(Halfspace::new(u, off)?));
            }
        }
        if let KnownBody::Box { lo, hi } = self {
            if let Some((_, k, sign)) = box_violation(self, q.as_slice()) {
                let mut n = Vector::zeros(q.len());
                n[k] = sign;
                let off = if sign > 0.0 { hi[k] } else { -lo[k] };
                return Ok(SeparationResult::Separated(Halfspace::new(n, off)?));
            }
            return Ok(SeparationResult::Member);
        }
        let worst = self
            .halfspaces()
            .into_iter()
            .map(|h| (h.violation(q), h))
            .filter(|(v, _)| *v > MEMBERSHIP_TOL)
            .max_by(|a, b| a.0.total_cmp(&b.0));
        Ok(match worst {
            Some((_, h)) => SeparationResult::Separated(h),
            None => SeparationResult::Member,
        })
    }
}

impl ConvexBody for KnownBody {
    fn dim(&self) -> usize {
        self.body_dim()
    }

    fn contains(&self, p: &[f64]) -> bool {
        match self {
            KnownBody::Ball(b) => {
                let c = b.center.as_slice();
                let d2: f64 = p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() <= b.radius + MEMBERSHIP_TOL
            }
            KnownBody::Box { .. } => box_violation(self, p).is_none(),
            KnownBody::Polytope(hs) => {
                hs.iter().all(|h| dot(h.normal().as_slice(), p) - h.offset() <= MEMBERSHIP_TOL)
            }
            KnownBody::Outer(o) => o.contains_slice(p),
        }
    }

    fn chord(&self, p: &[f64], dir: &[f64]) -> Result<(f64, f64)> {
        if !ConvexBody::contains(self, p) {
            return Err(Error::StartNotMember);
        }
        let (mut lo, mut hi) = match self.ball() {
            Some(b) => ball_chord(b.center.as_slice(), b.radius, p, dir).ok_or(Error::StartNotMember)?,
            None => (f64::NEG_INFINITY, f64::INFINITY),
        };
        for h in self.halfspaces() {
            let n = h.normal().as_slice();
            narrow_linear(&mut lo, &mut hi, dot(n, dir), h.offset() - dot(n, p));
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::UnboundedChord);
        }
        Ok((lo.min(0.0), hi.max(0.0)))
    }
}
