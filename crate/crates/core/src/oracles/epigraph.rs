use std::sync::Arc;

use super::{ConvexFunction, OracleCounter, SeparationOracle, SeparationResult};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{Ball, Halfspace, MEMBERSHIP_TOL};
use crate::linalg::Vector;

/// `K = {(x, z) : f(x) <= L z, ‖x - x0‖ <= R, |z - z0| <= 2R} ∩ domain`
/// with `z0 = f(x0)/L`. The block lives in `R^(d+1)`, `z` last.
///
/// The optional coordinate box restricts `x` further (the Lovász
/// extension only represents a set function on the unit cube).
#[derive(Clone)]
pub struct EpigraphBlock {
    f: Arc<dyn ConvexFunction>,
    lipschitz: f64,
    center_x: Vector,
    center_z: f64,
    radius: f64,
    domain: Option<(Vector, Vector)>,
    counter: Option<Arc<OracleCounter>>,
}

impl std::fmt::Debug for EpigraphBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EpigraphBlock")
            .field("lipschitz", &self.lipschitz)
            .field("center_x", &self.center_x)
            .field("center_z", &self.center_z)
            .field("radius", &self.radius)
            .field("domain", &self.domain)
            .finish()
    }
}

impl EpigraphBlock {
    pub fn new(f: Arc<dyn ConvexFunction>, lipschitz: f64, center_x: Vector, radius: f64) -> Result<Self> {
        check_dim(f.dim(), center_x.len())?;
        if !(lipschitz > 0.0 && lipschitz.is_finite()) || !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument("lipschitz constant and radius must be positive".into()));
        }
        let center_z = f.value(&center_x)? / lipschitz;
        Ok(Self { f, lipschitz, center_x, center_z, radius, domain: None, counter: None })
    }

    /// Restricts `x` to the box `[lo, hi]`, which must contain `x0`.
    pub fn with_domain(mut self, lo: Vector, hi: Vector) -> Result<Self> {
        check_dim(self.center_x.len(), lo.len())?;
        check_dim(self.center_x.len(), hi.len())?;
        let inside = (0..lo.len()).all(|k| lo[k] < self.center_x[k] && self.center_x[k] < hi[k]);
        if !inside {
            return Err(Error::InvalidArgument("domain box must contain the center in its interior".into()));
        }
        self.domain = Some((lo, hi));
        Ok(self)
    }

    /// Counts one subgradient call per function query.
    pub fn with_counter(mut self, counter: Arc<OracleCounter>) -> Self {
        self.counter = Some(counter);
        self
    }

    pub fn function(&self) -> &Arc<dyn ConvexFunction> {
        &self.f
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn center_x(&self) -> &Vector {
        &self.center_x
    }

    pub fn center_z(&self) -> f64 {
        self.center_z
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Dimension of `x`.
    pub fn x_dim(&self) -> usize {
        self.center_x.len()
    }

    /// Ball `B((x0, z0), sqrt5·R)` containing the block.
    pub fn bounding_ball(&self) -> Ball {
        let c = self.center_x.clone().insert_row(self.x_dim(), self.center_z);
        Ball { center: c, radius: 5f64.sqrt() * self.radius }
    }

    /// Ball `B((x0, z0 + 2ρ), ρ)` inside the block, where `ρ` is half the
    /// smaller of `R` and the distance from `x0` to the domain boundary.
    pub fn inner_ball(&self) -> Ball {
        let mut margin = self.radius;
        if let Some((lo, hi)) = &self.domain {
            for k in 0..self.x_dim() {
                margin = margin.min(self.center_x[k] - lo[k]).min(hi[k] - self.center_x[k]);
            }
        }
        let rho = 0.5 * margin;
        let c = self.center_x.clone().insert_row(self.x_dim(), self.center_z + 2.0 * rho);
        Ball { center: c, radius: rho }
    }

    fn facet(&self, q: &Vector) -> Result<Option<Halfspace>> {
        let d = self.x_dim();
        let x = q.rows(0, d);
        let z = q[d];
        if let Some((lo, hi)) = &self.domain {
            let mut worst: Option<(f64, usize, f64)> = None;
            for k in 0..d {
                for (viol, sign) in [(lo[k] - x[k], -1.0), (x[k] - hi[k], 1.0)] {
                    if viol > MEMBERSHIP_TOL && worst.is_none_or(|w| viol > w.0) {
                        worst = Some((viol, k, sign));
                    }
                }
            }
            if let Some((_, k, sign)) = worst {
                let mut n = Vector::zeros(d + 1);
                n[k] = sign;
                let off = if sign > 0.0 { hi[k] } else { -lo[k] };
                return Ok(Some(Halfspace::new(n, off)?));
            }
        }
        let diff = x - &self.center_x;
        let dist = diff.norm();
        if dist > self.radius + MEMBERSHIP_TOL {
            let u = diff / dist;
            let off = u.dot(&self.center_x) + self.radius;
            return Ok(Some(Halfspace::new(u.insert_row(d, 0.0), off)?));
        }
        let mut n = Vector::zeros(d + 1);
        if z > self.center_z + 2.0 * self.radius + MEMBERSHIP_TOL {
            n[d] = 1.0;
            return Ok(Some(Halfspace::new(n, self.center_z + 2.0 * self.radius)?));
        }
        if z < self.center_z - 2.0 * self.radius - MEMBERSHIP_TOL {
            n[d] = -1.0;
            return Ok(Some(Halfspace::new(n, -(self.center_z - 2.0 * self.radius))?));
        }
        Ok(None)
    }
}

impl SeparationOracle for EpigraphBlock {
    fn dim(&self) -> usize {
        self.x_dim() + 1
    }

    fn separate(&self, q: &Vector) -> Result<SeparationResult> {
        check_dim(self.dim(), q.len())?;
        if let Some(h) = self.facet(q)? {
            return Ok(SeparationResult::Separated(h));
        }
        let d = self.x_dim();
        let x: Vector = q.rows(0, d).into_owned();
        let z = q[d];
        if let Some(c) = &self.counter {
            c.record_subgradient();
        }
        let (fx, g) = self.f.value_and_subgradient(&x)?;
        let excess = fx - self.lipschitz * z;
        let scale = (g.norm_squared() + self.lipschitz * self.lipschitz).sqrt();
        if excess <= MEMBERSHIP_TOL * scale {
            return Ok(SeparationResult::Member);
        }
        let offset = g.dot(&x) - fx;
        let normal = g.insert_row(d, -self.lipschitz);
        Ok(SeparationResult::Separated(Halfspace::new(normal, offset)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{MaxAffine, OneNorm};
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    fn abs_block() -> EpigraphBlock {
        EpigraphBlock::new(Arc::new(OneNorm { center: v(&[0.0]) }), 1.0, v(&[0.0]), 2.0).unwrap()
    }

    #[test]
    fn abs_examples() {
        let b = abs_block();
        assert!(b.separate(&v(&[0.5, 0.7])).unwrap().is_member());
        assert!(b.separate(&v(&[0.0, 0.0])).unwrap().is_member());
        match b.separate(&v(&[0.5, 0.2])).unwrap() {
            SeparationResult::Separated(h) => {
                let expected = Halfspace::new(v(&[1.0, -1.0]), 0.0).unwrap();
                assert!(h.same_as(&expected), "{h:?}");
                assert!(h.violation(&v(&[0.5, 0.2])) > 0.0);
            }
            SeparationResult::Member => panic!("expected a cut"),
        }
    }

    #[test]
    fn box_facets_come_first() {
        let b = abs_block();
        // Outside the x-ball of radius 2.
        match b.separate(&v(&[3.0, 10.0])).unwrap() {
            SeparationResult::Separated(h) => assert!(h.same_as(&Halfspace::new(v(&[1.0, 0.0]), 2.0).unwrap())),
            _ => panic!(),
        }
        // z above z0 + 2R = 4.
        match b.separate(&v(&[0.0, 5.0])).unwrap() {
            SeparationResult::Separated(h) => assert!(h.same_as(&Halfspace::new(v(&[0.0, 1.0]), 4.0).unwrap())),
            _ => panic!(),
        }
        let boxed = abs_block().with_domain(v(&[-0.5]), v(&[1.0])).unwrap();
        match boxed.separate(&v(&[-0.8, 1.0])).unwrap() {
            SeparationResult::Separated(h) => assert!(h.same_as(&Halfspace::new(v(&[-1.0, 0.0]), 0.5).unwrap())),
            _ => panic!(),
        }
    }

    #[test]
    fn inner_ball_is_inside_and_bounding_ball_outside() {
        let b = abs_block().with_domain(v(&[-0.5]), v(&[1.0])).unwrap();
        let inner = b.inner_ball();
        let outer = b.bounding_ball();
        for k in 0..64 {
            let a = k as f64 / 64.0 * std::f64::consts::TAU;
            let p = &inner.center + v(&[a.cos(), a.sin()]) * inner.radius;
            assert!(b.separate(&p).unwrap().is_member(), "{p:?}");
        }
        for q in [[-0.5, -4.0], [1.0, 4.0], [-0.5, 4.0]] {
            assert!(outer.contains(&v(&q)).unwrap());
        }
    }

    #[test]
    fn counter_records_function_queries() {
        let counter = OracleCounter::new();
        let b = abs_block().with_counter(counter.clone());
        b.separate(&v(&[0.5, 0.7])).unwrap();
        b.separate(&v(&[9.0, 0.7])).unwrap();
        assert_eq!(counter.snapshot().subgradient_calls, 1);
    }

    proptest! {
        #[test]
        fn epigraph_validity(
            slopes in prop::collection::vec(-2.0f64..2.0, 6),
            intercepts in prop::collection::vec(-1.0f64..1.0, 3),
            x in prop::collection::vec(-0.9f64..0.9, 2),
            z in -2.0f64..2.0,
        ) {
            let slopes: Vec<Vector> = slopes.chunks(2).map(v).collect();
            let f = Arc::new(MaxAffine::new(slopes, intercepts).unwrap());
            let block = EpigraphBlock::new(f.clone(), 3.0, Vector::zeros(2), 1.0).unwrap();
            let x = v(&x);
            let q = x.clone().insert_row(2, z);
            let fx = f.value(&x).unwrap();
            let z0 = block.center_z();
            prop_assume!((z - z0).abs() < 2.0);
            prop_assume!(x.norm() < 1.0);
            match block.separate(&q).unwrap() {
                SeparationResult::Member => prop_assert!(fx <= 3.0 * z + 1e-9),
                SeparationResult::Separated(h) => {
                    prop_assert!(fx > 3.0 * z);
                    prop_assert!(h.violation(&q) > 0.0);
                    // Points of the epigraph above x stay inside.
                    let above = x.clone().insert_row(2, fx / 3.0 + 0.1);
                    prop_assert!(h.contains(&above));
                }
            }
        }
    }
}
