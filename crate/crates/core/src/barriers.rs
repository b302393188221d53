//! Sampled barrier calculus: gradient and Hessian of the universal barrier
//! of an inner body, and the centroid of the exponential family over the
//! outer bodies.

use crate::error::{check_dim, Error, Result};
use crate::geometry::{AffineSubspace, InnerBody, OuterBody, PolarBody};
use crate::linalg::{Matrix, Vector};
use crate::sampling::{hit_and_run, ChainConfig, ConvexBody, Density, MomentEstimate, ProductBody, SampleSet};

/// Offset of the strict-interior probes around the query point.
pub const INTERIOR_PROBE: f64 = 1e-6;

/// Regularization added to the Hessian before taking norms.
pub const HESSIAN_RIDGE: f64 = 1e-10;

/// Gradient and Hessian of the universal barrier at a point, estimated
/// from the centroid `μ` and covariance `Σ` of the polar body.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMetric {
    /// `(d+1) μ`.
    pub grad: Vector,
    /// `(d+1)(d+2) Σ + (d+1) μ μᵀ`.
    pub hessian: Matrix,
    pub block_dim: usize,
    /// Moments of the polar samples.
    pub moments: MomentEstimate,
}

impl LocalMetric {
    /// Standard error of `grad·v`.
    pub fn grad_stderr_along(&self, v: &Vector) -> f64 {
        (self.block_dim + 1) as f64 * self.moments.stderr_of(v)
    }

    /// Per-coordinate standard error of the gradient.
    pub fn grad_stderr(&self) -> Vector {
        &self.moments.stderr * (self.block_dim + 1) as f64
    }
}

/// `‖v‖_x = sqrt(vᵀ (H + 1e-10 I) v)`.
pub fn local_norm(metric: &LocalMetric, v: &Vector) -> Result<f64> {
    check_dim(metric.block_dim, v.len())?;
    let q = v.dot(&(&metric.hessian * v)) + HESSIAN_RIDGE * v.norm_squared();
    Ok(q.max(0.0).sqrt())
}

/// True when `x ± 1e-6·e_k` all lie in the body.
pub fn is_strictly_interior(body: &InnerBody, x: &Vector) -> Result<bool> {
    check_dim(body.dim(), x.len())?;
    let mut probe = x.clone();
    for k in 0..x.len() {
        for delta in [INTERIOR_PROBE, -INTERIOR_PROBE] {
            probe[k] = x[k] + delta;
            if !body.contains(&probe, 1e-12)? {
                return Ok(false);
            }
        }
        probe[k] = x[k];
    }
    Ok(true)
}

/// Universal-barrier gradient and Hessian of `body` at `x` from uniform
/// samples of the polar `(body - x)°`, started at the origin.
pub fn universal_metric(
    body: &InnerBody,
    x: &Vector,
    cfg: &ChainConfig,
    precond: Option<&Matrix>,
) -> Result<LocalMetric> {
    if !is_strictly_interior(body, x)? {
        return Err(Error::NotInterior);
    }
    let polar = PolarBody::new(body, x)?;
    let d = body.dim();
    let set = hit_and_run(&polar, &[Vector::zeros(d)], &Density::Uniform, cfg, precond).map_err(|e| match e {
        Error::UnboundedChord => Error::NotInterior,
        other => other,
    })?;
    Ok(metric_from_moments(set.moments()?))
}

/// Assembles the metric from polar-body moments.
pub fn metric_from_moments(moments: MomentEstimate) -> LocalMetric {
    let d = moments.mean.len();
    let k = (d + 1) as f64;
    let mu = &moments.mean;
    let mut hessian = &moments.covariance * (k * (k + 1.0));
    hessian.ger(k, mu, mu, 1.0);
    hessian = (&hessian + hessian.transpose()) * 0.5;
    LocalMetric { grad: mu * k, hessian, block_dim: d, moments }
}

/// Sampled centroid of `exp(-t·c·x)` over `Π_i K_out,i ∩ {A x = b}`.
#[derive(Debug, Clone)]
pub struct OuterCenter {
    pub center: Vector,
    pub moments: MomentEstimate,
    /// Covariance in the reduced coordinates `Nᵀ Σ N` of the subspace.
    pub reduced_covariance: Matrix,
    /// Ambient samples; every one satisfies `A x = b`.
    pub samples: SampleSet,
}

/// Estimates `x*_out` by hit-and-run along directions in the null space
/// of `A`.
///
/// `warm` holds starting points; each is projected onto the subspace and
/// skipped if outside the product body, and at least one must remain.
/// `precond` is a factor `L` of a reduced-coordinate covariance; directions
/// are drawn as `N L z`.
pub fn outer_center(
    blocks: &[OuterBody],
    sub: &AffineSubspace,
    t: f64,
    c: &Vector,
    cfg: &ChainConfig,
    warm: &[Vector],
    precond: Option<&Matrix>,
) -> Result<OuterCenter> {
    check_dim(sub.dim(), c.len())?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("path parameter must be finite and nonnegative, got {t}")));
    }
    let product = ProductBody::new(blocks);
    check_dim(sub.dim(), product.dim())?;
    if sub.reduced_dim() == 0 {
        return Err(Error::InvalidArgument("the affine constraints leave no freedom".into()));
    }
    let mut starts = Vec::new();
    for w in warm {
        let x = sub.snap(w)?;
        if product.contains(x.as_slice()) {
            starts.push(x);
        }
    }
    if starts.is_empty() {
        return Err(Error::StartNotMember);
    }
    let directions = match precond {
        Some(l) => sub.basis() * l,
        None => sub.basis().clone(),
    };
    let density = if t == 0.0 { Density::Uniform } else { Density::Exponential(c * -t) };
    let samples = hit_and_run(&product, &starts, &density, cfg, Some(&directions))?;
    let moments = samples.moments()?;
    let reduced_covariance = sub.basis().tr_mul(&moments.covariance) * sub.basis();
    Ok(OuterCenter { center: moments.mean.clone(), moments, reduced_covariance, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Ball;
    use crate::sampling::truncated_exponential_mean;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    fn interval_0_2() -> InnerBody {
        InnerBody::new(Ball::new(v(&[1.0]), 1.0).unwrap())
    }

    fn unit_interval_outer() -> OuterBody {
        OuterBody::new(Ball::new(v(&[0.5]), 0.5).unwrap())
    }

    #[test]
    fn symmetric_ball_has_zero_gradient() {
        let body = InnerBody::new(Ball::new(Vector::zeros(2), 1.0).unwrap());
        let m = universal_metric(&body, &Vector::zeros(2), &ChainConfig::new(4000, 1), None).unwrap();
        let se = m.grad_stderr();
        for k in 0..2 {
            assert!(m.grad[k].abs() <= 4.0 * se[k] + 1e-3, "{} ± {}", m.grad[k], se[k]);
        }
    }

    #[test]
    fn interval_gradient_and_hessian() {
        let m = universal_metric(&interval_0_2(), &v(&[0.5]), &ChainConfig::new(4000, 2), None).unwrap();
        let se = m.grad_stderr()[0];
        assert!((m.grad[0] + 4.0 / 3.0).abs() <= 4.0 * se + 1e-3, "{} ± {se}", m.grad[0]);
        assert!((m.hessian[(0, 0)] - 40.0 / 9.0).abs() < 0.15, "{}", m.hessian[(0, 0)]);
        let norm = local_norm(&m, &v(&[1.0])).unwrap();
        assert!((norm - (40.0f64 / 9.0).sqrt()).abs() < 0.05, "{norm}");
    }

    #[test]
    fn boundary_point_is_rejected() {
        let r = universal_metric(&interval_0_2(), &v(&[0.0]), &ChainConfig::new(100, 0), None);
        assert_eq!(r.unwrap_err(), Error::NotInterior);
    }

    #[test]
    fn uniform_centroid_of_cubes() {
        // Cubes as balls cut by facets: [0,1]^2 for each of two blocks.
        let mut cube = OuterBody::new(Ball::new(v(&[0.5, 0.5]), 0.75).unwrap());
        let mid = v(&[0.5, 0.5]);
        for k in 0..2 {
            for sign in [1.0, -1.0] {
                let mut n = Vector::zeros(2);
                n[k] = sign;
                let off = if sign > 0.0 { 1.0 } else { 0.0 };
                cube = cube.with_cut(crate::geometry::Halfspace::new(n, off).unwrap(), &mid).unwrap();
            }
        }
        let blocks = vec![cube.clone(), cube];
        let sub = AffineSubspace::free(4);
        let out = outer_center(&blocks, &sub, 0.0, &Vector::zeros(4), &ChainConfig::new(8000, 3), &[v(&[0.5; 4])], None)
            .unwrap();
        for k in 0..4 {
            assert!((out.center[k] - 0.5).abs() <= 4.0 * out.moments.stderr[k] + 1e-3);
        }
    }

    #[test]
    fn tilted_interval_means() {
        let blocks = vec![unit_interval_outer()];
        let sub = AffineSubspace::free(1);
        for (t, seed) in [(1.0, 4), (100.0, 5)] {
            let out = outer_center(&blocks, &sub, t, &v(&[1.0]), &ChainConfig::new(8000, seed), &[v(&[0.5])], None)
                .unwrap();
            let expected = truncated_exponential_mean(t);
            let se = out.moments.stderr[0];
            assert!((out.center[0] - expected).abs() <= 4.0 * se + 1e-3, "t={t}: {} vs {expected}", out.center[0]);
        }
    }

    #[test]
    fn centers_lie_on_the_subspace() {
        let blocks = vec![unit_interval_outer(), unit_interval_outer()];
        let sub = AffineSubspace::new(Matrix::from_row_slice(1, 2, &[1.0, 1.0]), v(&[1.2])).unwrap();
        let out = outer_center(&blocks, &sub, 2.0, &v(&[1.0, 0.0]), &ChainConfig::new(2000, 9), &[v(&[0.6, 0.6])], None)
            .unwrap();
        assert!(sub.residual(&out.center).unwrap() <= 1e-9);
        for x in &out.samples.samples {
            assert!(sub.residual(x).unwrap() <= 1e-9);
        }
    }

    proptest! {
        #[test]
        fn local_norm_is_homogeneous(a in -3.0f64..3.0, b in -3.0f64..3.0, alpha in -10.0f64..10.0) {
            let moments = MomentEstimate {
                mean: v(&[0.1, -0.2]),
                covariance: Matrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.3]),
                n: 10,
                stderr: Vector::zeros(2),
                batch_means: vec![],
            };
            let m = metric_from_moments(moments);
            prop_assert!((&m.hessian - m.hessian.transpose()).norm() == 0.0);
            prop_assert!(m.hessian.clone().symmetric_eigenvalues().min() >= -1e-9);
            let x = v(&[a, b]);
            let n1 = local_norm(&m, &x).unwrap();
            prop_assert_eq!(local_norm(&m, &(&x * 2.0)).unwrap(), 2.0 * n1);
            prop_assert!((local_norm(&m, &(&x * alpha)).unwrap() - alpha.abs() * n1).abs() <= 1e-12 * (1.0 + n1 * alpha.abs()));
        }
    }
}
