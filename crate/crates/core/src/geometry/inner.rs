use serde::{Deserialize, Serialize};

use super::Ball;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{Matrix, Vector};

/// Growing inner approximation `conv(seed_ball ∪ hull_points)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerBody {
    seed: Ball,
    points: Vec<Vector>,
}

/// Result of a nearest-point computation.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestPoint {
    pub point: Vector,
    /// Upper bound on the distance (distance to `point`).
    pub distance: f64,
    /// Final Frank-Wolfe duality gap; `distance² - dist² <= 2·gap`.
    pub gap: f64,
    pub iterations: usize,
}

enum Outcome {
    Member,
    NonMember,
    Converged(NearestPoint),
}

impl InnerBody {
    pub fn new(seed: Ball) -> Self {
        Self { seed, points: Vec::new() }
    }

    pub fn with_points(seed: Ball, points: Vec<Vector>) -> Result<Self> {
        for p in &points {
            check_dim(seed.dim(), p.len())?;
        }
        Ok(Self { seed, points })
    }

    pub fn dim(&self) -> usize {
        self.seed.dim()
    }

    pub fn seed(&self) -> &Ball {
        &self.seed
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    /// `conv(self ∪ {point})`. The point need not be a member.
    pub fn with_point(&self, point: Vector) -> Result<InnerBody> {
        check_dim(self.dim(), point.len())?;
        let mut next = self.clone();
        next.points.push(point);
        Ok(next)
    }

    /// Iteration cap of the nearest-point loop: `10·(dim + |points|)²`.
    pub fn iteration_cap(&self) -> usize {
        let k = self.dim() + self.points.len();
        10 * k * k
    }

    /// True iff the distance from `point` to the body is at most `tol`.
    pub fn contains(&self, point: &Vector, tol: f64) -> Result<bool> {
        check_dim(self.dim(), point.len())?;
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("membership tolerance must be positive".into()));
        }
        match self.run(point, Some(tol))? {
            Outcome::Member => Ok(true),
            Outcome::NonMember => Ok(false),
            Outcome::Converged(np) => Ok(np.distance * np.distance - np.gap <= tol * tol),
        }
    }

    /// Euclidean projection of `point` onto the body.
    pub fn nearest_point(&self, point: &Vector) -> Result<NearestPoint> {
        check_dim(self.dim(), point.len())?;
        match self.run(point, None)? {
            Outcome::Converged(np) => Ok(np),
            _ => unreachable!("no early decision without a tolerance"),
        }
    }

    /// Minimum-norm point of `conv(body) - q` by Wolfe's active-set method.
    /// The ball contributes generators on demand through its support
    /// function.
    fn run(&self, q: &Vector, tol: Option<f64>) -> Result<Outcome> {
        let shifted_center = &self.seed.center - q;
        let rbar = self.seed.radius;
        let translated: Vec<Vector> = self.points.iter().map(|p| p - q).collect();

        let scale = translated
            .iter()
            .map(|a| a.norm())
            .fold(shifted_center.norm() + rbar, f64::max)
            .max(1e-300);
        let gap_floor = 1e-14 * scale * scale;
        let gap_stop = tol.map_or(gap_floor, |t| (t * t).max(gap_floor));
        let zero_tol = 1e-15 * scale;

        let ball_atom = |x: &Vector| -> Vector {
            let n = x.norm();
            if n == 0.0 {
                shifted_center.clone()
            } else {
                &shifted_center - x * (rbar / n)
            }
        };
        let lmo = |x: &Vector| -> Vector {
            let mut best = ball_atom(x);
            let mut best_val = x.dot(&best);
            for a in &translated {
                let val = x.dot(a);
                if val < best_val {
                    best_val = val;
                    best = a.clone();
                }
            }
            best
        };

        // Start from the generator closest to q.
        let mut start = ball_atom(&-&shifted_center);
        if shifted_center.norm() <= rbar {
            start = Vector::zeros(q.len());
        }
        for a in &translated {
            if a.norm() < start.norm() {
                start = a.clone();
            }
        }
        let mut atoms = vec![start.clone()];
        let mut lambda = vec![1.0];
        let mut x = start;

        let cap = self.iteration_cap().max(50);
        for iter in 0..cap {
            let xn2 = x.norm_squared();
            if xn2.sqrt() <= zero_tol {
                return Ok(match tol {
                    Some(_) => Outcome::Member,
                    None => Outcome::Converged(NearestPoint {
                        point: q + &x,
                        distance: xn2.sqrt(),
                        gap: 0.0,
                        iterations: iter,
                    }),
                });
            }
            if let Some(t) = tol {
                if xn2.sqrt() <= t {
                    return Ok(Outcome::Member);
                }
            }
            let s = lmo(&x);
            let gap = (xn2 - x.dot(&s)).max(0.0);
            if let Some(t) = tol {
                if xn2 - 2.0 * gap > t * t {
                    return Ok(Outcome::NonMember);
                }
            }
            let stalled = atoms.iter().any(|a| (a - &s).norm() <= 1e-13 * scale);
            if gap <= gap_stop || stalled {
                return Ok(Outcome::Converged(NearestPoint {
                    point: q + &x,
                    distance: xn2.sqrt(),
                    gap,
                    iterations: iter,
                }));
            }
            atoms.push(s);
            lambda.push(0.0);

            // Minor cycles: move to the affine minimizer, dropping atoms
            // whose weight would turn negative.
            for _ in 0..=atoms.len() {
                let alpha = affine_minimizer(&atoms);
                if alpha.iter().all(|&a| a > 1e-15) {
                    lambda = alpha;
                    break;
                }
                let mut theta = 1.0f64;
                for (l, a) in lambda.iter().zip(&alpha) {
                    if *a <= 1e-15 {
                        let denom = l - a;
                        let step = if denom > 0.0 { l / denom } else { 0.0 };
                        theta = theta.min(step);
                    }
                }
                for (l, a) in lambda.iter_mut().zip(&alpha) {
                    *l = theta * a + (1.0 - theta) * *l;
                }
                let mut k = 0;
                while k < atoms.len() {
                    if lambda[k] <= 1e-15 {
                        atoms.swap_remove(k);
                        lambda.swap_remove(k);
                    } else {
                        k += 1;
                    }
                }
                if atoms.is_empty() {
                    // Numerically all weights vanished; restart from the new atom.
                    atoms.push(lmo(&x));
                    lambda.push(1.0);
                }
                let total: f64 = lambda.iter().sum();
                lambda.iter_mut().for_each(|l| *l /= total);
                if atoms.len() == 1 {
                    break;
                }
            }
            x = combine(&atoms, &lambda);
        }
        // Budget spent: report the iterate with its certified gap. Curved
        // seed-ball faces can make the tail of Wolfe's method slow.
        let gap = (x.norm_squared() - x.dot(&lmo(&x))).max(0.0);
        Ok(Outcome::Converged(NearestPoint { point: q + &x, distance: x.norm(), gap, iterations: cap }))
    }
}

fn combine(atoms: &[Vector], weights: &[f64]) -> Vector {
    let mut x = Vector::zeros(atoms[0].len());
    for (a, w) in atoms.iter().zip(weights) {
        x.axpy(*w, a, 1.0);
    }
    x
}

/// Weights (summing to one) of the minimum-norm point of the affine hull.
fn affine_minimizer(atoms: &[Vector]) -> Vec<f64> {
    let k = atoms.len();
    if k == 1 {
        return vec![1.0];
    }
    let dim = atoms[0].len();
    let mut d = Matrix::zeros(dim, k - 1);
    for i in 1..k {
        d.set_column(i - 1, &(&atoms[i] - &atoms[0]));
    }
    let svd = d.svd(true, true);
    let smax = svd.singular_values.max();
    let rhs = -&atoms[0];
    let beta = svd
        .solve(&rhs, 1e-12 * smax.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| Vector::zeros(k - 1));
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter());
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    fn unit_disc() -> InnerBody {
        InnerBody::new(Ball::new(Vector::zeros(2), 1.0).unwrap())
    }

    #[test]
    fn center_of_seed_is_member() {
        assert!(unit_disc().contains(&v(&[0.0, 0.0]), 1e-9).unwrap());
    }

    #[test]
    fn hull_midpoint_is_member() {
        let body = unit_disc().with_point(v(&[3.0, 0.0])).unwrap();
        assert!(body.contains(&v(&[2.0, 0.0]), 1e-9).unwrap());
        assert!(body.contains(&v(&[3.0, 0.0]), 1e-9).unwrap());
    }

    #[test]
    fn point_off_the_hull_is_not_member() {
        let body = unit_disc().with_point(v(&[3.0, 0.0])).unwrap();
        assert!(!body.contains(&v(&[0.0, 2.0]), 1e-9).unwrap());
        // (0,1) lies on the arc, not the tangent segment, so distance is 1.
        let d = body.nearest_point(&v(&[0.0, 2.0])).unwrap().distance;
        assert!((d - 1.0).abs() < 1e-6, "{d}");
        // From (2,1) the nearest point is on the tangent segment x/3 + y·sqrt8/3 = 1.
        let d = body.nearest_point(&v(&[2.0, 1.0])).unwrap().distance;
        let expected = (2.0 / 3.0 + 8f64.sqrt() / 3.0) - 1.0;
        assert!((d - expected).abs() < 1e-6, "{d} vs {expected}");
    }

    #[test]
    fn one_dimensional_interval() {
        let body = InnerBody::new(Ball::new(v(&[1.0]), 1.0).unwrap()).with_point(v(&[5.0])).unwrap();
        let d = body.nearest_point(&v(&[6.5])).unwrap().distance;
        assert!((d - 1.5).abs() < 1e-9);
        assert!(body.contains(&v(&[4.999]), 1e-9).unwrap());
        assert!(!body.contains(&v(&[-0.001]), 1e-9).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(unit_disc().contains(&v(&[0.0]), 1e-9).is_err());
        assert!(unit_disc().with_point(v(&[0.0])).is_err());
    }
}
