use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{Ball, Halfspace, OuterBody};
use crate::linalg::Vector;
use crate::oracles::{SeparationOracle, SeparationResult};
use crate::sampling::{hit_and_run, ChainConfig, Density};
use crate::solver::derive_seed;

/// Uniform samples per centroid estimate.
pub const CENTROID_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct InnerBallResult {
    pub center: Vector,
    /// `r / (6 d^3.5)`.
    pub radius: f64,
    pub oracle_calls: usize,
    /// Every cut applied to the outer ball, in order.
    pub cuts: Vec<Halfspace>,
}

impl InnerBallResult {
    pub fn ball(&self) -> Ball {
        Ball { center: self.center.clone(), radius: self.radius }
    }
}

/// Call budget `200·d·ln(R/r)` (with the logarithm floored at 1).
pub fn inner_ball_budget(d: usize, outer_radius: f64, inner_radius: f64) -> usize {
    (200.0 * d as f64 * (outer_radius / inner_radius).ln().max(1.0)).ceil() as usize
}

/// Finds a ball inside `K` given `B(z, r) ⊆ K ⊆ B(0, R)` for an unknown `z`.
///
/// Each round estimates the centroid `v` of the current outer body and
/// queries a random point `u` near it. A nonmember cuts the outer body; a
/// member triggers a test of the cross `v ± r/(6d³)·e_k`, which succeeds
/// only when all `2d` points are members. A failed cross re-draws `u`.
pub fn find_inner_ball(
    oracle: &dyn SeparationOracle,
    outer_radius: f64,
    inner_radius: f64,
    seed: u64,
) -> Result<InnerBallResult> {
    if !(inner_radius > 0.0 && outer_radius >= inner_radius) {
        return Err(Error::InvalidArgument("need 0 < r <= R".into()));
    }
    let d = oracle.dim();
    let df = d as f64;
    let budget = inner_ball_budget(d, outer_radius, inner_radius);
    let mut outer = OuterBody::new(Ball::new(Vector::zeros(d), outer_radius)?);
    let mut start = Vector::zeros(d);
    let mut cuts = Vec::new();
    let mut calls = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounds = 0u64;

    let query = |q: &Vector, calls: &mut usize| -> Result<SeparationResult> {
        *calls += 1;
        if *calls > budget {
            return Err(Error::BudgetExhausted { budget });
        }
        oracle.separate(q)
    };

    loop {
        rounds += 1;
        let cfg = ChainConfig::new(CENTROID_SAMPLES, derive_seed(seed, rounds));
        let set = hit_and_run(&outer, std::slice::from_ref(&start), &Density::Uniform, &cfg, None)?;
        let v = set.moments()?.mean;
        loop {
            let u = &v + uniform_in_ball(&mut rng, d) * (inner_radius / (6.0 * df));
            match query(&u, &mut calls)? {
                SeparationResult::Member => {
                    let arm = inner_radius / (6.0 * df.powi(3));
                    let mut all_in = true;
                    'cross: for k in 0..d {
                        for sign in [1.0, -1.0] {
                            let mut p = v.clone();
                            p[k] += sign * arm;
                            if !query(&p, &mut calls)?.is_member() {
                                all_in = false;
                                break 'cross;
                            }
                        }
                    }
                    if all_in {
                        return Ok(InnerBallResult {
                            center: v,
                            radius: inner_radius / (6.0 * df.powf(3.5)),
                            oracle_calls: calls,
                            cuts,
                        });
                    }
                }
                SeparationResult::Separated(h) => {
                    let kept: Vec<&Vector> = set.samples.iter().filter(|s| h.contains(s)).collect();
                    if kept.is_empty() {
                        return Err(Error::Oracle("cut removed every centroid sample".into()));
                    }
                    let mut witness = Vector::zeros(d);
                    for s in &kept {
                        witness += *s;
                    }
                    witness /= kept.len() as f64;
                    outer = outer.with_cut(h.clone(), &witness)?;
                    cuts.push(h);
                    start = witness;
                    break;
                }
            }
        }
    }
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    let g = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let r: f64 = rng.random::<f64>().powf(1.0 / d as f64);
    g.normalize() * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::KnownBody;

    #[test]
    fn ball_itself() {
        let k = KnownBody::Ball(Ball::new(Vector::zeros(2), 1.0).unwrap());
        let res = find_inner_ball(&k, 1.0, 0.5, 3).unwrap();
        assert!((res.radius - 0.5 / (6.0 * 2f64.powf(3.5))).abs() < 1e-15);
        assert!(res.center.norm() < 0.1);
        assert!(res.cuts.is_empty());
    }

    #[test]
    fn interval_succeeds_in_one_round() {
        let r = 0.3;
        let k = KnownBody::Box { lo: Vector::from_vec(vec![-r]), hi: Vector::from_vec(vec![r]) };
        let res = find_inner_ball(&k, r, r, 1).unwrap();
        assert!(res.center[0].abs() <= r / 3.0);
        assert!(res.oracle_calls <= inner_ball_budget(1, r, r));
    }

    #[test]
    fn budget_is_enforced() {
        // A sliver thinner than the promised inner radius.
        let k = KnownBody::Box {
            lo: Vector::from_vec(vec![0.5, 0.5]),
            hi: Vector::from_vec(vec![0.5 + 1e-7, 0.5 + 1e-7]),
        };
        let err = find_inner_ball(&k, 1.0, 0.5, 0).unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { .. } | Error::Oracle(_)), "{err:?}");
    }
}
