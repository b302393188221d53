//! Reference methods on `θ`-space: projected subgradient descent and the
//! sampled centroid cutting-plane method. Both query every term at every
//! iteration through the same counters as the main solver.

use std::sync::Arc;

use decompopt::geometry::{Ball, Halfspace, OuterBody};
use decompopt::oracles::{OracleCounter, Term};
use decompopt::sampling::{hit_and_run, ChainConfig, Density};
use decompopt::solver::derive_seed;
use decompopt::{Result, Vector};

/// Feasible region `B(θ0, R) ∩ domain box` and the summed objective.
pub struct Objective<'a> {
    pub terms: &'a [Term],
    pub theta0: &'a Vector,
    pub radius: f64,
    pub domain: Option<(f64, f64)>,
    pub counter: Arc<OracleCounter>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineTrace {
    /// Best value after each iteration.
    pub values: Vec<f64>,
    pub best: f64,
    pub best_point: Vector,
    pub subgradient_calls: u64,
}

impl Objective<'_> {
    fn value_and_subgradient(&self, theta: &Vector) -> Result<(f64, Vector)> {
        let mut total = 0.0;
        let mut g = Vector::zeros(theta.len());
        for t in self.terms {
            let x = Vector::from_iterator(t.support.len(), t.support.iter().map(|&k| theta[k]));
            self.counter.record_subgradient();
            let (v, gi) = t.function.value_and_subgradient(&x)?;
            total += v;
            for (p, &k) in t.support.iter().enumerate() {
                g[k] += gi[p];
            }
        }
        Ok((total, g))
    }

    /// Bound on the Lipschitz constant of the sum.
    fn lipschitz(&self) -> f64 {
        self.terms.iter().map(|t| t.lipschitz).sum()
    }

    /// Alternating projections onto the box and the ball; exact when only
    /// one of them is active.
    fn project(&self, theta: &Vector) -> Vector {
        let mut y = theta.clone();
        for _ in 0..50 {
            if let Some((lo, hi)) = self.domain {
                y.apply(|v| *v = v.clamp(lo, hi));
            }
            let d = &y - self.theta0;
            let n = d.norm();
            if n <= self.radius * (1.0 + 1e-12) {
                break;
            }
            y = self.theta0 + d * (self.radius / n);
        }
        y
    }
}

/// Projected subgradient descent with step `R/(L sqrt k)`.
pub fn baseline_subgradient(obj: &Objective, iters: usize) -> Result<BaselineTrace> {
    let step0 = obj.radius / obj.lipschitz().max(f64::MIN_POSITIVE);
    let start = obj.counter.snapshot().subgradient_calls;
    let mut theta = obj.project(obj.theta0);
    let mut best = (f64::INFINITY, theta.clone());
    let mut values = Vec::with_capacity(iters);
    for k in 1..=iters {
        let (v, g) = obj.value_and_subgradient(&theta)?;
        if v < best.0 {
            best = (v, theta.clone());
        }
        values.push(best.0);
        theta = obj.project(&(&theta - g * (step0 / (k as f64).sqrt())));
    }
    Ok(BaselineTrace {
        values,
        best: best.0,
        best_point: best.1,
        subgradient_calls: obj.counter.snapshot().subgradient_calls - start,
    })
}

/// Centroid cutting-plane method: cut the region through its sampled
/// centroid with the summed subgradient.
///
/// Runs `ceil(d·ln(1/ε)/ln(e/(e-1)))` iterations, enough for relative
/// accuracy `ε` when each cut keeps at most a `1 - 1/e` fraction.
pub fn baseline_cpm(obj: &Objective, epsilon: f64, samples: usize, seed: u64) -> Result<BaselineTrace> {
    let d = obj.theta0.len();
    let rate = (std::f64::consts::E / (std::f64::consts::E - 1.0)).ln();
    let iters = (d as f64 * (1.0 / epsilon).ln() / rate).ceil().max(1.0) as usize;
    let start_calls = obj.counter.snapshot().subgradient_calls;

    let mut body = OuterBody::new(Ball::new(obj.theta0.clone(), obj.radius)?);
    if let Some((lo, hi)) = obj.domain {
        for k in 0..d {
            let mut e = Vector::zeros(d);
            e[k] = 1.0;
            body = body.with_cut(Halfspace::new(e.clone(), hi)?, obj.theta0)?;
            body = body.with_cut(Halfspace::new(-e, -lo)?, obj.theta0)?;
        }
    }
    let mut start = obj.theta0.clone();
    let mut best = (f64::INFINITY, start.clone());
    let mut values = Vec::with_capacity(iters);
    for k in 0..iters {
        let cfg = ChainConfig::new(samples, derive_seed(seed, k as u64));
        let set = hit_and_run(&body, std::slice::from_ref(&start), &Density::Uniform, &cfg, None)?;
        let center = set.moments()?.mean;
        let (v, g) = obj.value_and_subgradient(&center)?;
        if v < best.0 {
            best = (v, center.clone());
        }
        values.push(best.0);
        if g.norm() == 0.0 {
            break;
        }
        body = body.with_cut(Halfspace::through(g, &center)?, &center)?;
        start = center;
    }
    Ok(BaselineTrace {
        values,
        best: best.0,
        best_point: best.1,
        subgradient_calls: obj.counter.snapshot().subgradient_calls - start_calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use decompopt::oracles::OneNorm;

    fn abs_terms() -> Vec<Term> {
        vec![Term { function: Arc::new(OneNorm { center: Vector::zeros(1) }), support: vec![0], lipschitz: 1.0 }]
    }

    fn objective<'a>(terms: &'a [Term], theta0: &'a Vector) -> Objective<'a> {
        Objective { terms, theta0, radius: 1.0, domain: None, counter: OracleCounter::new() }
    }

    #[test]
    fn subgradient_on_abs() {
        let terms = abs_terms();
        let theta0 = Vector::from_element(1, 0.8);
        let obj = objective(&terms, &theta0);
        let trace = baseline_subgradient(&obj, 1000).unwrap();
        assert!(trace.best <= 0.1, "{}", trace.best);
        assert_eq!(trace.subgradient_calls, 1000);
        assert!(trace.values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn cpm_calls_every_term_once_per_iteration() {
        let mut terms = abs_terms();
        terms.push(Term {
            function: Arc::new(OneNorm { center: Vector::from_element(1, 0.2) }),
            support: vec![0],
            lipschitz: 1.0,
        });
        let theta0 = Vector::from_element(1, 0.5);
        let obj = objective(&terms, &theta0);
        let trace = baseline_cpm(&obj, 0.05, 400, 1).unwrap();
        assert_eq!(trace.subgradient_calls, 2 * trace.values.len() as u64);
        // min |θ| + |θ - 0.2| = 0.2 on [0, 0.2].
        assert!(trace.best <= 0.2 + 0.05, "{}", trace.best);
    }

    #[test]
    fn projection_respects_box_and_ball() {
        let terms = abs_terms();
        let theta0 = Vector::from_vec(vec![0.5, 0.5]);
        let obj = Objective { terms: &terms, theta0: &theta0, radius: 0.3, domain: Some((0.0, 1.0)), counter: OracleCounter::new() };
        let p = obj.project(&Vector::from_vec(vec![3.0, 0.5]));
        assert!((p[0] - 0.8).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }
}
