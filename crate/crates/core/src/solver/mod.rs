//! The interior-point loop over inner and outer approximations: t updates
//! on Condition 1, oracle queries on Condition 2, and normalized steps of
//! `x` towards the outer centroid.

mod config;
mod engine;
mod events;

pub use config::{derive_seed, SamplingBudget, SolverConfig};
pub use engine::{solve, solve_with, SolveOutcome, Solver, SolverState, Status};
pub use events::{Event, EventKind};

use std::ops::Range;
use std::sync::Arc;

use crate::barriers::{local_norm, LocalMetric};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{AffineSubspace, InnerBody, OuterBody};
use crate::linalg::Vector;
use crate::oracles::SeparationOracle;

/// `min c·x` over `Π_i K_i ∩ {A x = b}`, each `K_i` given by an oracle.
#[derive(Clone)]
pub struct Problem {
    blocks: Vec<Arc<dyn SeparationOracle>>,
    subspace: AffineSubspace,
    cost: Vector,
    offsets: Vec<usize>,
}

impl Problem {
    pub fn new(blocks: Vec<Arc<dyn SeparationOracle>>, subspace: AffineSubspace, cost: Vector) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("problem needs at least one block".into()));
        }
        let mut offsets = vec![0];
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + b.dim());
        }
        let m = *offsets.last().unwrap();
        check_dim(m, subspace.dim())?;
        check_dim(m, cost.len())?;
        Ok(Self { blocks, subspace, cost, offsets })
    }

    /// Total dimension `Σ_i D_i`.
    pub fn m(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> &Arc<dyn SeparationOracle> {
        &self.blocks[i]
    }

    pub fn block_range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn block_dim(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn subspace(&self) -> &AffineSubspace {
        &self.subspace
    }

    pub fn cost(&self) -> &Vector {
        &self.cost
    }

    pub fn slice(&self, x: &Vector, i: usize) -> Vector {
        x.rows(self.offsets[i], self.block_dim(i)).into_owned()
    }
}

/// Starting point with per-block inner and outer approximations.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub x: Vector,
    pub inner: Vec<InnerBody>,
    pub outer: Vec<OuterBody>,
}

/// `c·x > c·x*_out + 4m/t + slack`: room for progress at the current `t`.
pub fn condition1_holds(cx: f64, cx_out: f64, m: usize, t: f64, slack: f64) -> bool {
    cx > cx_out + 4.0 * m as f64 / t + slack
}

/// `⟨grad, v⟩ + η‖v‖_x >= 4D - slack` with `v = x*_out,i - x_i`.
pub fn condition2_violated(metric: &LocalMetric, v: &Vector, eta: f64, slack: f64) -> Result<bool> {
    let lhs = metric.grad.dot(v) + eta * local_norm(metric, v)?;
    Ok(lhs >= 4.0 * metric.block_dim as f64 - slack)
}

/// `t·(1 + η/(4m))`.
pub fn next_t(t: f64, eta: f64, m: usize) -> f64 {
    t * (1.0 + eta / (4.0 * m as f64))
}

/// `(η/2)·v / Σ_i ‖v_i‖_{x_i}`, or `None` when `v` has zero local length.
pub fn step_delta(problem: &Problem, metrics: &[&LocalMetric], v: &Vector, eta: f64) -> Result<Option<Vector>> {
    let mut total = 0.0;
    for (i, m) in metrics.iter().enumerate() {
        total += local_norm(m, &problem.slice(v, i))?;
    }
    if !(total > 0.0) {
        return Ok(None);
    }
    Ok(Some(v * (0.5 * eta / total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::metric_from_moments;
    use crate::linalg::Matrix;
    use crate::sampling::MomentEstimate;

    fn metric_1d(mu: f64, sigma2: f64) -> LocalMetric {
        metric_from_moments(MomentEstimate {
            mean: Vector::from_vec(vec![mu]),
            covariance: Matrix::from_element(1, 1, sigma2),
            n: 100,
            stderr: Vector::zeros(1),
            batch_means: vec![],
        })
    }

    #[test]
    fn condition1_examples() {
        assert!(condition1_holds(10.0, 1.0, 1, 2.0, 0.0));
        assert!(!condition1_holds(1.0, 1.0, 5, 3.0, 0.0));
        // Equality does not count as room for progress.
        assert!(!condition1_holds(3.0, 1.0, 1, 2.0, 0.0));
    }

    #[test]
    fn condition2_examples() {
        // Symmetric center, x*_out = x.
        let m = metric_1d(0.0, 1.0);
        assert!(!condition2_violated(&m, &Vector::zeros(1), 0.01, 0.0).unwrap());
        // Zero gradient, local length 4D/η + 1.
        let eta = 0.01;
        let unit = local_norm(&m, &Vector::from_element(1, 1.0)).unwrap();
        let v = Vector::from_element(1, (4.0 / eta + 1.0) / unit);
        assert!(condition2_violated(&m, &v, eta, 0.0).unwrap());
        // Interval [0,2] at 0.5 with x*_out = 1.9.
        let m = metric_1d(-2.0 / 3.0, 16.0 / 27.0);
        let v = Vector::from_element(1, 1.4);
        let lhs = m.grad.dot(&v) + eta * local_norm(&m, &v).unwrap();
        assert!((lhs + 1.837).abs() < 2e-3, "{lhs}");
        assert!(!condition2_violated(&m, &v, eta, 0.0).unwrap());
    }

    #[test]
    fn t_schedule() {
        assert!((next_t(1.0, 0.01, 10) - 1.00025).abs() < 1e-15);
    }
}
