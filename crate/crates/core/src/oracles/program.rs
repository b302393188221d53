use std::sync::Arc;

use super::{wrap_counting, ConvexFunction, EpigraphBlock, OracleCounter, SeparationOracle};
use crate::error::{Error, Result};
use crate::geometry::{AffineSubspace, Ball, OuterBody};
use crate::linalg::{Matrix, Vector};
use crate::solver::Problem;

/// One summand `f_i` of `Σ_i f_i(θ)`, reading the coordinates `support`.
#[derive(Clone)]
pub struct Term {
    pub function: Arc<dyn ConvexFunction>,
    pub support: Vec<usize>,
    /// Lipschitz bound of `f_i` on the trust region.
    pub lipschitz: f64,
}

/// Epigraph form of `min_θ Σ_i f_i(θ)`: one block `(x_i, z_i)` per term,
/// copies of shared coordinates tied by equality rows, cost `L_i` on
/// each `z_i`.
pub struct EpigraphProgram {
    blocks: Vec<EpigraphBlock>,
    supports: Vec<Vec<usize>>,
    n_vars: usize,
    theta0: Vector,
    problem: Problem,
}

impl EpigraphProgram {
    /// `radius` bounds `‖x_i - θ0|_{V_i}‖` in every block; `domain`, when
    /// given, boxes every coordinate.
    pub fn new(
        terms: &[Term],
        theta0: &Vector,
        radius: f64,
        domain: Option<(f64, f64)>,
        counter: Option<Arc<OracleCounter>>,
    ) -> Result<Self> {
        let n_vars = theta0.len();
        if terms.is_empty() {
            return Err(Error::InvalidArgument("need at least one term".into()));
        }
        let mut blocks = Vec::with_capacity(terms.len());
        let mut supports = Vec::with_capacity(terms.len());
        for term in terms {
            if term.support.iter().any(|&k| k >= n_vars) || term.support.is_empty() {
                return Err(Error::InvalidArgument("term support out of range".into()));
            }
            let center = Vector::from_iterator(term.support.len(), term.support.iter().map(|&k| theta0[k]));
            let mut block = EpigraphBlock::new(term.function.clone(), term.lipschitz, center, radius)?;
            if let Some((lo, hi)) = domain {
                let d = term.support.len();
                block = block.with_domain(Vector::from_element(d, lo), Vector::from_element(d, hi))?;
            }
            if let Some(c) = &counter {
                block = block.with_counter(c.clone());
            }
            blocks.push(block);
            supports.push(term.support.clone());
        }

        let mut offsets = vec![0];
        for s in &supports {
            offsets.push(offsets.last().unwrap() + s.len() + 1);
        }
        let m = *offsets.last().unwrap();
        // Copies of coordinate k, in block order; consecutive copies are tied.
        let mut rows: Vec<(usize, usize)> = Vec::new();
        for k in 0..n_vars {
            let copies: Vec<usize> = supports
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.iter().position(|&v| v == k).map(|p| offsets[i] + p))
                .collect();
            for w in copies.windows(2) {
                rows.push((w[0], w[1]));
            }
        }
        let mut a = Matrix::zeros(rows.len(), m);
        for (r, &(p, q)) in rows.iter().enumerate() {
            a[(r, p)] = 1.0;
            a[(r, q)] = -1.0;
        }
        let sub = AffineSubspace::new(a, Vector::zeros(rows.len()))?;
        let mut cost = Vector::zeros(m);
        for (i, t) in terms.iter().enumerate() {
            cost[offsets[i + 1] - 1] = t.lipschitz;
        }
        let oracles: Vec<Arc<dyn SeparationOracle>> = blocks
            .iter()
            .map(|b| match &counter {
                Some(c) => Arc::new(wrap_counting(b.clone(), c.clone())) as Arc<dyn SeparationOracle>,
                None => Arc::new(b.clone()) as Arc<dyn SeparationOracle>,
            })
            .collect();
        let problem = Problem::new(oracles, sub, cost)?;
        Ok(Self { blocks, supports, n_vars, theta0: theta0.clone(), problem })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn blocks(&self) -> &[EpigraphBlock] {
        &self.blocks
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Analytic inner balls; their centers satisfy the coupling rows.
    pub fn inner_balls(&self) -> Vec<Ball> {
        self.blocks.iter().map(|b| b.inner_ball()).collect()
    }

    pub fn bounding_bodies(&self) -> Vec<OuterBody> {
        self.blocks.iter().map(|b| OuterBody::new(b.bounding_ball())).collect()
    }

    /// Radius of the bounding balls, `sqrt5·R`.
    pub fn outer_radius(&self) -> f64 {
        self.blocks.iter().map(|b| b.bounding_ball().radius).fold(0.0, f64::max)
    }

    /// Solver epsilon for an absolute objective accuracy `target`.
    pub fn solver_epsilon(&self, target: f64) -> f64 {
        target / (self.problem.cost().norm() * self.outer_radius())
    }

    /// `θ` read from the first block holding each coordinate; coordinates
    /// in no term keep their `θ0` value.
    pub fn recover_theta(&self, x: &Vector) -> Vector {
        let mut theta = self.theta0.clone();
        let mut seen = vec![false; self.n_vars];
        for (i, s) in self.supports.iter().enumerate() {
            let start = self.problem.block_range(i).start;
            for (p, &k) in s.iter().enumerate() {
                if !seen[k] {
                    seen[k] = true;
                    theta[k] = x[start + p];
                }
            }
        }
        theta
    }

    /// `Σ_i f_i(θ)`.
    pub fn objective(&self, theta: &Vector) -> Result<f64> {
        let mut total = 0.0;
        for (b, s) in self.blocks.iter().zip(&self.supports) {
            let xi = Vector::from_iterator(s.len(), s.iter().map(|&k| theta[k]));
            total += b.function().value(&xi)?;
        }
        Ok(total)
    }
}
