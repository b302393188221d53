//! Starting points: inner-ball search from a separation oracle, and the
//! penalized Phase-I program that turns per-block inner balls into a
//! feasible interior start.

mod inner_ball;
mod phase1;

pub use inner_ball::{find_inner_ball, inner_ball_budget, InnerBallResult, CENTROID_SAMPLES};
pub use phase1::{default_penalty, phase1_initialize, Phase1Config, Phase1Result};

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::Ball;
use crate::linalg::Vector;
use crate::oracles::{SeparationOracle, SeparationResult};
use crate::solver::{derive_seed, Problem};

/// How per-block inner balls are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// Balls known analytically from the problem construction.
    #[default]
    Reduction,
    /// Balls found by [`find_inner_ball`] around each block's center.
    InnerBallSearch,
}

/// `K - shift`, so a body around `shift` looks centered at the origin.
struct Shifted<'a> {
    inner: &'a dyn SeparationOracle,
    shift: &'a Vector,
}

impl SeparationOracle for Shifted<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn separate(&self, q: &Vector) -> Result<SeparationResult> {
        Ok(match self.inner.separate(&(q + self.shift))? {
            SeparationResult::Member => SeparationResult::Member,
            SeparationResult::Separated(h) => {
                let offset = h.offset() - h.normal().dot(self.shift);
                SeparationResult::Separated(crate::geometry::Halfspace::new(h.normal().clone(), offset)?)
            }
        })
    }
}

/// Runs [`find_inner_ball`] on every block in parallel. Block `i` must
/// satisfy `B(z_i, r) ⊆ K_i ⊆ B(centers[i], R)`.
pub fn search_inner_balls(
    problem: &Problem,
    centers: &[Vector],
    outer_radius: f64,
    inner_radius: f64,
    seed: u64,
) -> Result<(Vec<Ball>, usize)> {
    let found: Vec<Result<InnerBallResult>> = (0..problem.n_blocks())
        .into_par_iter()
        .map(|i| {
            let shifted = Shifted { inner: problem.block(i).as_ref(), shift: &centers[i] };
            find_inner_ball(&shifted, outer_radius, inner_radius, derive_seed(seed, i as u64))
        })
        .collect();
    let mut balls = Vec::with_capacity(found.len());
    let mut calls = 0;
    for (i, res) in found.into_iter().enumerate() {
        let res = res?;
        calls += res.oracle_calls;
        balls.push(Ball { center: &res.center + &centers[i], radius: res.radius });
    }
    Ok((balls, calls))
}
