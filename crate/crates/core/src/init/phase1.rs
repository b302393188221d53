use std::ops::ControlFlow;
use std::sync::Arc;

use crate::barriers::is_strictly_interior;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{AffineSubspace, Ball, InnerBody, OuterBody};
use crate::linalg::{min_norm_solve, Matrix, Vector};
use crate::oracles::{KnownBody, SeparationOracle};
use crate::solver::{solve_with, InitialState, Problem, SolverConfig, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Config {
    pub solver: SolverConfig,
    /// Penalty scale `s`; defaults to `2^16·m^2.5·R/(r·ε)`.
    pub penalty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Result {
    pub init: InitialState,
    /// Minimum-norm solution of `A y = b - A z`.
    pub y: Vector,
    /// `max(y, 0)` and `max(-y, 0)`.
    pub positive: Vector,
    pub negative: Vector,
    /// Solver iterations spent on the modified program (0 when `A z = b`).
    pub iterations: usize,
    pub sep_calls: u64,
}

pub fn default_penalty(m: usize, outer_radius: f64, inner_radius: f64, epsilon: f64) -> f64 {
    65536.0 * (m as f64).powf(2.5) * outer_radius / (inner_radius * epsilon)
}

/// Feasible start for the main solver from one inner ball per block.
///
/// With `z` the concatenated ball centers, solves `A y = b - A z`. When
/// `y = 0` the balls themselves are the inner bodies. Otherwise runs the
/// solver on the penalized program over `(x¹, x², x³)` with
/// `A(x¹ + x² - x³) = b`, one `[0, U]` slack block per coordinate in the
/// support of `y`, until `x¹ + x² - x³` is interior to every inner body.
pub fn phase1_initialize(
    problem: &Problem,
    balls: &[Ball],
    outer: Vec<OuterBody>,
    cfg: &Phase1Config,
) -> Result<Phase1Result> {
    let n = problem.n_blocks();
    if balls.len() != n || outer.len() != n {
        return Err(Error::InvalidArgument("need one ball and one outer body per block".into()));
    }
    let m = problem.m();
    let mut z = Vector::zeros(m);
    for (i, b) in balls.iter().enumerate() {
        check_dim(problem.block_dim(i), b.dim())?;
        z.rows_mut(problem.block_range(i).start, b.dim()).copy_from(&b.center);
    }
    let sub = problem.subspace();
    let (a, b) = sub.constraints();
    let y = if a.nrows() == 0 { Vector::zeros(m) } else { min_norm_solve(a, &(b - a * &z))? };
    let positive = y.map(|v| v.max(0.0));
    let negative = y.map(|v| (-v).max(0.0));
    let inner: Vec<InnerBody> = balls.iter().cloned().map(InnerBody::new).collect();

    let x_direct = &z + &y;
    if interior_everywhere(problem, &inner, &x_direct)? {
        return Ok(Phase1Result {
            init: InitialState { x: x_direct, inner, outer },
            y,
            positive,
            negative,
            iterations: 0,
            sep_calls: 0,
        });
    }

    let ymax = y.amax();
    let support: Vec<usize> = (0..m).filter(|&k| y[k].abs() > 1e-12 * (1.0 + ymax)).collect();
    let k = support.len();
    let tau = ymax;
    let upper = 4.0 * (ymax + tau);

    let mut blocks: Vec<Arc<dyn SeparationOracle>> = (0..n).map(|i| problem.block(i).clone()).collect();
    let mut inner_bar = inner.clone();
    let mut outer_bar = outer.clone();
    let slack_oracle: Arc<dyn SeparationOracle> =
        Arc::new(KnownBody::Box { lo: Vector::zeros(1), hi: Vector::from_element(1, upper) });
    let mut x_bar = Vector::zeros(m + 2 * k);
    x_bar.rows_mut(0, m).copy_from(&z);
    for (j, &idx) in support.iter().enumerate() {
        x_bar[m + j] = positive[idx] + tau;
        x_bar[m + k + j] = negative[idx] + tau;
    }
    for j in 0..2 * k {
        blocks.push(slack_oracle.clone());
        inner_bar.push(InnerBody::new(Ball::new(Vector::from_element(1, x_bar[m + j]), 0.5 * tau)?));
        outer_bar.push(OuterBody::new(Ball::new(Vector::from_element(1, 0.5 * upper), 0.5 * upper)?));
    }

    let mut a_bar = Matrix::zeros(a.nrows(), m + 2 * k);
    a_bar.columns_mut(0, m).copy_from(a);
    for (j, &idx) in support.iter().enumerate() {
        a_bar.set_column(m + j, &a.column(idx));
        a_bar.set_column(m + k + j, &(-a.column(idx)));
    }
    let sub_bar = AffineSubspace::new(a_bar, b.clone())?;
    let x_bar = sub_bar.snap(&x_bar)?;

    let c = problem.cost();
    let cnorm = if c.norm() > 0.0 { c.norm() } else { 1.0 };
    let outer_radius = outer_bar.iter().map(|o| o.ball().radius).fold(0.0, f64::max);
    let inner_radius = inner_bar.iter().map(|b| b.seed().radius).fold(f64::INFINITY, f64::min);
    let eps = cfg.solver.epsilon;
    let s = cfg.penalty.unwrap_or_else(|| default_penalty(m, outer_radius, inner_radius, eps));
    let weight = s * cnorm / (m as f64).sqrt();
    let mut c_bar = Vector::from_element(m + 2 * k, weight);
    c_bar.rows_mut(0, m).copy_from(c);

    let modified = Problem::new(blocks, sub_bar, c_bar)?;
    let mut solver_cfg = cfg.solver.clone();
    solver_cfg.epsilon = (eps / (6.0 * (n as f64).sqrt() * s)).clamp(f64::MIN_POSITIVE, 0.49);
    solver_cfg.outer_radius = None;
    solver_cfg.inner_radius = None;

    let recover = |x: &Vector| -> Vector {
        let mut x_in = x.rows(0, m).into_owned();
        for (j, &idx) in support.iter().enumerate() {
            x_in[idx] += x[m + j] - x[m + k + j];
        }
        x_in
    };
    let mut found: Option<(Vector, Vec<InnerBody>, Vec<OuterBody>)> = None;
    let mut failure: Option<Error> = None;
    let init_bar = InitialState { x: x_bar, inner: inner_bar, outer: outer_bar };
    let outcome = solve_with(&modified, init_bar, &solver_cfg, &mut |state, _| {
        let x_in = recover(&state.x);
        match interior_everywhere(problem, &state.inner[..n], &x_in) {
            Ok(true) => {
                found = Some((x_in, state.inner[..n].to_vec(), state.outer[..n].to_vec()));
                ControlFlow::Break(())
            }
            Ok(false) => ControlFlow::Continue(()),
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let (x_in, inner, outer) = match found {
        Some(f) => f,
        None => {
            let x_in = recover(&outcome.x);
            let inner = outcome.state.inner[..n].to_vec();
            if outcome.status == Status::Stopped || !interior_everywhere(problem, &inner, &x_in)? {
                return Err(Error::NoConvergence { iterations: outcome.state.iter });
            }
            (x_in, inner, outcome.state.outer[..n].to_vec())
        }
    };
    let x_in = sub.snap(&x_in)?;
    Ok(Phase1Result {
        init: InitialState { x: x_in, inner, outer },
        y,
        positive,
        negative,
        iterations: outcome.state.iter,
        sep_calls: outcome.state.sep_calls,
    })
}

fn interior_everywhere(problem: &Problem, inner: &[InnerBody], x: &Vector) -> Result<bool> {
    for (i, body) in inner.iter().enumerate() {
        let xi = problem.slice(x, i);
        if !body.contains(&xi, 1e-9)? || !is_strictly_interior(body, &xi)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SamplingBudget;

    fn disc(cx: f64) -> Arc<dyn SeparationOracle> {
        Arc::new(KnownBody::Ball(Ball::new(Vector::from_vec(vec![cx, 0.0]), 1.0).unwrap()))
    }

    /// Two unit discs centered at 0 and (s, 0), coupled by `x¹ = x²`.
    fn coupled(s: f64) -> (Problem, Vec<Ball>, Vec<OuterBody>) {
        let mut a = Matrix::zeros(2, 4);
        for k in 0..2 {
            a[(k, k)] = 1.0;
            a[(k, k + 2)] = -1.0;
        }
        let sub = AffineSubspace::new(a, Vector::zeros(2)).unwrap();
        let problem = Problem::new(vec![disc(0.0), disc(s)], sub, Vector::from_vec(vec![1.0, 0.0, 1.0, 0.0])).unwrap();
        let balls = vec![
            Ball::new(Vector::from_vec(vec![0.0, 0.0]), 0.5).unwrap(),
            Ball::new(Vector::from_vec(vec![s, 0.0]), 0.5).unwrap(),
        ];
        let outer = balls.iter().map(|b| OuterBody::new(Ball::new(b.center.clone(), 1.2).unwrap())).collect();
        (problem, balls, outer)
    }

    fn cfg() -> Phase1Config {
        let solver = SolverConfig {
            eta: 0.25,
            outer_sampling: SamplingBudget::new(400),
            polar_sampling: SamplingBudget::new(300),
            seed: 4,
            ..SolverConfig::default()
        };
        Phase1Config { solver, penalty: None }
    }

    #[test]
    fn consistent_centers_need_no_solve() {
        let (problem, balls, outer) = coupled(0.0);
        let res = phase1_initialize(&problem, &balls, outer, &cfg()).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(res.y, Vector::zeros(4));
    }

    #[test]
    fn misaligned_centers_reach_a_feasible_interior_start() {
        let (problem, balls, outer) = coupled(1.2);
        let res = phase1_initialize(&problem, &balls, outer, &cfg()).unwrap();
        assert!(res.iterations > 0);
        assert!(res.y.norm() > 0.1);
        assert_eq!(res.positive - res.negative, res.y);
        assert!(problem.subspace().residual(&res.init.x).unwrap() <= 1e-9);
        assert!(interior_everywhere(&problem, &res.init.inner, &res.init.x).unwrap());
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let (problem, balls, outer) = coupled(0.0);
        assert!(phase1_initialize(&problem, &balls[..1], outer, &cfg()).is_err());
    }
}
