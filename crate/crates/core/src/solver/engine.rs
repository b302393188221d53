use std::ops::ControlFlow;
use std::time::Instant;

use super::config::derive_seed;
use super::{
    condition1_holds, condition2_violated, next_t, step_delta, Event, EventKind, InitialState, Problem, SolverConfig,
};
use crate::barriers::{is_strictly_interior, local_norm, outer_center, universal_metric, LocalMetric, OuterCenter};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{InnerBody, OuterBody};
use crate::linalg::{robust_cholesky, Matrix, Vector};
use crate::oracles::SeparationResult;

/// Membership tolerance for the Condition-2 guard.
const GUARD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// `t >= t_end` with Condition 1 false.
    Converged,
    MaxIterations,
    /// Stopped by the observer.
    Stopped,
}

/// Snapshot of the loop variables.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub t_init: f64,
    pub t_end: f64,
    pub x: Vector,
    pub inner: Vec<InnerBody>,
    pub outer: Vec<OuterBody>,
    pub center: OuterCenter,
    pub iter: usize,
    pub sep_calls: u64,
    pub t_updates: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: Vector,
    pub objective: f64,
    pub status: Status,
    pub events: Vec<Event>,
    pub state: SolverState,
}

pub struct Solver<'a> {
    problem: &'a Problem,
    cfg: &'a SolverConfig,
    state: SolverState,
    metrics: Vec<Option<LocalMetric>>,
    polar_precond: Vec<Option<Matrix>>,
    outer_precond: Option<Matrix>,
    max_iterations: usize,
    events: Vec<Event>,
    started: Instant,
    draws: u64,
}

pub fn solve(problem: &Problem, init: InitialState, cfg: &SolverConfig) -> Result<SolveOutcome> {
    solve_with(problem, init, cfg, &mut |_, _| ControlFlow::Continue(()))
}

/// Like [`solve`], calling `observer` after every logged event; returning
/// `Break` stops the run with [`Status::Stopped`].
pub fn solve_with(
    problem: &Problem,
    init: InitialState,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&SolverState, &Event) -> ControlFlow<()>,
) -> Result<SolveOutcome> {
    let mut solver = Solver::new(problem, init, cfg)?;
    loop {
        let (status, event) = solver.advance()?;
        if let Some(e) = &event {
            if observer(&solver.state, e).is_break() && status.is_none() {
                return Ok(solver.into_outcome(Status::Stopped));
            }
        }
        if let Some(status) = status {
            return Ok(solver.into_outcome(status));
        }
    }
}

impl<'a> Solver<'a> {
    pub fn new(problem: &'a Problem, init: InitialState, cfg: &'a SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let n = problem.n_blocks();
        let m = problem.m();
        if init.inner.len() != n || init.outer.len() != n {
            return Err(Error::InvalidArgument("initial state needs one inner and one outer body per block".into()));
        }
        check_dim(m, init.x.len())?;
        for i in 0..n {
            check_dim(problem.block_dim(i), init.inner[i].dim())?;
            check_dim(problem.block_dim(i), init.outer[i].dim())?;
        }
        if problem.subspace().reduced_dim() == 0 {
            return Err(Error::InvalidArgument("the affine constraints leave no freedom".into()));
        }
        let residual = problem.subspace().residual(&init.x)?;
        if residual > 1e-9 {
            return Err(Error::InconsistentSystem { residual });
        }
        for i in 0..n {
            let xi = problem.slice(&init.x, i);
            if !is_strictly_interior(&init.inner[i], &xi)? {
                return Err(Error::NotInterior);
            }
        }
        let cnorm = problem.cost().norm();
        if !(cnorm > 0.0) {
            return Err(Error::InvalidArgument("cost vector must be nonzero".into()));
        }
        let big_r = cfg
            .outer_radius
            .unwrap_or_else(|| init.outer.iter().map(|o| o.ball().radius).fold(0.0, f64::max));
        let small_r = cfg
            .inner_radius
            .unwrap_or_else(|| init.inner.iter().map(|b| b.seed().radius).fold(f64::INFINITY, f64::min));
        let mf = m as f64;
        let t_init = mf * mf.ln().max(1.0) / ((n as f64).sqrt() * cnorm * big_r);
        let t_end = 8.0 * mf / (cfg.epsilon * cnorm * big_r);
        let max_iterations = cfg.max_iterations.unwrap_or_else(|| {
            let ratio = (mf * big_r / (cfg.epsilon * small_r)).max(std::f64::consts::E);
            (50.0 * mf * ratio.ln()).ceil() as usize
        });

        let x = init.x.clone();
        let mut solver = Self {
            problem,
            cfg,
            state: SolverState {
                t: t_init,
                t_init,
                t_end,
                x: x.clone(),
                inner: init.inner,
                outer: init.outer,
                center: placeholder_center(m),
                iter: 0,
                sep_calls: 0,
                t_updates: 0,
            },
            metrics: vec![None; n],
            polar_precond: vec![None; n],
            outer_precond: None,
            max_iterations,
            events: Vec::new(),
            started: Instant::now(),
            draws: 0,
        };
        solver.estimate_center(&[x], false)?;
        Ok(solver)
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    fn next_seed(&mut self) -> u64 {
        self.draws += 1;
        derive_seed(self.cfg.seed, self.draws)
    }

    fn estimate_center(&mut self, starts: &[Vector], warm: bool) -> Result<()> {
        let sub = self.problem.subspace();
        let seed = self.next_seed();
        let budget = self.cfg.outer_sampling.chain_config(seed, warm, 1, sub.reduced_dim());
        let center = outer_center(
            &self.state.outer,
            sub,
            self.state.t,
            self.problem.cost(),
            &budget,
            starts,
            self.outer_precond.as_ref(),
        )?;
        self.outer_precond = Some(robust_cholesky(&center.reduced_covariance));
        self.state.center = center;
        Ok(())
    }

    fn metric(&mut self, i: usize, boost: usize) -> Result<&LocalMetric> {
        if self.metrics[i].is_none() {
            let xi = self.problem.slice(&self.state.x, i);
            let seed = self.next_seed();
            let d = self.problem.block_dim(i);
            let cfg = self.cfg.polar_sampling.chain_config(seed, false, boost, d);
            let metric = universal_metric(&self.state.inner[i], &xi, &cfg, self.polar_precond[i].as_ref())?;
            self.polar_precond[i] = Some(robust_cholesky(&metric.moments.covariance));
            self.metrics[i] = Some(metric);
        }
        Ok(self.metrics[i].as_ref().unwrap())
    }

    fn log(&mut self, kind: EventKind, block: Option<usize>, survival: Option<f64>) -> Event {
        let c = self.problem.cost();
        let event = Event {
            iter: self.state.iter,
            kind,
            block,
            t: self.state.t,
            objective: c.dot(&self.state.x),
            outer_objective: c.dot(&self.state.center.center),
            sep_calls: self.state.sep_calls,
            wall_ms: self.started.elapsed().as_secs_f64() * 1e3,
            survival,
        };
        self.events.push(event.clone());
        event
    }

    /// Performs one loop action. Returns a final status once the run ends.
    pub fn advance(&mut self) -> Result<(Option<Status>, Option<Event>)> {
        if self.state.iter >= self.max_iterations {
            return Ok((Some(Status::MaxIterations), None));
        }
        self.state.iter += 1;
        let c = self.problem.cost();
        let cx = c.dot(&self.state.x);
        let cx_out = c.dot(&self.state.center.center);
        let slack = self.cfg.noise_slack * self.state.center.moments.stderr_of(c);
        if !condition1_holds(cx, cx_out, self.problem.m(), self.state.t, slack) {
            if self.state.t >= self.state.t_end {
                self.finalize()?;
                let e = self.log(EventKind::Terminate, None, None);
                return Ok((Some(Status::Converged), Some(e)));
            }
            self.state.t = next_t(self.state.t, self.cfg.eta, self.problem.m());
            self.state.t_updates += 1;
            let starts = self.state.center.samples.final_states.clone();
            self.estimate_center(&starts, true)?;
            let e = self.log(EventKind::TUpdate, None, None);
            return Ok((None, Some(e)));
        }
        for i in 0..self.problem.n_blocks() {
            if self.violated(i)? {
                let e = self.process_block(i)?;
                return Ok((None, Some(e)));
            }
        }
        self.step_x()?;
        let e = self.log(EventKind::XStep, None, None);
        Ok((None, Some(e)))
    }

    fn violated(&mut self, i: usize) -> Result<bool> {
        let target = self.problem.slice(&self.state.center.center, i);
        // Points already in the inner body satisfy Condition 2 exactly.
        let inside = self.state.inner[i].contains(&target, GUARD_TOL)?;
        if inside {
            return Ok(false);
        }
        let v = &target - self.problem.slice(&self.state.x, i);
        let range = self.problem.block_range(i);
        let out_se = self.state.center.moments.stderr.rows(range.start, range.len()).into_owned();
        let eta = self.cfg.eta;
        let kappa = self.cfg.noise_slack;
        let metric = self.metric(i, 1)?;
        let se = metric.grad_stderr_along(&v) + metric.grad.abs().dot(&out_se);
        condition2_violated(metric, &v, eta, kappa * se)
    }

    fn process_block(&mut self, i: usize) -> Result<Event> {
        let q = self.problem.slice(&self.state.center.center, i);
        self.state.sep_calls += 1;
        match self.problem.block(i).separate(&q)? {
            SeparationResult::Member => {
                self.state.inner[i] = self.state.inner[i].with_point(q)?;
                self.metrics[i] = None;
                // x*_out depends only on the outer bodies and t, so it stays.
                Ok(self.log(EventKind::KinGrow, Some(i), None))
            }
            SeparationResult::Separated(h) => {
                let xi = self.problem.slice(&self.state.x, i);
                let range = self.problem.block_range(i);
                let previous = &self.state.center.samples.samples;
                let kept = previous.iter().filter(|s| h.contains(&s.rows(range.start, range.len()).into_owned())).count();
                let survival = kept as f64 / previous.len().max(1) as f64;
                self.state.outer[i] = self.state.outer[i].with_cut(h, &xi)?;
                let starts = vec![self.state.x.clone()];
                self.estimate_center(&starts, false)?;
                Ok(self.log(EventKind::KoutCut, Some(i), Some(survival)))
            }
        }
    }

    fn step_x(&mut self) -> Result<()> {
        let mut boost = 1;
        loop {
            for i in 0..self.problem.n_blocks() {
                self.metric(i, boost)?;
            }
            let metrics: Vec<&LocalMetric> = self.metrics.iter().map(|m| m.as_ref().unwrap()).collect();
            let v = &self.state.center.center - &self.state.x;
            let Some(delta) = step_delta(self.problem, &metrics, &v, self.cfg.eta)? else {
                return Ok(());
            };
            let candidate = self.problem.subspace().snap(&(&self.state.x + delta))?;
            match self.first_non_interior(&candidate)? {
                None => {
                    self.state.x = candidate;
                    self.metrics.iter_mut().for_each(|m| *m = None);
                    return Ok(());
                }
                Some(block) if boost > 1 => return Err(Error::StepInfeasible { block }),
                Some(_) => {
                    boost = 4;
                    self.metrics.iter_mut().for_each(|m| *m = None);
                }
            }
        }
    }

    fn first_non_interior(&self, x: &Vector) -> Result<Option<usize>> {
        for i in 0..self.problem.n_blocks() {
            if !is_strictly_interior(&self.state.inner[i], &self.problem.slice(x, i))? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Damped descent on `t·c·x + Σ ψ_in,i(x_i)`, keeping the feasible
    /// iterate with the smallest `c·x`.
    fn finalize(&mut self) -> Result<()> {
        let c = self.problem.cost().clone();
        let entering = self.state.x.clone();
        let mut best = entering.clone();
        let mut best_obj = c.dot(&best);
        for _ in 0..self.cfg.finalize_steps {
            for i in 0..self.problem.n_blocks() {
                self.metric(i, 1)?;
            }
            let metrics: Vec<&LocalMetric> = self.metrics.iter().map(|m| m.as_ref().unwrap()).collect();
            let mut g = &c * self.state.t;
            for (i, m) in metrics.iter().enumerate() {
                let r = self.problem.block_range(i);
                let mut rows = g.rows_mut(r.start, r.len());
                rows += &m.grad;
            }
            let basis = self.problem.subspace().basis();
            let dir = -(basis * basis.tr_mul(&g));
            if dir.norm() <= 1e-14 * (1.0 + g.norm()) {
                break;
            }
            let Some(delta) = step_delta(self.problem, &metrics, &dir, self.cfg.eta)? else {
                break;
            };
            let mut model = g.dot(&delta);
            for (i, m) in metrics.iter().enumerate() {
                let n = local_norm(m, &self.problem.slice(&delta, i))?;
                model += 0.5 * n * n;
            }
            if model >= 0.0 {
                break;
            }
            let candidate = self.problem.subspace().snap(&(&self.state.x + delta))?;
            if self.first_non_interior(&candidate)?.is_some() {
                break;
            }
            self.state.x = candidate;
            self.metrics.iter_mut().for_each(|m| *m = None);
            let obj = c.dot(&self.state.x);
            if obj < best_obj {
                best_obj = obj;
                best = self.state.x.clone();
            }
        }
        if self.state.x != best {
            self.metrics.iter_mut().for_each(|m| *m = None);
        }
        self.state.x = best;
        Ok(())
    }

    pub fn into_outcome(self, status: Status) -> SolveOutcome {
        SolveOutcome {
            objective: self.problem.cost().dot(&self.state.x),
            x: self.state.x.clone(),
            status,
            events: self.events,
            state: self.state,
        }
    }
}

fn placeholder_center(m: usize) -> OuterCenter {
    use crate::sampling::{MomentEstimate, SampleSet};
    let moments = MomentEstimate {
        mean: Vector::zeros(m),
        covariance: Matrix::zeros(m, m),
        n: 0,
        stderr: Vector::zeros(m),
        batch_means: Vec::new(),
    };
    OuterCenter {
        center: Vector::zeros(m),
        moments,
        reduced_covariance: Matrix::zeros(0, 0),
        samples: SampleSet { samples: Vec::new(), chain_lengths: Vec::new(), final_states: Vec::new() },
    }
}
