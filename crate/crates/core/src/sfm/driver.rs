use std::ops::ControlFlow;
use std::sync::Arc;

use super::{lovasz_value, round_to_set, LovaszExtension, SetFunction, SubmodularInstance};
use crate::error::{Error, Result};
use crate::init::{phase1_initialize, Phase1Config};
use crate::linalg::Vector;
use crate::oracles::{CounterSnapshot, EpigraphProgram, OracleCounter, Term};
use crate::solver::{solve_with, Event, SolverConfig, SolverState, Status};

/// Lipschitz constant used for every term; valid when each `F_i` takes
/// values in `[-1, 1]`.
pub const TERM_LIPSCHITZ: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct SfmOutcome {
    /// Rounded minimizer, ascending.
    pub set: Vec<usize>,
    /// `F(set)`.
    pub value: f64,
    /// Fractional point read off the solver's final iterate.
    pub fractional: Vector,
    /// `f̂(fractional)`.
    pub extension_value: f64,
    pub status: Status,
    pub iterations: usize,
    pub counters: CounterSnapshot,
    pub events: Vec<Event>,
}

/// Epigraph program of `min Σ_i f̂_i` over the unit cube: one block per
/// term around `θ0 = 1/2`, radius `sqrt(max|V_i|)/2` so the ball holds the
/// cube.
pub fn sfm_program(inst: &SubmodularInstance, counter: Option<Arc<OracleCounter>>) -> Result<EpigraphProgram> {
    inst.validate()?;
    let terms: Vec<Term> = inst
        .terms
        .iter()
        .map(|t| {
            let mut ext = LovaszExtension::new(Arc::new(t.clone()));
            if let Some(c) = &counter {
                ext = ext.with_counter(c.clone());
            }
            Term { function: Arc::new(ext), support: t.support.clone(), lipschitz: TERM_LIPSCHITZ }
        })
        .collect();
    let theta0 = Vector::from_element(inst.ground_set, 0.5);
    let radius = 0.5 * (inst.max_support() as f64).sqrt();
    EpigraphProgram::new(&terms, &theta0, radius, Some((0.0, 1.0)), counter)
}

pub fn minimize_decomposable(inst: &SubmodularInstance, epsilon: f64, cfg: &SolverConfig) -> Result<SfmOutcome> {
    minimize_decomposable_with(inst, epsilon, cfg, &mut |_, _, _| ControlFlow::Continue(()))
}

/// Minimizes `F` to within `epsilon` (absolute) up to sampling noise.
///
/// `cfg.epsilon` is replaced by the program's relative accuracy for
/// `epsilon`. The observer sees every solver event together with the
/// oracle counters at that point.
pub fn minimize_decomposable_with(
    inst: &SubmodularInstance,
    epsilon: f64,
    cfg: &SolverConfig,
    observer: &mut dyn FnMut(&SolverState, &Event, &CounterSnapshot) -> ControlFlow<()>,
) -> Result<SfmOutcome> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let counter = OracleCounter::new();
    let program = sfm_program(inst, Some(counter.clone()))?;
    let mut solver_cfg = cfg.clone();
    solver_cfg.epsilon = program.solver_epsilon(epsilon).min(0.49);
    let phase1 = Phase1Config { solver: solver_cfg.clone(), penalty: None };
    let init = phase1_initialize(program.problem(), &program.inner_balls(), program.bounding_bodies(), &phase1)?;
    let outcome = solve_with(program.problem(), init.init, &solver_cfg, &mut |state, event| {
        observer(state, event, &counter.snapshot())
    })?;

    let fractional = program.recover_theta(&outcome.x).map(|v| v.clamp(0.0, 1.0));
    let extension_value = lovasz_value(inst, fractional.as_slice())?;
    let (set, value) = round_to_set(inst, fractional.as_slice())?;
    // Each instance evaluation queries every term once; the extension value
    // above reuses the prefixes of the rounding scan.
    counter.record_evaluations(((inst.size() + 1) * inst.terms.len()) as u64);
    Ok(SfmOutcome {
        set,
        value,
        fractional,
        extension_value,
        status: outcome.status,
        iterations: outcome.state.iter,
        counters: counter.snapshot(),
        events: outcome.events,
    })
}
