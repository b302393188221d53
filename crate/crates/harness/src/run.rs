//! Single runs: solver configuration, trace rows and the summary record.

use std::fs;
use std::ops::ControlFlow;
use std::path::Path;
use std::time::Instant;

use decompopt::init::{phase1_initialize, search_inner_balls, Phase1Config};
use decompopt::oracles::{CounterSnapshot, EpigraphProgram, OracleCounter};
use decompopt::sfm::{brute_force_min, minimize_decomposable_with, SubmodularInstance, BRUTE_FORCE_LIMIT};
use decompopt::solver::{solve_with, Event, SamplingBudget, SolverConfig, Status};
use decompopt::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::spec::{generate, EpigraphInstance, Generated, ProblemSpec};

pub const DEFAULT_SAMPLES: usize = 500;
pub const DEFAULT_POLAR_SAMPLES: usize = 300;
pub const DEFAULT_ETA: f64 = 0.25;
pub const DEFAULT_NOISE_SLACK: f64 = 3.0;

/// Every knob that can change a run's result; hashed into the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub epsilon: f64,
    pub seed: u64,
    pub samples: usize,
    pub polar_samples: usize,
    pub eta: f64,
    pub noise_slack: f64,
}

impl RunConfig {
    pub fn for_spec(spec: &ProblemSpec) -> Self {
        Self::new(spec.epsilon, spec.seed)
    }

    pub fn new(epsilon: f64, seed: u64) -> Self {
        Self {
            epsilon,
            seed,
            samples: DEFAULT_SAMPLES,
            polar_samples: DEFAULT_POLAR_SAMPLES,
            eta: DEFAULT_ETA,
            noise_slack: DEFAULT_NOISE_SLACK,
        }
    }

    /// `--samples n` sets the outer budget to `n` and the polar budget to
    /// `0.6·n`, the ratio of the defaults.
    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self.polar_samples = (n * 3).div_ceil(5).max(2);
        self
    }

    /// Solver settings; `epsilon` is left for the caller to convert.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            eta: self.eta,
            noise_slack: self.noise_slack,
            outer_sampling: SamplingBudget::new(self.samples),
            polar_sampling: SamplingBudget::new(self.polar_samples),
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

/// One solver event. Columns are fixed: `iter, event_kind, block, t,
/// objective, sep_calls, eval_calls, wall_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub event_kind: String,
    pub block: Option<usize>,
    pub t: f64,
    pub objective: f64,
    pub sep_calls: u64,
    pub eval_calls: u64,
    pub wall_ms: f64,
}

impl TraceRow {
    fn new(event: &Event, counts: &CounterSnapshot) -> Self {
        Self {
            iter: event.iter,
            event_kind: event.kind.as_str().to_string(),
            block: event.block,
            t: event.t,
            objective: event.objective,
            sep_calls: counts.separation_calls,
            eval_calls: counts.evaluation_calls,
            wall_ms: event.wall_ms,
        }
    }
}

/// Run result without timings, so equal inputs give equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: String,
    pub status: Status,
    pub final_value: f64,
    pub optimum: Option<f64>,
    /// `final_value - optimum`.
    pub gap: Option<f64>,
    /// Allowed gap: `ε·‖c‖·R` for epigraph problems, `ε` for SFM.
    pub tolerance: f64,
    pub within_tolerance: Option<bool>,
    /// Rounded minimizer, for SFM.
    pub set: Option<Vec<usize>>,
    /// Total block dimension.
    pub m: usize,
    pub iterations: usize,
    pub sep_calls: u64,
    pub subgradient_calls: u64,
    pub eval_calls: u64,
    pub seed: u64,
    pub epsilon: f64,
    pub config_hash: String,
}

pub struct RunReport {
    pub summary: Summary,
    pub trace: Vec<TraceRow>,
    pub wall_ms: f64,
}

/// SHA-256 of the canonical JSON of the problem and the run configuration.
pub fn config_hash(spec: &impl Serialize, cfg: &RunConfig) -> String {
    let canonical = serde_json::json!({ "spec": spec, "config": cfg });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

pub fn run_spec(spec: &ProblemSpec, cfg: &RunConfig) -> Result<RunReport> {
    let kind = serde_json::to_value(spec)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string))
        .unwrap_or_default();
    let hash = config_hash(spec, cfg);
    match generate(spec)? {
        Generated::Sfm(inst) => run_sfm(&inst, cfg, &kind, hash),
        Generated::Epigraph(inst) => run_epigraph(&inst, spec.inner_radius, cfg, &kind, hash),
    }
}

/// Runs the SFM driver; the optimum comes from enumeration when the ground
/// set is small enough.
pub fn run_sfm(inst: &SubmodularInstance, cfg: &RunConfig, kind: &str, hash: String) -> Result<RunReport> {
    let started = Instant::now();
    let mut trace = Vec::new();
    let out = minimize_decomposable_with(inst, cfg.epsilon, &cfg.solver_config(), &mut |_, event, counts| {
        trace.push(TraceRow::new(event, counts));
        ControlFlow::Continue(())
    })?;
    let optimum = if inst.ground_set <= BRUTE_FORCE_LIMIT { Some(brute_force_min(inst)?.1) } else { None };
    let gap = optimum.map(|o| out.value - o);
    let summary = Summary {
        kind: kind.to_string(),
        status: out.status,
        final_value: out.value,
        optimum,
        gap,
        tolerance: cfg.epsilon,
        within_tolerance: gap.map(|g| g <= cfg.epsilon),
        set: Some(out.set),
        m: inst.terms.iter().map(|t| t.support.len() + 1).sum(),
        iterations: out.iterations,
        sep_calls: out.counters.separation_calls,
        subgradient_calls: out.counters.subgradient_calls,
        eval_calls: out.counters.evaluation_calls,
        seed: cfg.seed,
        epsilon: cfg.epsilon,
        config_hash: hash,
    };
    Ok(RunReport { summary, trace, wall_ms: started.elapsed().as_secs_f64() * 1e3 })
}

/// Solves the epigraph program to absolute accuracy `ε·L·R`, `L` the
/// largest term Lipschitz constant.
pub fn run_epigraph(
    inst: &EpigraphInstance,
    inner_radius: Option<f64>,
    cfg: &RunConfig,
    kind: &str,
    hash: String,
) -> Result<RunReport> {
    let started = Instant::now();
    let counter = OracleCounter::new();
    let program = EpigraphProgram::new(&inst.terms, &inst.theta0, inst.radius, inst.domain, Some(counter.clone()))?;
    let problem = program.problem();
    let mut solver = cfg.solver_config();
    solver.epsilon = program.solver_epsilon(cfg.epsilon * inst.lipschitz() * inst.radius).min(0.49);

    let balls = match inner_radius {
        None => program.inner_balls(),
        Some(r) => {
            let centers: Vec<_> = program.bounding_bodies().iter().map(|b| b.ball().center.clone()).collect();
            search_inner_balls(problem, &centers, program.outer_radius(), r, cfg.seed)?.0
        }
    };
    let phase1 = Phase1Config { solver: solver.clone(), penalty: None };
    let init = phase1_initialize(problem, &balls, program.bounding_bodies(), &phase1)?;

    let mut trace = Vec::new();
    let out = solve_with(problem, init.init, &solver, &mut |_, event| {
        trace.push(TraceRow::new(event, &counter.snapshot()));
        ControlFlow::Continue(())
    })?;
    let theta = program.recover_theta(&out.x);
    let final_value = program.objective(&theta)?;
    let tolerance = cfg.epsilon * problem.cost().norm() * inst.radius;
    let gap = inst.optimum.map(|o| final_value - o);
    let counts = counter.snapshot();
    let summary = Summary {
        kind: kind.to_string(),
        status: out.status,
        final_value,
        optimum: inst.optimum,
        gap,
        tolerance,
        within_tolerance: gap.map(|g| g <= tolerance),
        set: None,
        m: problem.m(),
        iterations: out.state.iter,
        sep_calls: counts.separation_calls,
        subgradient_calls: counts.subgradient_calls,
        eval_calls: counts.evaluation_calls,
        seed: cfg.seed,
        epsilon: cfg.epsilon,
        config_hash: hash,
    };
    Ok(RunReport { summary, trace, wall_ms: started.elapsed().as_secs_f64() * 1e3 })
}

/// Writes `trace.csv` and `summary.json` into `dir`, creating it.
pub fn write_artifacts(dir: &Path, report: &RunReport) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("trace.csv"), &report.trace)?;
    write_json(&dir.join("summary.json"), &report.summary)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)
}
