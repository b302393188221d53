//! Command-line front end. Every subcommand writes its artifacts under
//! `--out` and maps the outcome to an exit code.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use decompopt::geometry::{Ball, Halfspace};
use decompopt::init::{find_inner_ball, inner_ball_budget};
use decompopt::oracles::{wrap_counting, KnownBody, OracleCounter, SeparationOracle};
use decompopt::sfm::SubmodularInstance;
use decompopt::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bench::{bench_instance, suite};
use crate::run::{config_hash, run_sfm, run_spec, write_artifacts, write_csv, write_json, RunConfig};
use crate::spec::ProblemSpec;

/// Exit code when a run finishes outside its tolerance.
pub const EXIT_MISSED: i32 = 1;
/// Exit code for bad input or a solver error.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "decompopt", version, about = "Decomposable convex optimization with separation oracles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Minimize a submodular instance file.
    Sfm {
        #[arg(long)]
        instance: PathBuf,
        /// Exit 0 only when within epsilon of the enumerated minimum.
        #[arg(long)]
        brute_force_check: bool,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Run a benchmark suite.
    Bench {
        #[arg(long, default_value = "desk")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Find a ball inside a convex body given by a separation oracle.
    InnerBall {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        probes: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunFlags {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Outer-centroid samples per estimate; polar budgets scale with it.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub noise_slack: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

impl RunFlags {
    fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.samples {
            cfg = cfg.with_samples(n);
        }
        if let Some(eta) = self.eta {
            cfg.eta = eta;
        }
        if let Some(k) = self.noise_slack {
            cfg.noise_slack = k;
        }
        cfg
    }
}

/// Machine-readable failure, printed as JSON on stderr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub reason: String,
    pub message: String,
}

impl Failure {
    fn new(reason: &str, message: impl ToString) -> Self {
        Self { reason: reason.to_string(), message: message.to_string() }
    }
}

impl From<decompopt::Error> for Failure {
    fn from(e: decompopt::Error) -> Self {
        use decompopt::Error::*;
        let reason = match e {
            InvalidArgument(_) | DimensionMismatch { .. } | TooLarge(_) | InconsistentSystem { .. } => "invalid_input",
            _ => "solver",
        };
        Failure::new(reason, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new("io", e)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))
}

/// Runs a parsed command; returns the exit code.
pub fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Solve { problem, run } => {
            let mut spec: ProblemSpec = read_json(&problem)?;
            let cfg = run.apply(RunConfig::for_spec(&spec));
            spec.epsilon = cfg.epsilon;
            spec.seed = cfg.seed;
            let report = run_spec(&spec, &cfg)?;
            write_artifacts(&run.out, &report)?;
            Ok(exit_for(report.summary.within_tolerance))
        }
        Command::Sfm { instance, brute_force_check, run } => {
            let inst: SubmodularInstance = read_json(&instance)?;
            inst.validate()?;
            let cfg = run.apply(RunConfig::new(0.02, 0));
            let hash = config_hash(&inst, &cfg);
            let report = run_sfm(&inst, &cfg, "sfm", hash)?;
            write_artifacts(&run.out, &report)?;
            Ok(if brute_force_check { exit_for(report.summary.within_tolerance.or(Some(false))) } else { 0 })
        }
        Command::Bench { suite: name, seeds, run } => {
            let specs = suite(&name, seeds)?;
            let mut rows = Vec::with_capacity(specs.len());
            let mut comparisons = Vec::with_capacity(specs.len());
            for (label, mut spec) in specs {
                let cfg = run.apply(RunConfig::for_spec(&spec));
                spec.seed = cfg.seed;
                let (row, cmp) = bench_instance(&label, &spec, &cfg)?;
                rows.push(row);
                comparisons.push(cmp);
            }
            fs::create_dir_all(&run.out)?;
            write_csv(&run.out.join("bench.csv"), &rows)?;
            write_csv(&run.out.join("comparison.csv"), &comparisons)?;
            let all_within = rows.iter().all(|r| r.within_tolerance != Some(false));
            Ok(if all_within { 0 } else { EXIT_MISSED })
        }
        Command::InnerBall { problem, seed, probes, out } => {
            let spec: InnerBallSpec = read_json(&problem)?;
            let report = inner_ball(&spec, seed, probes)?;
            fs::create_dir_all(&out)?;
            write_json(&out.join("summary.json"), &report)?;
            Ok(exit_for(Some(report.probes_inside == report.probes && report.oracle_calls <= report.budget)))
        }
    }
}

fn exit_for(within: Option<bool>) -> i32 {
    if within == Some(false) {
        EXIT_MISSED
    } else {
        0
    }
}

/// `{"body": .., "R": .., "r": ..}` with `B(z, r) ⊆ body ⊆ B(0, R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerBallSpec {
    pub body: BodySpec,
    #[serde(rename = "R")]
    pub outer_radius: f64,
    #[serde(rename = "r")]
    pub inner_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BodySpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{θ : normals[k]·θ <= offsets[k]}`.
    Polytope { normals: Vec<Vec<f64>>, offsets: Vec<f64> },
}

impl BodySpec {
    pub fn build(&self) -> decompopt::Result<KnownBody> {
        Ok(match self {
            BodySpec::Ball { center, radius } => KnownBody::Ball(Ball::new(Vector::from_vec(center.clone()), *radius)?),
            BodySpec::Box { lo, hi } => KnownBody::Box { lo: Vector::from_vec(lo.clone()), hi: Vector::from_vec(hi.clone()) },
            BodySpec::Polytope { normals, offsets } => {
                if normals.len() != offsets.len() {
                    return Err(decompopt::Error::InvalidArgument("one offset per normal".into()));
                }
                let hs = normals
                    .iter()
                    .zip(offsets)
                    .map(|(n, &b)| Halfspace::new(Vector::from_vec(n.clone()), b))
                    .collect::<decompopt::Result<Vec<_>>>()?;
                KnownBody::Polytope(hs)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerBallReport {
    pub center: Vec<f64>,
    pub radius: f64,
    pub oracle_calls: usize,
    pub budget: usize,
    pub probes: usize,
    pub probes_inside: usize,
    pub seed: u64,
}

/// Finds the ball and checks `probes` uniform points of it against the body.
pub fn inner_ball(spec: &InnerBallSpec, seed: u64, probes: usize) -> decompopt::Result<InnerBallReport> {
    let body = spec.body.build()?;
    let counter = OracleCounter::new();
    let oracle = wrap_counting(body.clone(), counter.clone());
    let found = find_inner_ball(&oracle, spec.outer_radius, spec.inner_radius, seed)?;
    let d = oracle.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut inside = 0;
    for _ in 0..probes {
        let dir = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let rho = found.radius * rng.random::<f64>().powf(1.0 / d as f64);
        let p = &found.center + dir.normalize() * rho;
        if body.separate(&p)?.is_member() {
            inside += 1;
        }
    }
    Ok(InnerBallReport {
        center: found.center.iter().copied().collect(),
        radius: found.radius,
        oracle_calls: found.oracle_calls,
        budget: inner_ball_budget(d, spec.outer_radius, spec.inner_radius),
        probes,
        probes_inside: inside,
        seed,
    })
}
