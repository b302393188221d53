//! Benchmark suites: per-instance oracle counts against the
//! `C·m·ln(m/ε)` bound, and baseline comparisons on the same instances.

use std::sync::Arc;

use decompopt::oracles::{OracleCounter, Term};
use decompopt::sfm::{LovaszExtension, SubmodularInstance};
use decompopt::{Error, Result, Vector};
use serde::{Deserialize, Serialize};

use crate::baselines::{baseline_cpm, baseline_subgradient, Objective};
use crate::run::{config_hash, run_epigraph, run_sfm, RunConfig};
use crate::spec::{generate, Generated, ProblemKind, ProblemSpec, SfmParams};

/// Constant `C` of the reported bound `C·m·ln(m/ε)`.
pub const BOUND_CONSTANT: f64 = 200.0;

pub const SUBGRADIENT_ITERS: usize = 1000;
pub const CPM_SAMPLES: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub kind: String,
    pub seed: u64,
    pub epsilon: f64,
    pub m: usize,
    pub sep_calls: u64,
    pub subgradient_calls: u64,
    pub eval_calls: u64,
    pub bound: f64,
    /// `sep_calls / bound`.
    pub ratio: f64,
    pub final_value: f64,
    pub optimum: Option<f64>,
    pub gap: Option<f64>,
    pub within_tolerance: Option<bool>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub instance: String,
    pub seed: u64,
    pub epsilon: f64,
    pub solver_value: f64,
    pub solver_sep_calls: u64,
    pub solver_subgradient_calls: u64,
    pub subgradient_value: f64,
    pub subgradient_calls: u64,
    pub cpm_value: f64,
    pub cpm_subgradient_calls: u64,
}

pub fn oracle_bound(m: usize, epsilon: f64) -> f64 {
    BOUND_CONSTANT * m as f64 * (m as f64 / epsilon).ln()
}

/// Named instances of a suite for seeds `0..seeds`.
///
/// `desk`: SFM with 2 to 4 terms of support size 2 to 4 on `terms + 2`
/// elements, and chains of length 4 and 6, each at ε = 0.02 and 0.05.
pub fn suite(name: &str, seeds: u64) -> Result<Vec<(String, ProblemSpec)>> {
    if name != "desk" {
        return Err(Error::InvalidArgument(format!("unknown suite {name:?}")));
    }
    let mut out = Vec::new();
    for seed in 0..seeds {
        for epsilon in [0.02, 0.05] {
            for terms in 2..=4 {
                for support in 2..=4 {
                    let kind = ProblemKind::Sfm(SfmParams {
                        ground_set: terms + 2,
                        terms,
                        support_min: support,
                        support_max: support,
                    });
                    let spec = ProblemSpec { kind, seed, epsilon, outer_radius: None, inner_radius: None };
                    out.push((format!("sfm-n{terms}-k{support}-e{epsilon}"), spec));
                }
            }
            for n in [4, 6] {
                let kind = ProblemKind::ChainQuadratic { n };
                let spec = ProblemSpec { kind, seed, epsilon, outer_radius: None, inner_radius: None };
                out.push((format!("chain-n{n}-e{epsilon}"), spec));
            }
        }
    }
    Ok(out)
}

/// Runs one suite instance and both baselines on it.
pub fn bench_instance(name: &str, spec: &ProblemSpec, cfg: &RunConfig) -> Result<(BenchRow, ComparisonRow)> {
    let hash = config_hash(spec, cfg);
    let kind = match spec.kind {
        ProblemKind::Sfm(_) => "sfm",
        ProblemKind::ChainQuadratic { .. } => "chain_quadratic",
        ProblemKind::PiecewiseLinear(_) => "piecewise_linear",
        ProblemKind::CustomEpigraph(_) => "custom_epigraph",
    };
    let (report, terms, theta0, radius, domain) = match generate(spec)? {
        Generated::Sfm(inst) => {
            let report = run_sfm(&inst, cfg, kind, hash)?;
            let theta0 = Vector::from_element(inst.ground_set, 0.5);
            let radius = 0.5 * (inst.ground_set as f64).sqrt();
            (report, lovasz_terms(&inst), theta0, radius, Some((0.0, 1.0)))
        }
        Generated::Epigraph(inst) => {
            let report = run_epigraph(&inst, spec.inner_radius, cfg, kind, hash)?;
            (report, inst.terms, inst.theta0, inst.radius, inst.domain)
        }
    };
    let s = &report.summary;
    let bound = oracle_bound(s.m, spec.epsilon);
    let row = BenchRow {
        instance: name.to_string(),
        kind: kind.to_string(),
        seed: spec.seed,
        epsilon: spec.epsilon,
        m: s.m,
        sep_calls: s.sep_calls,
        subgradient_calls: s.subgradient_calls,
        eval_calls: s.eval_calls,
        bound,
        ratio: s.sep_calls as f64 / bound,
        final_value: s.final_value,
        optimum: s.optimum,
        gap: s.gap,
        within_tolerance: s.within_tolerance,
        wall_ms: report.wall_ms,
    };

    let obj = Objective { terms: &terms, theta0: &theta0, radius, domain, counter: OracleCounter::new() };
    let sub = baseline_subgradient(&obj, SUBGRADIENT_ITERS)?;
    let cpm = baseline_cpm(&obj, spec.epsilon, CPM_SAMPLES, cfg.seed)?;
    let cmp = ComparisonRow {
        instance: name.to_string(),
        seed: spec.seed,
        epsilon: spec.epsilon,
        solver_value: s.final_value,
        solver_sep_calls: s.sep_calls,
        solver_subgradient_calls: s.subgradient_calls,
        subgradient_value: sub.best,
        subgradient_calls: sub.subgradient_calls,
        cpm_value: cpm.best,
        cpm_subgradient_calls: cpm.subgradient_calls,
    };
    Ok((row, cmp))
}

/// Lovász extensions of the terms, for the baselines.
fn lovasz_terms(inst: &SubmodularInstance) -> Vec<Term> {
    inst.terms
        .iter()
        .map(|t| Term {
            function: Arc::new(LovaszExtension::new(Arc::new(t.clone()))),
            support: t.support.clone(),
            lipschitz: 2.0,
        })
        .collect()
}
