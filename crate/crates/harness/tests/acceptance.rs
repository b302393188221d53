//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when
//! any criterion fails. Run with `cargo test -p decompopt-harness --test
//! acceptance`; the SFM and desk-suite checks take several minutes.
//! Criterion numbers after `--` restrict the run to those criteria.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use decompopt::barriers::universal_metric;
use decompopt::geometry::{AffineSubspace, Ball, Halfspace, InnerBody, OuterBody};
use decompopt::init::{phase1_initialize, Phase1Config};
use decompopt::oracles::{KnownBody, SeparationOracle};
use decompopt::sampling::{hit_and_run, ChainConfig, ConvexBody, Density, ProductBody};
use decompopt::sfm::{brute_force_min, lovasz_subgradient, lovasz_value, minimize_decomposable, SetFunction, SubmodularInstance};
use decompopt::solver::{Problem, SamplingBudget, SolverConfig};
use decompopt::{Matrix, Vector};
use decompopt_harness::bench::{bench_instance, suite};
use decompopt_harness::cli::{inner_ball, BodySpec, InnerBallSpec};
use decompopt_harness::run::{run_spec, RunConfig};
use decompopt_harness::spec::{generate, Generated, ProblemKind, ProblemSpec, SfmParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Verdict {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Verdict);

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn solver_config(seed: u64) -> SolverConfig {
    SolverConfig {
        eta: 0.25,
        outer_sampling: SamplingBudget::new(400),
        polar_sampling: SamplingBudget::new(300),
        seed,
        ..SolverConfig::default()
    }
}

fn sfm_correctness() -> Verdict {
    let eps = 0.02;
    let started = Instant::now();
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let terms = 2 + (seed % 3) as usize;
        let inst = SubmodularInstance::random(terms + 2, terms, (2, 4), seed).unwrap();
        let (_, optimum) = brute_force_min(&inst).unwrap();
        let out = minimize_decomposable(&inst, eps, &RunConfig::new(eps, seed).solver_config()).unwrap();
        let gap = out.value - optimum;
        worst = worst.max(gap);
        if gap <= eps {
            within += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        within >= 48 && secs <= 1800.0,
        format!("{within}/50 within {eps} of enumeration, worst gap {worst:.2e}, {secs:.0} s"),
    )
}

/// Stratified estimate of `∫_0^1 F({x > t}) dt`.
fn threshold_integral(f: &dyn SetFunction, x: &Vector, strata: usize, rng: &mut ChaCha8Rng) -> f64 {
    (0..strata)
        .map(|j| {
            let t = (j as f64 + rng.random::<f64>()) / strata as f64;
            let mask = (0..x.len()).filter(|&k| x[k] > t).fold(0u64, |m, k| m | 1 << k);
            f.eval(mask)
        })
        .sum::<f64>()
        / strata as f64
}

fn lovasz() -> Verdict {
    let inst = SubmodularInstance::random(8, 4, (3, 5), 21).unwrap();
    let mut worst_indicator: f64 = 0.0;
    for mask in 0..256u64 {
        let x = Vector::from_fn(8, |k, _| (mask >> k & 1) as f64);
        worst_indicator = worst_indicator.max((lovasz_value(&inst, x.as_slice()).unwrap() - inst.eval(mask)).abs());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut worst_subgradient: f64 = 0.0;
    for _ in 0..1000 {
        let x = Vector::from_fn(8, |_, _| rng.random::<f64>());
        let y = Vector::from_fn(8, |_, _| rng.random::<f64>());
        let (fx, g) = lovasz_subgradient(&inst, x.as_slice()).unwrap();
        let fy = lovasz_value(&inst, y.as_slice()).unwrap();
        worst_subgradient = worst_subgradient.max(fx + g.dot(&(&y - &x)) - fy);
    }

    let mut worst_z: f64 = 0.0;
    let mut mc_ok = true;
    for _ in 0..100 {
        let x = Vector::from_fn(8, |_, _| rng.random::<f64>());
        let reps: Vec<f64> = (0..64).map(|_| threshold_integral(&inst, &x, 32, &mut rng)).collect();
        let mean = reps.iter().sum::<f64>() / 64.0;
        let sd = (reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 63.0).sqrt();
        let stderr = sd / 8.0;
        let diff = (lovasz_value(&inst, x.as_slice()).unwrap() - mean).abs();
        mc_ok &= diff <= 4.0 * stderr + 1e-12;
        if stderr > 0.0 {
            worst_z = worst_z.max(diff / stderr);
        }
    }
    verdict(
        worst_indicator <= 1e-12 && worst_subgradient <= 1e-12 && mc_ok,
        format!(
            "indicator error {worst_indicator:.1e}, subgradient violation {worst_subgradient:.1e}, \
             integral |z| max {worst_z:.2}"
        ),
    )
}

fn oracle_bound() -> Verdict {
    let started = Instant::now();
    let mut ratios = Vec::new();
    let mut all = true;
    for (name, spec) in suite("desk", 1).unwrap() {
        let (row, _) = bench_instance(&name, &spec, &RunConfig::for_spec(&spec)).unwrap();
        all &= row.sep_calls as f64 <= row.bound;
        ratios.push((name, row.ratio));
    }
    let max = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let listed: Vec<String> = ratios.iter().map(|(n, r)| format!("{n}={r:.4}")).collect();
    verdict(
        all,
        format!(
            "{} instances, max sep_calls/(200·m·ln(m/ε)) = {max:.4}, {:.0} s; {}",
            ratios.len(),
            started.elapsed().as_secs_f64(),
            listed.join(" ")
        ),
    )
}

fn grunbaum() -> Verdict {
    let d = 5;
    let lo = 1.0 / std::f64::consts::E - 0.07;
    let hi = 1.0 - 1.0 / std::f64::consts::E + 0.07;
    let (mut min, mut max) = (1.0f64, 0.0f64);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut body = OuterBody::new(Ball::new(Vector::zeros(d), 3.0).unwrap());
        for _ in 0..12 {
            let normal = gaussian(&mut rng, d).normalize();
            let offset = rng.random_range(0.3..1.0);
            body = body.with_cut(Halfspace::new(normal, offset).unwrap(), &Vector::zeros(d)).unwrap();
        }
        let start = [Vector::zeros(d)];
        let fit = hit_and_run(&body, &start, &Density::Uniform, &ChainConfig::new(20_000, 2 * seed), None).unwrap();
        let centroid = fit.moments().unwrap().mean;
        let a = gaussian(&mut rng, d);
        let fresh = hit_and_run(&body, &start, &Density::Uniform, &ChainConfig::new(20_000, 2 * seed + 1), None).unwrap();
        let kept = fresh.samples.iter().filter(|p| a.dot(p) <= a.dot(&centroid)).count();
        let frac = kept as f64 / fresh.samples.len() as f64;
        min = min.min(frac);
        max = max.max(frac);
    }
    verdict(min >= lo && max <= hi, format!("mass fractions in [{min:.3}, {max:.3}], allowed [{lo:.3}, {hi:.3}]"))
}

fn universal_barrier() -> Verdict {
    // Polar of [0, 2] about 0.5 is [-2, 2/3]: mean -2/3, variance 64/108.
    let grad_exact = -4.0 / 3.0;
    let hess_exact = 6.0 * (64.0 / 108.0) + 2.0 * 4.0 / 9.0;
    let body = InnerBody::new(Ball::new(Vector::from_element(1, 1.0), 1.0).unwrap());
    let metric = universal_metric(&body, &Vector::from_element(1, 0.5), &ChainConfig::new(4000, 5), None).unwrap();
    let (g, h) = (metric.grad[0], metric.hessian[(0, 0)]);
    verdict(
        (g - grad_exact).abs() <= 0.05 && (h - hess_exact).abs() <= 0.15,
        format!("gradient {g:.4} (exact {grad_exact:.4}), Hessian {h:.4} (exact {hess_exact:.4})"),
    )
}

fn chain() -> Verdict {
    let n = 6;
    let spec = ProblemSpec {
        kind: ProblemKind::ChainQuadratic { n },
        seed: 0,
        epsilon: 0.05,
        outer_radius: None,
        inner_radius: None,
    };
    // Stationarity of (x₁-1)² + Σ(x_i-x_{i+1})² + x_n²: T x = e₁ with T
    // tridiagonal (2, -1).
    let t = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    });
    let mut e1 = nalgebra::DVector::<f64>::zeros(n);
    e1[0] = 1.0;
    let x = t.lu().solve(&e1).unwrap();
    let optimum = (x[0] - 1.0).powi(2) + (0..n - 1).map(|i| (x[i] - x[i + 1]).powi(2)).sum::<f64>() + x[n - 1].powi(2);

    let Generated::Epigraph(inst) = generate(&spec).unwrap() else { unreachable!() };
    let allowed = spec.epsilon * inst.lipschitz() * inst.radius;
    let report = run_spec(&spec, &RunConfig::for_spec(&spec)).unwrap();
    let value = report.summary.final_value;
    verdict(
        value - optimum <= allowed,
        format!("objective {value:.5}, optimum {optimum:.5}, allowed gap {allowed:.4}"),
    )
}

fn inner_ball_finder() -> Verdict {
    let spec = InnerBallSpec {
        body: BodySpec::Box { lo: vec![0.2; 3], hi: vec![0.8; 3] },
        outer_radius: 2.0,
        inner_radius: 0.3,
    };
    let mut ok = true;
    let mut max_calls = 0;
    let mut budget = 0;
    for seed in 0..10 {
        let rep = inner_ball(&spec, seed, 1000).unwrap();
        ok &= rep.probes_inside == 1000 && rep.oracle_calls <= rep.budget;
        max_calls = max_calls.max(rep.oracle_calls);
        budget = rep.budget;
    }
    verdict(ok, format!("10 seeds, all probes inside: {ok}, max calls {max_calls} of {budget}"))
}

/// Two or three unit discs with first coordinates tied together and inner
/// balls of radius 1/2 at the centers. The first and last centers are
/// more than one apart horizontally, so no point of the inner balls is
/// feasible and the penalized program has to run.
fn coupled_discs(seed: u64) -> (Problem, Vec<Ball>, Vec<OuterBody>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = 2 + (seed % 2) as usize;
    let spread = rng.random_range(1.1..1.6);
    let centers: Vec<Vector> = (0..k)
        .map(|i| {
            let u = if i == 0 { 0.0 } else if i == k - 1 { spread } else { rng.random_range(0.0..spread) };
            Vector::from_vec(vec![u, rng.random_range(-0.5..0.5)])
        })
        .collect();
    let mut a = Matrix::zeros(k - 1, 2 * k);
    for i in 0..k - 1 {
        a[(i, 2 * i)] = 1.0;
        a[(i, 2 * i + 2)] = -1.0;
    }
    let sub = AffineSubspace::new(a, Vector::zeros(k - 1)).unwrap();
    let blocks: Vec<Arc<dyn SeparationOracle>> =
        centers.iter().map(|c| Arc::new(KnownBody::Ball(Ball::new(c.clone(), 1.0).unwrap())) as _).collect();
    let cost = gaussian(&mut rng, 2 * k);
    let problem = Problem::new(blocks, sub, cost).unwrap();
    let balls = centers.iter().map(|c| Ball::new(c.clone(), 0.5).unwrap()).collect();
    let outer = centers.iter().map(|c| OuterBody::new(Ball::new(c.clone(), 1.2).unwrap())).collect();
    (problem, balls, outer)
}

fn phase_one() -> Verdict {
    let mut worst_residual: f64 = 0.0;
    let mut members = 0;
    let mut solved = 0;
    for seed in 0..20u64 {
        let (problem, balls, outer) = coupled_discs(seed);
        let cfg = Phase1Config { solver: solver_config(seed), penalty: None };
        let res = phase1_initialize(&problem, &balls, outer, &cfg).unwrap();
        worst_residual = worst_residual.max(problem.subspace().residual(&res.init.x).unwrap());
        let inside = (0..problem.n_blocks()).all(|i| res.init.inner[i].contains(&problem.slice(&res.init.x, i), 1e-9).unwrap());
        members += inside as usize;
        solved += (res.iterations > 0) as usize;
    }
    verdict(
        worst_residual <= 1e-9 && members == 20,
        format!("max residual {worst_residual:.1e}, {members}/20 inside their inner bodies, {solved} needed the penalized solve"),
    )
}

fn sampler() -> Verdict {
    let exact = 1.0 - 1.0 / (std::f64::consts::E - 1.0);
    let interval = OuterBody::new(Ball::new(Vector::from_element(1, 0.5), 0.5).unwrap());
    let density = Density::Exponential(Vector::from_element(1, -1.0));
    let set = hit_and_run(&interval, &[Vector::from_element(1, 0.5)], &density, &ChainConfig::new(20_000, 8), None).unwrap();
    let m = set.moments().unwrap();
    let z = (m.mean[0] - exact) / m.stderr[0];

    let blocks = vec![
        OuterBody::new(Ball::new(Vector::zeros(2), 1.0).unwrap()),
        OuterBody::new(Ball::new(Vector::from_vec(vec![0.3, 0.0]), 1.0).unwrap()),
    ];
    let mut a = Matrix::zeros(1, 4);
    a[(0, 0)] = 1.0;
    a[(0, 2)] = -1.0;
    let sub = AffineSubspace::new(a, Vector::zeros(1)).unwrap();
    let body = ProductBody::new(&blocks);
    let start = Vector::from_vec(vec![0.15, 0.0, 0.15, 0.0]);
    let tilt = Density::Exponential(Vector::from_vec(vec![-2.0, 1.0, 0.5, -1.0]));
    let prod = hit_and_run(&body, &[start], &tilt, &ChainConfig::new(5000, 9), Some(sub.basis())).unwrap();
    let members = prod.samples.iter().all(|p| body.contains(p.as_slice()));
    let residual = prod.samples.iter().map(|p| sub.residual(p).unwrap()).fold(0.0, f64::max);
    verdict(
        z.abs() <= 4.0 && members && residual <= 1e-9,
        format!(
            "mean {:.5} vs {exact:.5} (z = {z:.2}); product samples all members: {members}, max residual {residual:.1e}",
            m.mean[0]
        ),
    )
}

fn determinism() -> Verdict {
    let spec = ProblemSpec {
        kind: ProblemKind::Sfm(SfmParams { ground_set: 5, terms: 3, support_min: 2, support_max: 3 }),
        seed: 17,
        epsilon: 0.05,
        outer_radius: None,
        inner_radius: None,
    };
    let cfg = RunConfig::for_spec(&spec);
    let a = serde_json::to_string_pretty(&run_spec(&spec, &cfg).unwrap().summary).unwrap();
    let b = serde_json::to_string_pretty(&run_spec(&spec, &cfg).unwrap().summary).unwrap();
    verdict(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("sfm_correctness", sfm_correctness),
        ("lovasz_exactness", lovasz),
        ("oracle_count_bound", oracle_bound),
        ("grunbaum_mass", grunbaum),
        ("universal_barrier_1d", universal_barrier),
        ("chain_n6", chain),
        ("inner_ball_finder", inner_ball_finder),
        ("phase_one", phase_one),
        ("sampler_calibration", sampler),
        ("determinism", determinism),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(k + 1)) {
            continue;
        }
        ran += 1;
        let v = check();
        failed += !v.pass as usize;
        println!("{} [{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, k + 1, v.detail);
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
