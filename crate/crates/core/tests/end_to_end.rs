//! Full pipeline runs: epigraph program, initialization, solve, recovery.

use std::sync::Arc;

use decompopt::init::{phase1_initialize, search_inner_balls, Phase1Config};
use decompopt::oracles::{EpigraphProgram, OneNorm, OracleCounter, SquaredDiff, SquaredNorm, Term};
use decompopt::solver::{solve, SamplingBudget, SolverConfig, Status};
use decompopt::Vector;

fn config(seed: u64) -> SolverConfig {
    SolverConfig {
        eta: 0.25,
        outer_sampling: SamplingBudget::new(500),
        polar_sampling: SamplingBudget::new(300),
        seed,
        ..SolverConfig::default()
    }
}

fn run(program: &EpigraphProgram, target: f64, seed: u64) -> (Vector, Status) {
    let mut cfg = config(seed);
    cfg.epsilon = program.solver_epsilon(target).min(0.49);
    let phase1 = Phase1Config { solver: cfg.clone(), penalty: None };
    let init = phase1_initialize(program.problem(), &program.inner_balls(), program.bounding_bodies(), &phase1).unwrap();
    let out = solve(program.problem(), init.init, &cfg).unwrap();
    (program.recover_theta(&out.x), out.status)
}

#[test]
fn absolute_value_in_one_dimension() {
    let terms = [Term { function: Arc::new(OneNorm { center: Vector::zeros(1) }), support: vec![0], lipschitz: 1.0 }];
    let counter = OracleCounter::new();
    let program = EpigraphProgram::new(&terms, &Vector::from_element(1, 0.4), 1.0, None, Some(counter.clone())).unwrap();
    let (theta, status) = run(&program, 0.05, 1);
    assert_eq!(status, Status::Converged);
    assert!(program.objective(&theta).unwrap() <= 0.05, "{theta}");
    let counts = counter.snapshot();
    assert!(counts.separation_calls > 0);
    assert!(counts.subgradient_calls <= counts.separation_calls);
}

#[test]
fn chain_of_three_matches_its_closed_form() {
    let r = 1.25;
    let terms = vec![
        Term {
            function: Arc::new(SquaredNorm { center: Vector::from_element(1, 1.0), scale: 1.0 }),
            support: vec![0],
            lipschitz: 2.0 * (r + 1.0),
        },
        Term { function: Arc::new(SquaredDiff { scale: 1.0 }), support: vec![0, 1], lipschitz: 4.0 * r },
        Term { function: Arc::new(SquaredDiff { scale: 1.0 }), support: vec![1, 2], lipschitz: 4.0 * r },
        Term {
            function: Arc::new(SquaredNorm { center: Vector::zeros(1), scale: 1.0 }),
            support: vec![2],
            lipschitz: 2.0 * r,
        },
    ];
    let program = EpigraphProgram::new(&terms, &Vector::zeros(3), r, None, None).unwrap();
    let (theta, _) = run(&program, 0.05, 2);
    // Minimum 1/4 at (3/4, 1/2, 1/4).
    let value = program.objective(&theta).unwrap();
    assert!(value - 0.25 <= 0.05, "{value} at {theta}");
}

#[test]
fn searched_inner_balls_feed_phase_one() {
    let terms = [
        Term { function: Arc::new(OneNorm { center: Vector::from_element(1, 0.3) }), support: vec![0], lipschitz: 1.0 },
        Term { function: Arc::new(OneNorm { center: Vector::from_element(2, 0.3) }), support: vec![0, 1], lipschitz: 1.5 },
    ];
    let program = EpigraphProgram::new(&terms, &Vector::zeros(2), 1.0, None, None).unwrap();
    let problem = program.problem();
    let centers: Vec<Vector> = program.bounding_bodies().iter().map(|b| b.ball().center.clone()).collect();
    let (balls, calls) = search_inner_balls(problem, &centers, program.outer_radius(), 0.2, 9).unwrap();
    assert!(calls > 0);
    let mut cfg = config(3);
    cfg.epsilon = 0.2;
    let phase1 = Phase1Config { solver: cfg, penalty: None };
    let res = phase1_initialize(problem, &balls, program.bounding_bodies(), &phase1).unwrap();
    assert!(problem.subspace().residual(&res.init.x).unwrap() <= 1e-9);
    for i in 0..problem.n_blocks() {
        let xi = problem.slice(&res.init.x, i);
        assert!(res.init.inner[i].contains(&xi, 1e-9).unwrap());
        assert!(problem.block(i).separate(&xi).unwrap().is_member());
    }
}
