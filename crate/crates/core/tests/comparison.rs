mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_supersolution;
use qmbvp_core::registry::{bounded_coupled_alpha, bounded_coupled_default};
use qmbvp_core::{
    certify_condition, check_quasi_monotone, is_supersolution, leq_path, multi_start, pointwise_min, reduce_extremes,
    reduce_pair, residual, shoot, solve_minimal, sweep, Condition, EnvelopeCheck, Grid, IvpOptions,
    MonotonicityOptions, SampleBox, ShootOptions, SolveOptions, Start,
};

#[test]
fn minimum_of_two_supersolutions_is_a_supersolution() {
    for (dim, c) in [(1, 0.0), (2, 0.5), (3, 0.2)] {
        let sys = bounded_coupled_default(dim, c).unwrap();
        assert!(check_quasi_monotone(&sys, &SampleBox::default(), &MonotonicityOptions::default()).unwrap().pass);
        let grid = Grid::new(1.0, 1000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + dim as u64);
        let mut crossings = 0;
        for _ in 0..30 {
            let a = random_supersolution(&sys, &grid, &mut rng, 0.01);
            let b = random_supersolution(&sys, &grid, &mut rng, 0.01);
            assert!(is_supersolution(&sys, &a, 1e-8).unwrap().pass);
            assert!(is_supersolution(&sys, &b, 1e-8).unwrap().pass);
            if !a.leq(&b, 0.0).unwrap() && !b.leq(&a, 0.0).unwrap() {
                crossings += 1;
            }
            let m = pointwise_min(&a, &b).unwrap();
            let cert = is_supersolution(&sys, &m, 1e-8).unwrap();
            assert!(cert.pass, "dim {dim}: {cert:?}");
        }
        assert!(crossings > 0, "no crossing pairs were generated");
    }
}

#[test]
fn sweeps_descend_and_preserve_supersolutions() {
    let sys = bounded_coupled_default(2, 0.5).unwrap();
    let grid = Grid::new(1.0, 1000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let start = random_supersolution(&sys, &grid, &mut rng, 0.01);
        let next = sweep(&sys, &start, &IvpOptions::default()).unwrap();
        assert!(leq_path(&next.x, &start.x, 1e-10).unwrap());
        assert!(leq_path(&next.y, &start.y, 1e-10).unwrap());
        assert!(is_supersolution(&sys, &next, 1e-6).unwrap().pass);
    }
}

#[test]
fn certified_lower_bound_holds_for_supersolutions() {
    let sys = bounded_coupled_default(2, 0.5).unwrap();
    let grid = Grid::new(1.0, 1000).unwrap();
    let cert = certify_condition(
        &sys,
        Condition::I,
        &bounded_coupled_alpha(2, 0.5),
        &grid,
        &EnvelopeCheck::default(),
        &IvpOptions::default(),
    )
    .unwrap();
    assert!(cert.pass);
    let m_star = cert.m_star.unwrap();
    let reduced = reduce_extremes(&sys).reduced_system(&sys).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let full = random_supersolution(&sys, &grid, &mut rng, 0.01);
        assert!(full.min_value() >= m_star - 1e-8);
        let r = reduce_pair(&full);
        assert!(is_supersolution(&reduced, &r, 1e-8).unwrap().pass);
        let scalar = random_supersolution(&reduced, &grid, &mut rng, 0.01);
        assert!(scalar.min_value() >= m_star - 1e-8);
    }
}

#[test]
fn minimal_solution_agrees_with_shooting_and_lies_below_it() {
    let sys = bounded_coupled_default(2, 0.5).unwrap();
    let grid = Grid::new(1.0, 1000).unwrap();
    let cert = certify_condition(
        &sys,
        Condition::I,
        &bounded_coupled_alpha(2, 0.5),
        &grid,
        &EnvelopeCheck::default(),
        &IvpOptions::default(),
    )
    .unwrap();
    let rep = solve_minimal(&sys, Start::Certificate(&cert), &SolveOptions::default()).unwrap();
    assert!(rep.converged() && rep.monotone_ok);
    assert!(rep.sweeps_used <= 200);
    assert!(rep.residual_history.windows(2).all(|w| w[1] <= w[0] + 1e-10));

    let again = sweep(&sys, &rep.solution, &IvpOptions::default()).unwrap();
    assert!(again.sup_distance(&rep.solution).unwrap() <= 2.0 * 1e-6);

    let guesses: Vec<Vec<f64>> = [-3.0, -1.0, 0.0, 1.0, 3.0].iter().map(|&g| vec![g; 2]).collect();
    let shots = multi_start(&sys, &guesses, &grid, &ShootOptions::default(), 1e-6).unwrap();
    assert_eq!(shots.len(), 1);
    for s in &shots {
        let sol = s.solution.as_ref().unwrap();
        assert!(rep.solution.sup_distance(sol).unwrap() <= 1e-5);
        assert!(rep.solution.leq(sol, 1e-5).unwrap());
    }
}

#[test]
fn shooting_solutions_pass_their_own_residual() {
    let sys = bounded_coupled_default(3, 0.2).unwrap();
    let grid = Grid::new(1.0, 1000).unwrap();
    let r = shoot(&sys, &[0.0; 3], &grid, &ShootOptions::default()).unwrap();
    let sol = r.solution.unwrap();
    let floor = residual(&sys, &sol).unwrap().max();
    assert!(floor < 1e-6);
    let tol = (2.0 * floor).max(ShootOptions::default().tol);
    assert!(is_supersolution(&sys, &sol, tol).unwrap().pass);
}
