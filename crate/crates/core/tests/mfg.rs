use qmbvp_core::mfg::{
    self, candidate_supersolution, default_lambda, equilibria, equilibrium_system, fixed_point_iterate,
    fixed_point_trace, phi, spectrum, Convention, MfgConfig, Potential, SpectrumOptions, Variables, Variant,
};
use qmbvp_core::{pointwise_min, residual, sup_distance, Grid, PathPair, VecPath};

fn v_sqrt(n: usize, convention: Convention) -> MfgConfig {
    MfgConfig::new(Potential::v_sqrt(), 1.0, 8.0, n, convention).unwrap()
}

fn zero_pair(grid: Grid) -> PathPair {
    PathPair::new(
        VecPath::constant(grid, &[0.0]).unwrap(),
        VecPath::constant(grid, &[0.0]).unwrap(),
    )
    .unwrap()
}

#[test]
fn phi_fixes_zero_under_both_conventions() {
    for conv in [Convention::A, Convention::B] {
        let cfg = v_sqrt(400, conv);
        let zero = VecPath::constant(cfg.grid(), &[0.0]).unwrap();
        let out = phi(&cfg, &zero).unwrap();
        assert!(out.sup_norm() < 1e-12, "{conv:?}: {}", out.sup_norm());
    }
}

#[test]
fn phi_on_a_flat_potential_matches_the_linear_closed_form() {
    let cfg = MfgConfig::new(Potential::zero(1).unwrap(), 1.0, 1.0, 1000, Convention::B).unwrap();
    let one = VecPath::constant(cfg.grid(), &[1.0]).unwrap();
    let x = phi(&cfg, &one).unwrap();
    let r2 = 2f64.sqrt();
    for (k, t) in cfg.grid().nodes().enumerate() {
        // ẍ = −2(x − 1), x(0) = 0, ẋ(1) = 0.
        let exact = 1.0 - (r2 * (t - 1.0)).cos() / r2.cos();
        assert!((x.at(k)[0] - exact).abs() < 1e-6, "t = {t}");
    }
}

#[test]
fn phi_contracts_a_small_bump_near_zero() {
    let cfg = v_sqrt(800, Convention::A);
    let bump = VecPath::from_fn(cfg.grid(), 1, |t, o| o[0] = 0.01 * (t * std::f64::consts::PI / 8.0).sin()).unwrap();
    let out = phi(&cfg, &bump).unwrap();
    assert!(out.sup_norm() < bump.sup_norm());
}

#[test]
fn equilibria_under_convention_b() {
    let cfg = v_sqrt(2000, Convention::B);
    let rep = equilibria(&cfg).unwrap();
    assert!(rep.admissibility.pass);
    assert!(rep.equilibria.len() >= 2, "found {}", rep.equilibria.len());
    assert!(rep.equilibria[0].pair.sup_norm() < 1e-9);
    for e in &rep.equilibria {
        assert!(e.residual <= cfg.residual_tol);
    }
    let min = rep.minimal.as_ref().expect("monotone run from the candidate");
    assert!(min.monotone_ok);
    assert!(min.solution.x.max_value() <= 1e-9);
    assert!(min.solution.x.at(cfg.intervals)[0] < -1.0);
    assert!(min.solution.sup_distance(&rep.equilibria[0].pair).unwrap() > 0.1);

    let pairs: Vec<&PathPair> = rep.equilibria.iter().map(|e| &e.pair).collect();
    let mut lower = pairs[0].clone();
    for p in &pairs[1..] {
        lower = pointwise_min(&lower, p).unwrap();
    }
    let gap = lower.sup_distance(&min.solution).unwrap();
    assert!(gap <= 1e-4, "pointwise min of equilibria vs minimal solution: {gap}");
}

#[test]
fn equilibria_under_convention_a_is_only_zero() {
    let cfg = v_sqrt(2000, Convention::A);
    let rep = equilibria(&cfg).unwrap();
    assert_eq!(rep.equilibria.len(), 1);
    assert!(rep.equilibria[0].pair.sup_norm() < 1e-9);
    assert!(rep.minimal.is_none());
}

#[test]
fn equilibrium_residual_reaches_the_fine_tolerance_on_a_fine_grid() {
    let mut cfg = v_sqrt(16_000, Convention::B);
    cfg.residual_tol = 1e-6;
    let rep = mfg::equilibria_with(&cfg, &[-3.0, -1.0, 0.0]).unwrap();
    assert!(rep.equilibria.len() >= 2);
    let sys = equilibrium_system(&cfg.potential, Convention::B, Variables::Transformed, 8.0).unwrap();
    for e in &rep.equilibria {
        assert!(residual(&sys, &e.pair).unwrap().max() <= 1e-6);
    }
}

#[test]
fn candidate_variants() {
    let cfg = v_sqrt(2000, Convention::B);
    let lam = default_lambda(8.0);
    assert!((lam - 0.9375).abs() < 1e-12);
    let printed = candidate_supersolution(&cfg, 0.05, lam, Variant::AsPrinted).unwrap();
    assert!(!printed.continuity.continuous);
    let adjusted = candidate_supersolution(&cfg, 0.05, lam, Variant::SignAdjusted).unwrap();
    assert!(adjusted.continuity.continuous);
    assert!(adjusted.certificate.pass);
}

#[test]
fn zero_equilibrium_spectrum_under_convention_a() {
    let cfg = v_sqrt(1000, Convention::A);
    let rep = spectrum(&cfg, &zero_pair(cfg.grid()), &SpectrumOptions::default()).unwrap();
    let pi16 = std::f64::consts::PI / 16.0;
    let lambda1 = 2.0 / (3.0 + pi16 * pi16);
    let analytic = rep.analytic_lambdas.as_ref().unwrap();
    assert!((analytic[0] - lambda1).abs() < 1e-14);
    assert!(analytic.iter().all(|&l| l > 0.0 && l < 2.0 / 3.0));
    assert!((rep.dominant_lambda_power - lambda1).abs() < 1e-3);
    assert!(rep.bound_satisfied && rep.stable);
}

#[test]
fn empirical_ratio_tracks_the_dominant_eigenvalue() {
    let cfg = v_sqrt(1000, Convention::A);
    let b0 = VecPath::constant(cfg.grid(), &[0.01]).unwrap();
    let trace = fixed_point_iterate(&cfg, &b0, 200, 1e-12).unwrap();
    assert!(trace.converged);
    assert!(trace.iterates.last().unwrap().sup_norm() < 1e-10);
    let rep = spectrum(&cfg, &zero_pair(cfg.grid()), &SpectrumOptions::default()).unwrap();
    let ratio = trace.empirical_ratio.unwrap();
    let rel = (ratio - rep.dominant_lambda_power).abs() / rep.dominant_lambda_power;
    assert!(rel < 0.05, "ratio {ratio} vs {}", rep.dominant_lambda_power);
}

#[test]
fn fixed_point_trace_from_zero_stops_at_once() {
    let cfg = v_sqrt(200, Convention::B);
    let zero = VecPath::constant(cfg.grid(), &[0.0]).unwrap();
    let trace = fixed_point_trace(&cfg, &zero, 10, 1e-12).unwrap();
    assert!(trace.converged);
    assert!(trace.iterates.iter().all(|b| b.sup_norm() == 0.0));
}

/// The nontrivial equilibrium under convention B: perturb it and watch
/// whether the fixed-point iteration stays nearby. This records the outcome
/// rather than asserting stability, which the linearization contradicts.
#[test]
fn perturbed_nontrivial_equilibrium_under_convention_b() {
    let cfg = v_sqrt(2000, Convention::B);
    let rep = equilibria(&cfg).unwrap();
    let eq = rep.minimal.unwrap().solution;
    let sp = spectrum(&cfg, &eq, &SpectrumOptions::default()).unwrap();
    let b0 = eq.x.map(|v| v + 0.001).unwrap();
    let trace = fixed_point_trace(&cfg, &b0, 50, 1e-12).unwrap();
    let drift = trace
        .iterates
        .iter()
        .map(|b| sup_distance(b, &eq.x).unwrap())
        .fold(0.0, f64::max);
    println!(
        "nontrivial equilibrium: dominant eigenvalue {:.4}, iterates {}, max drift {drift:.3e}, failure {:?}",
        sp.dominant_lambda_power,
        trace.iterates.len(),
        trace.failure
    );
    assert!(sp.power_converged);
    assert!(!sp.stable);
}
