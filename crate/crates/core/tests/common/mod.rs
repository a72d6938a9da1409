//! Random supersolutions built as exact solutions of forced systems.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qmbvp_core::{shoot, BoundaryData, Grid, PathPair, ShootOptions, SystemDef};

/// Nonnegative forcing `a₀ + Σ aₖ (1 + sin(ωₖ t + pₖ))` with `a₀ ≥ floor`.
fn forcing(rng: &mut ChaCha8Rng, dim: usize, floor: f64) -> Vec<[f64; 7]> {
    (0..dim)
        .map(|_| {
            [
                floor + rng.gen_range(0.0..0.3),
                rng.gen_range(0.0..1.5),
                rng.gen_range(0.5..8.0),
                rng.gen_range(0.0..6.3),
                rng.gen_range(0.0..1.0),
                rng.gen_range(0.5..8.0),
                rng.gen_range(0.0..6.3),
            ]
        })
        .collect()
}

fn eval(c: &[[f64; 7]], t: f64, out: &mut [f64]) {
    for (o, p) in out.iter_mut().zip(c) {
        *o = p[0] + p[1] * (1.0 + (p[2] * t + p[3]).sin()) + p[4] * (1.0 + (p[5] * t + p[6]).sin());
    }
}

/// Solves `ẋ = f + φ`, `ẏ = g − ψ` with inflated boundary data by shooting.
/// The result over-satisfies every inequality of `sys` by at least `floor`.
pub fn random_supersolution(sys: &SystemDef, grid: &Grid, rng: &mut ChaCha8Rng, floor: f64) -> PathPair {
    let phi = forcing(rng, sys.m(), floor);
    let psi = forcing(rng, sys.n(), floor);
    let b = sys.boundary();
    let x_bar: Vec<f64> = b.x_bar.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
    let y_bar: Vec<f64> = b.y_bar.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
    let guess = y_bar.clone();
    let forced = sys
        .forced(
            move |t, o| eval(&phi, t, o),
            move |t, o| eval(&psi, t, o),
            BoundaryData::new(x_bar, y_bar).unwrap(),
        )
        .unwrap();
    let r = shoot(&forced, &guess, grid, &ShootOptions::default()).unwrap();
    r.solution.unwrap_or_else(|| panic!("forced system did not converge: {:?}", r.failure))
}
