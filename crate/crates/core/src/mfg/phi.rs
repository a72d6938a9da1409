use alloc::vec;
use alloc::vec::Vec;

use super::{coupled_system, MfgConfig};
use crate::error::{Error, Result};
use crate::order::{sup_distance, VecPath};
use crate::shooting::shoot;

#[derive(Debug, Clone, PartialEq)]
pub struct PhiOutput {
    /// The representative optimal trajectory.
    pub x: VecPath,
    /// Initial transformed costate found by shooting.
    pub q0: Vec<f64>,
    pub shoot_residual: f64,
    pub newton_iters: usize,
}

/// `Φ(b)`, shooting from a zero initial costate.
pub fn phi(cfg: &MfgConfig, b: &VecPath) -> Result<VecPath> {
    let guess = vec![0.0; cfg.potential.dim()];
    phi_warm(cfg, b, &guess).map(|o| o.x)
}

/// `Φ(b)` with a caller-supplied initial costate guess.
pub fn phi_warm(cfg: &MfgConfig, b: &VecPath, q0_guess: &[f64]) -> Result<PhiOutput> {
    let sys = coupled_system(cfg, b)?;
    let r = shoot(&sys, q0_guess, &cfg.grid(), &cfg.shoot)?;
    match r.solution {
        Some(pair) => Ok(PhiOutput {
            x: pair.x,
            q0: r.y0,
            shoot_residual: r.final_residual,
            newton_iters: r.iterations,
        }),
        None => Err(Error::PhiFailed {
            iterate: 0,
            residual: r.final_residual,
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// `b_0, b_1, …`.
    pub iterates: Vec<VecPath>,
    /// `‖b_{k+1} − b_k‖∞`.
    pub step_distances: Vec<f64>,
    /// `‖b_k − b_last‖∞`.
    pub distances_to_limit: Vec<f64>,
    pub converged: bool,
    /// Geometric mean of successive step-distance ratios over the later
    /// half of the run; `None` with fewer than three iterates.
    pub empirical_ratio: Option<f64>,
    /// Set when `Φ` could not be evaluated; the trace stops there.
    pub failure: Option<Error>,
}

/// Runs `b ← Φ(b)` and keeps whatever was computed if `Φ` fails.
pub fn fixed_point_trace(cfg: &MfgConfig, b0: &VecPath, max_iters: usize, tol: f64) -> Result<IterationTrace> {
    if b0.dim() != cfg.potential.dim() {
        return Err(Error::Shape {
            what: "barycenter dimension",
            expected: cfg.potential.dim(),
            found: b0.dim(),
        });
    }
    let mut iterates = vec![b0.clone()];
    let mut steps = Vec::new();
    let mut guess = vec![0.0; cfg.potential.dim()];
    let mut converged = false;
    let mut failure = None;
    for it in 1..=max_iters {
        let cur = iterates.last().expect("nonempty");
        match phi_warm(cfg, cur, &guess) {
            Ok(out) => {
                let d = sup_distance(&out.x, cur)?;
                steps.push(d);
                guess = out.q0;
                iterates.push(out.x);
                if d <= tol {
                    converged = true;
                    break;
                }
            }
            Err(Error::PhiFailed { residual, .. }) => {
                failure = Some(Error::PhiFailed { iterate: it, residual });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let last = iterates.last().expect("nonempty");
    let distances_to_limit = iterates
        .iter()
        .map(|b| sup_distance(b, last))
        .collect::<Result<Vec<_>>>()?;
    Ok(IterationTrace {
        empirical_ratio: empirical_ratio(&steps, iterates.len()),
        iterates,
        step_distances: steps,
        distances_to_limit,
        converged,
        failure,
    })
}

/// As [`fixed_point_trace`], but a failure of `Φ` is returned as an error
/// carrying the iterate index.
pub fn fixed_point_iterate(cfg: &MfgConfig, b0: &VecPath, max_iters: usize, tol: f64) -> Result<IterationTrace> {
    let trace = fixed_point_trace(cfg, b0, max_iters, tol)?;
    match trace.failure {
        Some(e) => Err(e),
        None => Ok(trace),
    }
}

fn empirical_ratio(steps: &[f64], iterates: usize) -> Option<f64> {
    if iterates < 3 {
        return None;
    }
    let ratios: Vec<f64> = steps
        .windows(2)
        .filter(|w| w[0] > 1e-14 && w[1] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let tail = &ratios[ratios.len() / 2..];
    let mean_log = tail.iter().map(|r| libm::log(*r)).sum::<f64>() / tail.len() as f64;
    Some(libm::exp(mean_log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfg::{Convention, Potential};
    use crate::order::Grid;

    #[test]
    fn zero_barycenter_is_fixed() {
        for c in [Convention::A, Convention::B] {
            let cfg = MfgConfig::new(Potential::v_sqrt(), 1.0, 8.0, 400, c).unwrap();
            let z = VecPath::constant(cfg.grid(), &[0.0]).unwrap();
            let out = phi(&cfg, &z).unwrap();
            assert!(out.sup_norm() <= 1e-12);
            let tr = fixed_point_iterate(&cfg, &z, 10, 1e-12).unwrap();
            assert!(tr.converged);
            assert_eq!(tr.iterates.len(), 2);
        }
    }

    #[test]
    fn linear_case_matches_closed_form() {
        let cfg = MfgConfig::new(Potential::zero(1).unwrap(), 1.0, 1.0, 1000, Convention::B).unwrap();
        let b = VecPath::constant(cfg.grid(), &[1.0]).unwrap();
        let x = phi(&cfg, &b).unwrap();
        let r2 = libm::sqrt(2.0);
        let grid = Grid::new(1.0, 1000).unwrap();
        for (k, t) in grid.nodes().enumerate() {
            let exact = 1.0 - libm::cos(r2 * (t - 1.0)) / libm::cos(r2);
            assert!((x.at(k)[0] - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn ratio_is_the_tail_geometric_mean() {
        let steps = [1.0, 0.5, 0.25, 0.2, 0.16];
        let r = empirical_ratio(&steps, 6).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        assert_eq!(empirical_ratio(&[1.0], 2), None);
    }
}
