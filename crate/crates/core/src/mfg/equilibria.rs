use alloc::vec;
use alloc::vec::Vec;

use super::{
    admissibility, candidate_supersolution, default_lambda, equilibrium_system, AdmissibilityReport, Convention,
    MfgConfig, Variables, Variant,
};
use crate::error::Result;
use crate::ivp::IvpOptions;
use crate::monotone::{solve_minimal, SolveOptions, Start};
use crate::order::PathPair;
use crate::registry::mfg_beta;
use crate::shooting::multi_start;
use crate::system::{certify_condition, residual, Condition, EnvelopeCheck};

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    /// Path in transformed variables `(x, q)`.
    pub pair: PathPair,
    /// `q(0)`.
    pub q0: Vec<f64>,
    /// Residual against the equilibrium system.
    pub residual: f64,
    pub from_shooting: bool,
    pub from_monotone: bool,
}

/// Summary of the monotone run started from the explicit candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalRun {
    pub theta: f64,
    pub sweeps_used: usize,
    pub final_residual: f64,
    pub monotone_ok: bool,
    pub m_star: Option<f64>,
    pub solution: PathPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriaReport {
    pub admissibility: AdmissibilityReport,
    /// Distinct equilibria sorted by sup-norm.
    pub equilibria: Vec<Equilibrium>,
    pub minimal: Option<MinimalRun>,
    /// Shooting guesses for `q(0)` (each applied to every component).
    pub guesses: Vec<f64>,
}

/// Radius below which two equilibria are taken to be the same.
const MERGE_RADIUS: f64 = 1e-4;

/// Default scalar guesses `−10, −9, …, 10` for `q(0)`.
pub fn default_guesses() -> Vec<f64> {
    (0..=20).map(|k| -10.0 + k as f64).collect()
}

/// Multi-start shooting on the equilibrium system and, under convention
/// B, the monotone iteration started from the sign-adjusted candidate.
pub fn equilibria(cfg: &MfgConfig) -> Result<EquilibriaReport> {
    equilibria_with(cfg, &default_guesses())
}

pub fn equilibria_with(cfg: &MfgConfig, guesses: &[f64]) -> Result<EquilibriaReport> {
    let d = cfg.potential.dim();
    let sys = equilibrium_system(&cfg.potential, cfg.convention, Variables::Transformed, cfg.horizon)?;
    let grid = cfg.grid();
    let starts: Vec<Vec<f64>> = guesses.iter().map(|&g| vec![g; d]).collect();
    let shots = multi_start(&sys, &starts, &grid, &cfg.shoot, MERGE_RADIUS)?;
    let mut found = Vec::new();
    for s in shots {
        let pair = s.solution.expect("multi_start keeps converged runs");
        let r = residual(&sys, &pair)?.max();
        if r <= cfg.residual_tol {
            found.push(Equilibrium {
                pair,
                q0: s.y0,
                residual: r,
                from_shooting: true,
                from_monotone: false,
            });
        }
    }

    let mut minimal = None;
    if cfg.convention == Convention::B {
        let cert = certify_condition(
            &sys,
            Condition::II,
            &mfg_beta(&cfg.potential),
            &grid,
            &EnvelopeCheck::default(),
            &IvpOptions::default(),
        )?;
        let bound = if cert.pass { cert.m_star } else { None };
        let opts = SolveOptions {
            tol: cfg.residual_tol,
            ..SolveOptions::default()
        };
        for theta in [0.05, 0.02, 0.01] {
            let cand = candidate_supersolution(cfg, theta, default_lambda(cfg.horizon), Variant::SignAdjusted)?;
            if !cand.certificate.pass {
                continue;
            }
            let start = match bound {
                Some(b) => Start::PairWithBound(cand.pair, b),
                None => Start::Pair(cand.pair),
            };
            let Ok(run) = solve_minimal(&sys, start, &opts) else {
                continue;
            };
            if !run.converged() {
                continue;
            }
            let res = run.final_residual();
            let q0 = run.solution.y.at(0).to_vec();
            match found
                .iter_mut()
                .find(|e| e.pair.sup_distance(&run.solution).is_ok_and(|dist| dist <= MERGE_RADIUS))
            {
                Some(e) => e.from_monotone = true,
                None => found.push(Equilibrium {
                    pair: run.solution.clone(),
                    q0,
                    residual: res,
                    from_shooting: false,
                    from_monotone: true,
                }),
            }
            minimal = Some(MinimalRun {
                theta,
                sweeps_used: run.sweeps_used,
                final_residual: res,
                monotone_ok: run.monotone_ok,
                m_star: run.m_star,
                solution: run.solution,
            });
            break;
        }
    }
    found.sort_by(|a, b| a.pair.sup_norm().total_cmp(&b.pair.sup_norm()));
    Ok(EquilibriaReport {
        admissibility: admissibility(cfg),
        equilibria: found,
        minimal,
        guesses: guesses.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfg::Potential;

    #[test]
    fn flat_potential_has_only_the_zero_equilibrium() {
        let cfg = MfgConfig::new(Potential::zero(1).unwrap(), 1.0, 8.0, 400, Convention::B).unwrap();
        let r = equilibria(&cfg).unwrap();
        assert_eq!(r.equilibria.len(), 1);
        assert!(r.equilibria[0].pair.sup_norm() < 1e-9);
    }
}
