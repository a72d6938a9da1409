//! A mean-field game in which every player steers `ẋ = u` from `x(0) = 0`
//! and pays `∫ |u|²/2 + V(x) + κ|x − b|²`, with `b` the barycenter of the
//! population.
//!
//! All players share one optimal trajectory for a given `b`, so the game
//! reduces to the fixed-point problem `b = Φ(b)`, where `Φ(b)` is the state
//! component of the optimality system
//!
//! ```text
//!   ẋ = q,   q̇ = s (DV(x) + 2κ (x − b)),   x(0) = 0,   q(T) = 0
//! ```
//!
//! written in the sign-flipped costate `q`. The sign `s` is `+1` under
//! [`Convention::A`] and `−1` under [`Convention::B`]. Equilibria solve the
//! same system with `b = x`, which removes `κ`.

mod candidate;
mod equilibria;
mod phi;
mod potential;
mod spectrum;

use alloc::format;
use alloc::vec;

pub use candidate::{candidate_supersolution, default_lambda, CandidateReport, Continuity, Variant};
pub use equilibria::{default_guesses, equilibria, equilibria_with, Equilibrium, EquilibriaReport, MinimalRun};
pub use phi::{
    fixed_point_iterate, fixed_point_trace, phi, phi_warm, IterationTrace, PhiOutput,
};
pub use potential::{Potential, PotentialCheck};
pub use spectrum::{analytic_lambdas, spectrum, SpectrumOptions, SpectrumReport};

use crate::error::{Error, Result};
use crate::order::{BoundaryData, Grid, VecPath};
use crate::shooting::ShootOptions;
use crate::system::SystemDef;

/// Sign convention of the optimality system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `ẍ = DV(x) + 2κ(x − b)`.
    A,
    /// `ẍ = −DV(x) − 2κ(x − b)`.
    B,
}

impl Convention {
    fn sign(self) -> f64 {
        match self {
            Convention::A => 1.0,
            Convention::B => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Convention::A => "A",
            Convention::B => "B",
        }
    }
}

/// Which costate the equilibrium system is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variables {
    /// `(x, p)` with `ẋ = −p`.
    Raw,
    /// `(x, q)` with `q = −p`, so `ẋ = q`.
    Transformed,
}

#[derive(Debug, Clone)]
pub struct MfgConfig {
    pub potential: Potential,
    pub kappa: f64,
    pub horizon: f64,
    pub intervals: usize,
    pub convention: Convention,
    pub shoot: ShootOptions,
    /// Residual accepted for equilibria and monotone runs at grid scale.
    pub residual_tol: f64,
    /// Slack for supersolution certificates of explicit candidates.
    pub supersolution_tol: f64,
}

impl MfgConfig {
    pub fn new(potential: Potential, kappa: f64, horizon: f64, intervals: usize, convention: Convention) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument("kappa must be positive"));
        }
        Grid::new(horizon, intervals)?;
        Ok(Self {
            potential,
            kappa,
            horizon,
            intervals,
            convention,
            shoot: ShootOptions {
                tol: 1e-11,
                min_iters: 1,
                ..ShootOptions::default()
            },
            residual_tol: 1e-4,
            supersolution_tol: 1e-6,
        })
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.horizon, self.intervals).expect("validated at construction")
    }
}

fn zero_boundary(d: usize) -> Result<BoundaryData> {
    BoundaryData::new(vec![0.0; d], vec![0.0; d])
}

/// The `κ`-free equilibrium problem with `x(0) = 0` and zero terminal costate.
pub fn equilibrium_system(
    potential: &Potential,
    convention: Convention,
    variables: Variables,
    horizon: f64,
) -> Result<SystemDef> {
    let d = potential.dim();
    let s = convention.sign();
    let (fsign, gsign) = match variables {
        Variables::Raw => (-1.0, -s),
        Variables::Transformed => (1.0, s),
    };
    let pot = potential.clone();
    let name = format!(
        "mfg_equilibrium[{},{}]",
        convention.label(),
        match variables {
            Variables::Raw => "raw",
            Variables::Transformed => "transformed",
        }
    );
    SystemDef::new(
        name,
        d,
        d,
        horizon,
        zero_boundary(d)?,
        move |_, _, y, o| {
            for (oi, &yi) in o.iter_mut().zip(y) {
                *oi = fsign * yi;
            }
        },
        move |_, x, _, o| {
            pot.gradient(x, o);
            for v in o.iter_mut() {
                *v *= gsign;
            }
        },
    )
}

/// The optimality system for a given barycenter path, in transformed
/// variables.
pub fn coupled_system(cfg: &MfgConfig, b: &VecPath) -> Result<SystemDef> {
    let d = cfg.potential.dim();
    if b.dim() != d {
        return Err(Error::Shape {
            what: "barycenter dimension",
            expected: d,
            found: b.dim(),
        });
    }
    if *b.grid() != cfg.grid() {
        return Err(Error::GridMismatch);
    }
    let s = cfg.convention.sign();
    let two_k = 2.0 * cfg.kappa;
    let pot = cfg.potential.clone();
    let bar = b.clone();
    SystemDef::new(
        format!("mfg_coupled[{}]", cfg.convention.label()),
        d,
        d,
        cfg.horizon,
        zero_boundary(d)?,
        |_, _, y, o| o.copy_from_slice(y),
        move |t, x, _, o| {
            let mut bt = vec![0.0; x.len()];
            bar.sample(t, &mut bt);
            pot.gradient(x, o);
            for i in 0..o.len() {
                o[i] = s * (o[i] + two_k * (x[i] - bt[i]));
            }
        },
    )
}

/// Both sides of the two admissibility inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub kappa: f64,
    pub hess_inf_norm: f64,
    pub kappa_ok: bool,
    /// `T^{2/3}`.
    pub horizon_lhs: f64,
    /// `max{γ_max²/(8γ_min), (1/γ_min + √(1 + 1/γ_min²))^{3/2}}`.
    pub horizon_rhs: f64,
    pub horizon_terms: [f64; 2],
    /// Smallest admissible horizon, `horizon_rhs^{3/2}`.
    pub horizon_threshold: f64,
    pub horizon_ok: bool,
    pub pass: bool,
}

pub fn admissibility(cfg: &MfgConfig) -> AdmissibilityReport {
    let p = &cfg.potential;
    let (gmin, gmax) = (p.gamma_min(), p.gamma_max());
    let kappa_ok = cfg.kappa >= p.hess_inf_norm();
    let terms = if gmin > 0.0 {
        let inv = 1.0 / gmin;
        [
            gmax * gmax / (8.0 * gmin),
            libm::pow(inv + libm::sqrt(1.0 + inv * inv), 1.5),
        ]
    } else {
        [f64::INFINITY, f64::INFINITY]
    };
    let rhs = terms[0].max(terms[1]);
    let lhs = libm::cbrt(cfg.horizon * cfg.horizon);
    let horizon_ok = lhs >= rhs;
    AdmissibilityReport {
        kappa: cfg.kappa,
        hess_inf_norm: p.hess_inf_norm(),
        kappa_ok,
        horizon_lhs: lhs,
        horizon_rhs: rhs,
        horizon_terms: terms,
        horizon_threshold: libm::pow(rhs, 1.5),
        horizon_ok,
        pass: kappa_ok && horizon_ok,
    }
}
