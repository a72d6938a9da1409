use alloc::vec;
use alloc::vec::Vec;

use super::{equilibrium_system, MfgConfig, Potential, Variables};
use crate::error::{Error, Result};
use crate::order::{Grid, PathPair, VecPath};
use crate::system::{is_supersolution, SupersolutionCertificate};

/// How the first piece of the explicit candidate is signed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `x = θ t e`, `q = θ e` on `[0, λT]`, as the construction is written.
    /// This does not join the second piece at `t = λT`.
    AsPrinted,
    /// `x = −θ t e`, `q = −θ e` on `[0, λT]`, which joins continuously.
    SignAdjusted,
}

/// Jumps of the two pieces at the breakpoint `t = λT`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Continuity {
    pub breakpoint: f64,
    pub jump_x: f64,
    pub jump_q: f64,
    pub continuous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateReport {
    pub variant: Variant,
    pub theta: f64,
    pub lambda: f64,
    pub e: Vec<f64>,
    pub h: Vec<f64>,
    /// Path in transformed variables `(x, q)`.
    pub pair: PathPair,
    pub certificate: SupersolutionCertificate,
    pub continuity: Continuity,
}

/// `λ = 1 − T^{−4/3}`.
pub fn default_lambda(horizon: f64) -> f64 {
    1.0 - libm::pow(horizon, -4.0 / 3.0)
}

/// Simpson's rule with `2k` panels for `∫_a^b DV(x0 + v (τ − a)) dτ`,
/// added into `acc`.
fn integrate_gradient(pot: &Potential, x0: &[f64], v: &[f64], a: f64, b: f64, acc: &mut [f64]) {
    const PANELS: usize = 16;
    let d = x0.len();
    let w = (b - a) / PANELS as f64;
    let mut x = vec![0.0; d];
    let mut g = vec![0.0; d];
    for k in 0..=PANELS {
        let tau = k as f64 * w;
        for i in 0..d {
            x[i] = x0[i] + v[i] * tau;
        }
        pot.gradient(&x, &mut g);
        let c = if k == 0 || k == PANELS {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        for i in 0..d {
            acc[i] += c * w / 3.0 * g[i];
        }
    }
}

/// Builds the piecewise candidate, certifies it against the transformed
/// equilibrium system of `cfg.convention`, and measures the jump at `λT`.
///
/// On `[λT, T]` both variants use
///
/// ```text
///   x(t) = −θλT e + θ h (t − λT),   q(t) = −θ e − ∫_{λT}^t DV(x(τ)) dτ,
///   h = 2λ e / (1 − λ) − 2 (1 + √θ) / ((1 − λ)² T²) · (1,…,1).
/// ```
pub fn candidate_supersolution(cfg: &MfgConfig, theta: f64, lambda: f64, variant: Variant) -> Result<CandidateReport> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument("theta must be positive"));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidArgument("lambda must lie in (0, 1)"));
    }
    let pot = &cfg.potential;
    let d = pot.dim();
    let t_end = cfg.horizon;
    let e = pot.e_vector();
    let corr = 2.0 * (1.0 + libm::sqrt(theta)) / ((1.0 - lambda) * (1.0 - lambda) * t_end * t_end);
    let h: Vec<f64> = e.iter().map(|&ei| 2.0 * lambda * ei / (1.0 - lambda) - corr).collect();
    let brk = lambda * t_end;
    let first_sign = match variant {
        Variant::AsPrinted => 1.0,
        Variant::SignAdjusted => -1.0,
    };
    let x_start: Vec<f64> = e.iter().map(|&ei| -theta * brk * ei).collect();
    let slope: Vec<f64> = h.iter().map(|&hi| theta * hi).collect();

    let grid: Grid = cfg.grid();
    let mut xs = Vec::with_capacity(grid.len() * d);
    let mut qs = Vec::with_capacity(grid.len() * d);
    // Running integral of DV along the second piece and the time it reaches.
    let mut integral = vec![0.0; d];
    let mut reached = brk;
    for t in grid.nodes() {
        if t <= brk {
            for &ei in &e {
                xs.push(first_sign * theta * t * ei);
                qs.push(first_sign * theta * ei);
            }
        } else {
            integrate_gradient(pot, &shifted(&x_start, &slope, reached - brk), &slope, reached, t, &mut integral);
            reached = t;
            for i in 0..d {
                xs.push(x_start[i] + slope[i] * (t - brk));
                qs.push(-theta * e[i] - integral[i]);
            }
        }
    }
    let pair = PathPair::new(VecPath::new(grid, d, xs)?, VecPath::new(grid, d, qs)?)?;

    let jump_x = e
        .iter()
        .zip(&x_start)
        .map(|(&ei, &xs0)| (first_sign * theta * brk * ei - xs0).abs())
        .fold(0.0, f64::max);
    let jump_q = e
        .iter()
        .map(|&ei| (first_sign * theta * ei + theta * ei).abs())
        .fold(0.0, f64::max);
    let continuity = Continuity {
        breakpoint: brk,
        jump_x,
        jump_q,
        continuous: jump_x <= 1e-12 && jump_q <= 1e-12,
    };
    let sys = equilibrium_system(pot, cfg.convention, Variables::Transformed, t_end)?;
    let certificate = is_supersolution(&sys, &pair, cfg.supersolution_tol)?;
    Ok(CandidateReport {
        variant,
        theta,
        lambda,
        e,
        h,
        pair,
        certificate,
        continuity,
    })
}

fn shifted(x0: &[f64], v: &[f64], dt: f64) -> Vec<f64> {
    x0.iter().zip(v).map(|(a, b)| a + b * dt).collect()
}
