use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{equilibrium_system, Convention, MfgConfig, Potential, Variables};
use crate::error::{Error, Result};
use crate::ivp::{integrate_forward, FieldEval, IvpOptions};
use crate::linalg::solve_dense;
use crate::order::{Grid, PathPair, VecPath};
use crate::sampling::Halton;
use crate::system::residual;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Number of Sturm–Liouville modes in the analytic branch.
    pub modes: usize,
    pub tol: f64,
    pub max_iters: usize,
    /// Largest equilibrium residual accepted before linearizing.
    pub precondition_tol: f64,
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            modes: 10,
            tol: 1e-8,
            max_iters: 10_000,
            precondition_tol: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub label: String,
    pub equilibrium_norm: f64,
    /// Mode values `λ` ordered by component, then by mode index; present
    /// only for the zero equilibrium with a diagonal Hessian at 0.
    pub analytic_lambdas: Option<Vec<f64>>,
    /// Analytic value of largest magnitude.
    pub analytic_dominant: Option<f64>,
    pub dominant_lambda_power: f64,
    pub power_iterations: usize,
    pub power_converged: bool,
    /// `2κ / (2κ + γ_min)`.
    pub bound: f64,
    pub bound_satisfied: bool,
    /// `|dominant| < 1`.
    pub stable: bool,
}

/// `λ = 2κ / (2κ − γ)` for every mode `μ_q = ((2q−1)π / 2T)²` and every
/// diagonal entry `V_ii(0)`, with `γ = −(V_ii + μ_q)` under convention A and
/// `γ = μ_q − V_ii` under convention B. `None` if `D²V(0)` is not diagonal.
pub fn analytic_lambdas(
    potential: &Potential,
    kappa: f64,
    horizon: f64,
    convention: Convention,
    modes: usize,
) -> Option<Vec<f64>> {
    if !potential.diagonal_at_zero() {
        return None;
    }
    let d = potential.dim();
    let h = potential.hessian_at_zero();
    let mut out = Vec::with_capacity(d * modes);
    for i in 0..d {
        let vii = h[i * d + i];
        for q in 1..=modes {
            let w = (2 * q - 1) as f64 * core::f64::consts::PI / (2.0 * horizon);
            let mu = w * w;
            let gamma = match convention {
                Convention::A => -(vii + mu),
                Convention::B => mu - vii,
            };
            out.push(2.0 * kappa / (2.0 * kappa - gamma));
        }
    }
    Some(out)
}

/// The derivative of `Φ` at an equilibrium: `δb ↦ δx` solving
/// `δẍ = s ((2κ + D²V(y)) δx − 2κ δb)`, `δx(0) = 0`, `δẋ(T) = 0`.
struct Linearization {
    grid: Grid,
    d: usize,
    field: FieldEval,
    y: VecPath,
    /// State paths of the homogeneous solutions started from `δẋ(0) = e_k`.
    homogeneous: Vec<VecPath>,
    /// `w_k(T)` of the homogeneous solutions, row-major `d × d`.
    terminal: Vec<f64>,
    ivp: IvpOptions,
}

impl Linearization {
    fn new(cfg: &MfgConfig, y: &VecPath) -> Result<Self> {
        let d = cfg.potential.dim();
        let s = match cfg.convention {
            Convention::A => 1.0,
            Convention::B => -1.0,
        };
        let two_k = 2.0 * cfg.kappa;
        let pot = cfg.potential.clone();
        let field = FieldEval::new(2 * d, 2 * d, move |_, z, fr, out| {
            let (x, w) = z.split_at(d);
            let (b, yv) = fr.split_at(d);
            let mut hess = vec![0.0; d * d];
            pot.hessian(yv, &mut hess);
            out[..d].copy_from_slice(w);
            for i in 0..d {
                let hx: f64 = (0..d).map(|j| hess[i * d + j] * x[j]).sum();
                out[d + i] = s * (two_k * x[i] + hx - two_k * b[i]);
            }
        });
        let grid = *y.grid();
        let mut lin = Self {
            grid,
            d,
            field,
            y: y.clone(),
            homogeneous: Vec::with_capacity(d),
            terminal: vec![0.0; d * d],
            ivp: cfg.shoot.ivp,
        };
        let zero = VecPath::constant(grid, &vec![0.0; d])?;
        let frozen = lin.frozen(&zero);
        let n = grid.intervals();
        for k in 0..d {
            let mut init = vec![0.0; 2 * d];
            init[d + k] = 1.0;
            let path = integrate_forward(&lin.field, &init, &grid, Some(&frozen), &lin.ivp)?;
            for i in 0..d {
                lin.terminal[i * d + k] = path.at(n)[d + i];
            }
            lin.homogeneous.push(path);
        }
        Ok(lin)
    }

    fn frozen(&self, b: &VecPath) -> VecPath {
        let d = self.d;
        let mut v = Vec::with_capacity(self.grid.len() * 2 * d);
        for k in 0..self.grid.len() {
            v.extend_from_slice(b.at(k));
            v.extend_from_slice(self.y.at(k));
        }
        VecPath::from_raw(self.grid, 2 * d, v)
    }

    fn apply(&self, b: &VecPath) -> Result<VecPath> {
        let d = self.d;
        let n = self.grid.intervals();
        let frozen = self.frozen(b);
        let part = integrate_forward(&self.field, &vec![0.0; 2 * d], &self.grid, Some(&frozen), &self.ivp)?;
        let mut rhs: Vec<f64> = part.at(n)[d..].iter().map(|v| -v).collect();
        let c = solve_dense(d, &mut self.terminal.clone(), &mut rhs)
            .ok_or(Error::Precondition {
                what: "linearized boundary problem is singular",
                value: 0.0,
            })?;
        let mut out = Vec::with_capacity(self.grid.len() * d);
        for k in 0..self.grid.len() {
            for i in 0..d {
                let mut v = part.at(k)[i];
                for (j, cj) in c.iter().enumerate() {
                    v += cj * self.homogeneous[j].at(k)[i];
                }
                out.push(v);
            }
        }
        Ok(VecPath::from_raw(self.grid, d, out))
    }
}

fn weights(grid: &Grid) -> Vec<f64> {
    let h = grid.step();
    (0..grid.len())
        .map(|k| if k == 0 || k == grid.intervals() { 0.5 * h } else { h })
        .collect()
}

fn inner(u: &VecPath, v: &VecPath, w: &[f64]) -> f64 {
    let d = u.dim();
    u.values()
        .iter()
        .zip(v.values())
        .enumerate()
        .map(|(idx, (a, b))| w[idx / d] * a * b)
        .sum()
}

/// Power iteration with Rayleigh quotients for the dominant eigenvalue of
/// the discretized derivative of `Φ` at `equilibrium`.
pub fn spectrum(cfg: &MfgConfig, equilibrium: &PathPair, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    let sys = equilibrium_system(&cfg.potential, cfg.convention, Variables::Transformed, cfg.horizon)?;
    if *equilibrium.grid() != cfg.grid() {
        return Err(Error::GridMismatch);
    }
    let res = residual(&sys, equilibrium)?.max();
    if !(res <= opts.precondition_tol) {
        return Err(Error::Precondition {
            what: "equilibrium residual exceeds the precondition tolerance",
            value: res,
        });
    }
    let norm = equilibrium.x.sup_norm();
    let is_zero = equilibrium.sup_norm() <= 1e-9;
    let analytic = if is_zero {
        analytic_lambdas(&cfg.potential, cfg.kappa, cfg.horizon, cfg.convention, opts.modes)
    } else {
        None
    };
    let analytic_dominant = analytic
        .as_ref()
        .and_then(|v| v.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())));

    let lin = Linearization::new(cfg, &equilibrium.x)?;
    let grid = lin.grid;
    let w = weights(&grid);
    let d = lin.d;
    let mut halton = Halton::new(1, opts.seed.wrapping_mul(7919));
    let mut u = [0.0];
    let mut v = VecPath::from_fn(grid, d, |t, o| {
        for oi in o.iter_mut() {
            halton.next_into(&mut u);
            *oi = 1.0 + t / cfg.horizon + 0.5 * (u[0] - 0.5);
        }
    })?;
    let nv = libm::sqrt(inner(&v, &v, &w));
    v = v.map(|x| x / nv)?;
    let mut lambda = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iters {
        iterations = it;
        let av = lin.apply(&v)?;
        let next = inner(&av, &v, &w);
        let na = libm::sqrt(inner(&av, &av, &w));
        if !(na > 0.0) {
            lambda = 0.0;
            converged = true;
            break;
        }
        let done = it > 1 && (next - lambda).abs() <= opts.tol * next.abs().max(1.0);
        lambda = next;
        v = av.map(|x| x / na)?;
        if done {
            converged = true;
            break;
        }
    }
    let gmin = cfg.potential.gamma_min();
    let bound = 2.0 * cfg.kappa / (2.0 * cfg.kappa + gmin);
    Ok(SpectrumReport {
        label: String::from(if is_zero { "zero" } else { "nontrivial" }),
        equilibrium_norm: norm,
        analytic_lambdas: analytic,
        analytic_dominant,
        dominant_lambda_power: lambda,
        power_iterations: iterations,
        power_converged: converged,
        bound,
        bound_satisfied: lambda.abs() < bound,
        stable: lambda.abs() < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_potential_modes_lie_in_the_unit_interval() {
        let p = Potential::zero(1).unwrap();
        let l = analytic_lambdas(&p, 1.0, 8.0, Convention::A, 10).unwrap();
        assert_eq!(l.len(), 10);
        assert!(l.iter().all(|&v| v > 0.0 && v < 1.0));
        assert!(l.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn first_mode_for_v_sqrt() {
        let l = analytic_lambdas(&Potential::v_sqrt(), 1.0, 8.0, Convention::A, 10).unwrap();
        let pi16 = core::f64::consts::PI / 16.0;
        assert!((l[0] - 2.0 / (3.0 + pi16 * pi16)).abs() < 1e-15);
    }

    #[test]
    fn non_solution_is_rejected() {
        let cfg = MfgConfig::new(Potential::v_sqrt(), 1.0, 8.0, 200, Convention::A).unwrap();
        let g = cfg.grid();
        let bad = PathPair::new(
            VecPath::from_fn(g, 1, |t, o| o[0] = t).unwrap(),
            VecPath::constant(g, &[0.0]).unwrap(),
        )
        .unwrap();
        let err = spectrum(&cfg, &bad, &SpectrumOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
    }

    #[test]
    fn power_iteration_matches_the_first_mode() {
        let cfg = MfgConfig::new(Potential::v_sqrt(), 1.0, 8.0, 1000, Convention::A).unwrap();
        let g = cfg.grid();
        let zero = PathPair::new(VecPath::constant(g, &[0.0]).unwrap(), VecPath::constant(g, &[0.0]).unwrap())
            .unwrap();
        let r = spectrum(&cfg, &zero, &SpectrumOptions::default()).unwrap();
        assert!(r.power_converged);
        assert!((r.dominant_lambda_power - r.analytic_dominant.unwrap()).abs() < 1e-3);
        assert!(r.bound_satisfied);
    }
}
