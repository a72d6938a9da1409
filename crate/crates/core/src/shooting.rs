//! Single shooting on the unknown initial costate `y(0)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ivp::{integrate_forward, FieldEval, IvpOptions};
use crate::linalg::solve_dense;
use crate::order::{Grid, PathPair, VecPath};
use crate::system::SystemDef;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Target for `‖y(T) − ȳ‖∞`.
    pub tol: f64,
    pub max_iters: usize,
    /// Finite-difference increment, scaled by `max(1, |y0_j|)`.
    pub fd_step: f64,
    /// Smallest damping factor tried before giving up.
    pub min_damping: f64,
    /// Newton steps taken even if the guess already meets `tol`.
    pub min_iters: usize,
    pub ivp: IvpOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 50,
            fd_step: 1e-6,
            min_damping: 1e-4,
            min_iters: 0,
            ivp: IvpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    pub solution: Option<PathPair>,
    pub y0: Vec<f64>,
    pub iterations: usize,
    /// `‖y(T) − ȳ‖∞` at `y0` (infinite if the last trajectory blew up).
    pub final_residual: f64,
    pub failure: Option<Error>,
}

impl ShootResult {
    pub fn converged(&self) -> bool {
        self.solution.is_some()
    }
}

struct Shooter<'a> {
    sys: &'a SystemDef,
    field: FieldEval,
    grid: Grid,
    opts: &'a ShootOptions,
    z0: Vec<f64>,
}

impl Shooter<'_> {
    fn trajectory(&mut self, y0: &[f64]) -> Result<VecPath> {
        let m = self.sys.m();
        self.z0[m..].copy_from_slice(y0);
        integrate_forward(&self.field, &self.z0, &self.grid, None, &self.opts.ivp)
    }

    /// `y(T) − ȳ`.
    fn defect(&mut self, y0: &[f64]) -> Result<(Vec<f64>, VecPath)> {
        let path = self.trajectory(y0)?;
        let m = self.sys.m();
        let last = path.at(self.grid.intervals());
        let d = last[m..]
            .iter()
            .zip(&self.sys.boundary().y_bar)
            .map(|(a, b)| a - b)
            .collect();
        Ok((d, path))
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn split(sys: &SystemDef, path: &VecPath) -> PathPair {
    let m = sys.m();
    let n = sys.n();
    let grid = *path.grid();
    let mut xs = Vec::with_capacity(grid.len() * m);
    let mut ys = Vec::with_capacity(grid.len() * n);
    for k in 0..grid.len() {
        let z = path.at(k);
        xs.extend_from_slice(&z[..m]);
        ys.extend_from_slice(&z[m..]);
    }
    PathPair {
        x: VecPath::from_raw(grid, m, xs),
        y: VecPath::from_raw(grid, n, ys),
    }
}

/// Damped Newton on `y0 ↦ y(T) − ȳ` with a forward-difference Jacobian.
pub fn shoot(sys: &SystemDef, y0_guess: &[f64], grid: &Grid, opts: &ShootOptions) -> Result<ShootResult> {
    let n = sys.n();
    if y0_guess.len() != n {
        return Err(Error::Shape {
            what: "shooting guess",
            expected: n,
            found: y0_guess.len(),
        });
    }
    if y0_guess.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("shooting guess must be finite"));
    }
    if (grid.horizon() - sys.horizon()).abs() > 1e-12 * sys.horizon().max(1.0) {
        return Err(Error::InvalidArgument("grid horizon differs from the system horizon"));
    }
    let mut z0 = vec![0.0; sys.m() + n];
    z0[..sys.m()].copy_from_slice(&sys.boundary().x_bar);
    let mut sh = Shooter {
        sys,
        field: sys.joint_field(),
        grid: *grid,
        opts,
        z0,
    };
    let mut y0 = y0_guess.to_vec();
    let fail = |y0: Vec<f64>, iterations, residual, e| ShootResult {
        solution: None,
        y0,
        iterations,
        final_residual: residual,
        failure: Some(e),
    };
    let (mut defect, mut path) = match sh.defect(&y0) {
        Ok(v) => v,
        Err(e) => return Ok(fail(y0, 0, f64::INFINITY, e)),
    };
    let mut res = inf_norm(&defect);
    let mut iterations = 0;
    let mut jac = vec![0.0; n * n];
    let mut probe = vec![0.0; n];
    while res > opts.tol || iterations < opts.min_iters {
        if iterations >= opts.max_iters {
            return Ok(fail(
                y0,
                iterations,
                res,
                Error::NoConvergence {
                    iterations,
                    residual: res,
                },
            ));
        }
        iterations += 1;
        for j in 0..n {
            probe.copy_from_slice(&y0);
            let step = opts.fd_step * y0[j].abs().max(1.0);
            probe[j] += step;
            let dj = match sh.defect(&probe) {
                Ok((d, _)) => d,
                Err(e) => return Ok(fail(y0, iterations, res, e)),
            };
            for i in 0..n {
                jac[i * n + j] = (dj[i] - defect[i]) / step;
            }
        }
        let mut rhs: Vec<f64> = defect.iter().map(|v| -v).collect();
        let delta = match solve_dense(n, &mut jac.clone(), &mut rhs) {
            Some(d) => d,
            None => {
                return Ok(fail(
                    y0,
                    iterations,
                    res,
                    Error::NoConvergence {
                        iterations,
                        residual: res,
                    },
                ))
            }
        };
        let mut damping = 1.0;
        let accepted = loop {
            for j in 0..n {
                probe[j] = y0[j] + damping * delta[j];
            }
            if let Ok((d, p)) = sh.defect(&probe) {
                let r = inf_norm(&d);
                if r < res || (r == 0.0 && res == 0.0) {
                    break Some((d, p, r));
                }
            }
            damping *= 0.5;
            if damping < opts.min_damping {
                break None;
            }
        };
        match accepted {
            Some((d, p, r)) => {
                y0.copy_from_slice(&probe);
                defect = d;
                path = p;
                res = r;
            }
            None if res <= opts.tol => break,
            None => {
                return Ok(fail(
                    y0,
                    iterations,
                    res,
                    Error::NoConvergence {
                        iterations,
                        residual: res,
                    },
                ))
            }
        }
    }
    Ok(ShootResult {
        solution: Some(split(sys, &path)),
        y0,
        iterations,
        final_residual: res,
        failure: None,
    })
}

/// Shoots from every guess, drops failures, merges solutions closer than
/// `dedup_radius` in sup-distance, and sorts by sup-norm.
pub fn multi_start(
    sys: &SystemDef,
    guesses: &[Vec<f64>],
    grid: &Grid,
    opts: &ShootOptions,
    dedup_radius: f64,
) -> Result<Vec<ShootResult>> {
    if guesses.is_empty() {
        return Err(Error::InvalidArgument("need at least one guess"));
    }
    let mut found = Vec::new();
    for g in guesses {
        let r = shoot(sys, g, grid, opts)?;
        if r.converged() {
            found.push(r);
        }
    }
    Ok(dedup_sorted(found, dedup_radius))
}

pub(crate) fn dedup_sorted(mut found: Vec<ShootResult>, radius: f64) -> Vec<ShootResult> {
    let norm = |r: &ShootResult| r.solution.as_ref().map_or(f64::INFINITY, |s| s.sup_norm());
    found.sort_by(|a, b| norm(a).total_cmp(&norm(b)));
    let mut out: Vec<ShootResult> = Vec::new();
    for r in found {
        let s = r.solution.as_ref().expect("converged results carry a solution");
        let dup = out.iter().any(|o| {
            o.solution
                .as_ref()
                .and_then(|p| p.sup_distance(s).ok())
                .is_some_and(|d| d <= radius)
        });
        if !dup {
            out.push(r);
        }
    }
    out
}
