//! Minimal solutions as limits of decreasing sequences of supersolutions.
//!
//! Each sweep relaxes one block against the other frozen block and then the
//! other block against the fresh one. For quasi-monotone systems every sweep
//! maps a supersolution to a smaller supersolution, so the iterates descend
//! toward the minimal solution, or without bound when no lower bound exists.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ivp::{integrate_backward, integrate_forward, IvpOptions};
use crate::order::{first_violation, sup_distance, Grid, PathPair};
use crate::system::{residual, Condition, ConditionCertificate, SystemDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// `x` against frozen `y`, then `y` against the new `x`.
    #[default]
    XThenY,
    YThenX,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Residual target.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Consecutive iterates closer than this with residual above `tol`
    /// stop the iteration as stalled.
    pub stall_tol: f64,
    /// Iterates below `−divergence_threshold` are reported as unbounded.
    pub divergence_threshold: f64,
    /// Allowed increase of any entry across a sweep.
    pub order_slack: f64,
    /// Allowed undershoot of the certified lower bound.
    pub lower_bound_slack: f64,
    /// Return an error on the first order violation instead of recording it.
    pub strict_order: bool,
    pub order: SweepOrder,
    pub ivp: IvpOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_sweeps: 500,
            stall_tol: 1e-12,
            divergence_threshold: 1e8,
            order_slack: 1e-10,
            lower_bound_slack: 1e-6,
            strict_order: true,
            order: SweepOrder::XThenY,
            ivp: IvpOptions::default(),
        }
    }
}

/// Where the iteration starts.
#[derive(Debug, Clone)]
pub enum Start<'a> {
    /// Explicit supersolution from a passing certificate; its lower bound
    /// is enforced on every iterate.
    Certificate(&'a ConditionCertificate),
    /// A supersolution known to the caller; no lower bound is enforced.
    Pair(PathPair),
    /// A caller-supplied supersolution checked against a lower bound.
    PairWithBound(PathPair, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxSweeps,
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalSolutionReport {
    pub status: SolveStatus,
    pub solution: PathPair,
    pub sweeps_used: usize,
    pub residual_history: Vec<f64>,
    /// Every sweep output was below its input within `order_slack`.
    pub monotone_ok: bool,
    /// Largest increase of any entry across a sweep (negative or zero when
    /// the iteration was monotone).
    pub worst_order_excess: f64,
    pub initial_supersolution: PathPair,
    pub m_star: Option<f64>,
}

impl MinimalSolutionReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// `(x̃, ỹ)` with every component set to the certificate's supersolution
/// paths: `γ₂` and `η₂` for condition (i), mirrored for condition (ii).
pub fn initial_supersolution(sys: &SystemDef, cert: &ConditionCertificate) -> Result<PathPair> {
    if !cert.pass {
        return Err(Error::CertificateFailed(cert.failure.unwrap_or("certificate did not pass")));
    }
    let (g2, e2) = match (&cert.gamma2, &cert.eta2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::CertificateFailed("certificate is missing its paths")),
    };
    match cert.condition {
        Condition::I => PathPair::new(g2.broadcast(sys.m())?, e2.broadcast(sys.n())?),
        Condition::II => PathPair::new(e2.broadcast(sys.m())?, g2.broadcast(sys.n())?),
    }
}

/// One x-then-y relaxation.
pub fn sweep(sys: &SystemDef, pair: &PathPair, ivp: &IvpOptions) -> Result<PathPair> {
    sys.check_pair(pair)?;
    let grid = pair.grid();
    let b = sys.boundary();
    let x = integrate_forward(&sys.x_field(), &b.x_bar, grid, Some(&pair.y), ivp)?;
    let y = integrate_backward(&sys.y_field(), &b.y_bar, grid, Some(&x), ivp)?;
    PathPair::new(x, y)
}

/// One y-then-x relaxation.
pub fn sweep_y_first(sys: &SystemDef, pair: &PathPair, ivp: &IvpOptions) -> Result<PathPair> {
    sys.check_pair(pair)?;
    let grid = pair.grid();
    let b = sys.boundary();
    let y = integrate_backward(&sys.y_field(), &b.y_bar, grid, Some(&pair.x), ivp)?;
    let x = integrate_forward(&sys.x_field(), &b.x_bar, grid, Some(&y), ivp)?;
    PathPair::new(x, y)
}

fn order_excess(next: &PathPair, cur: &PathPair) -> Result<(f64, Option<(usize, usize)>)> {
    let mut worst = f64::NEG_INFINITY;
    let mut at = None;
    let m = cur.x.dim();
    for (blk, (u, v)) in [(&next.x, &cur.x), (&next.y, &cur.y)].into_iter().enumerate() {
        for (k, (a, b)) in u.values().chunks_exact(u.dim()).zip(v.values().chunks_exact(v.dim())).enumerate() {
            for (i, (p, q)) in a.iter().zip(b).enumerate() {
                let e = p - q;
                if e > worst {
                    worst = e;
                    at = Some((k, if blk == 0 { i } else { m + i }));
                }
            }
        }
    }
    Ok((worst, at))
}

/// Iterates sweeps from the given start until the residual drops below
/// `opts.tol`, the iterates stall, or `opts.max_sweeps` is exhausted.
///
/// Components of the violation carried by [`Error::MonotonicityViolation`]
/// count `x` entries first, then `y` entries.
pub fn solve_minimal(sys: &SystemDef, start: Start<'_>, opts: &SolveOptions) -> Result<MinimalSolutionReport> {
    if !(opts.tol > 0.0) || opts.max_sweeps == 0 {
        return Err(Error::InvalidArgument("tol must be positive and max_sweeps at least one"));
    }
    let (init, m_star) = match start {
        Start::Certificate(c) => (initial_supersolution(sys, c)?, c.m_star),
        Start::Pair(p) => (p, None),
        Start::PairWithBound(p, b) => (p, Some(b)),
    };
    sys.check_pair(&init)?;
    let mut cur = init.clone();
    let mut history = Vec::new();
    let mut monotone_ok = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut status = SolveStatus::MaxSweeps;
    let mut used = 0;
    for s in 1..=opts.max_sweeps {
        used = s;
        let next = match opts.order {
            SweepOrder::XThenY => sweep(sys, &cur, &opts.ivp),
            SweepOrder::YThenX => sweep_y_first(sys, &cur, &opts.ivp),
        };
        let next = match next {
            Ok(p) => p,
            Err(Error::BlowUp { .. }) => {
                return Err(Error::UnboundedBelow {
                    sweep: s,
                    value: f64::NEG_INFINITY,
                })
            }
            Err(e) => return Err(e),
        };
        let low = next.min_value();
        if low < -opts.divergence_threshold {
            return Err(Error::UnboundedBelow { sweep: s, value: low });
        }
        let (excess, at) = order_excess(&next, &cur)?;
        worst_excess = worst_excess.max(excess);
        if excess > opts.order_slack {
            monotone_ok = false;
            if opts.strict_order {
                let (node, component) = at.unwrap_or((0, 0));
                return Err(Error::MonotonicityViolation {
                    sweep: s,
                    node,
                    component,
                    excess,
                });
            }
        }
        if let Some(bound) = m_star {
            if low < bound - opts.lower_bound_slack {
                return Err(Error::LowerBoundViolation {
                    sweep: s,
                    value: low,
                    bound,
                });
            }
        }
        let r = residual(sys, &next)?.max();
        history.push(r);
        let step = next.sup_distance(&cur)?;
        cur = next;
        if r <= opts.tol {
            status = SolveStatus::Converged;
            break;
        }
        if step < opts.stall_tol {
            status = SolveStatus::Stalled;
            break;
        }
    }
    Ok(MinimalSolutionReport {
        status,
        solution: cur,
        sweeps_used: used,
        residual_history: history,
        monotone_ok,
        worst_order_excess: worst_excess,
        initial_supersolution: init,
        m_star,
    })
}

/// First `(node, component, excess)` where `next` rises above `cur`.
pub fn order_violation(next: &PathPair, cur: &PathPair, slack: f64) -> Result<Option<(usize, usize, f64)>> {
    if let Some(v) = first_violation(&next.x, &cur.x, slack)? {
        return Ok(Some(v));
    }
    let m = cur.x.dim();
    Ok(first_violation(&next.y, &cur.y, slack)?.map(|(k, j, e)| (k, m + j, e)))
}

/// `sup_distance` over both blocks of two iterates.
pub fn iterate_distance(a: &PathPair, b: &PathPair) -> Result<f64> {
    Ok(sup_distance(&a.x, &b.x)?.max(sup_distance(&a.y, &b.y)?))
}

/// Grid on which a start pair lives.
pub fn start_grid(start: &Start<'_>) -> Option<Grid> {
    match start {
        Start::Certificate(c) => c.gamma1.as_ref().map(|p| *p.grid()),
        Start::Pair(p) | Start::PairWithBound(p, _) => Some(*p.grid()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{BoundaryData, VecPath};
    use crate::registry;
    use crate::system::{certify_condition, is_supersolution, EnvelopeCheck};
    use alloc::vec;

    #[test]
    fn still_system_converges_in_one_sweep() {
        let b = BoundaryData::new(vec![1.0, -1.0], vec![0.5]).unwrap();
        let sys = registry::still(2, 1, 1.0, b).unwrap();
        let grid = Grid::new(1.0, 10).unwrap();
        let start = PathPair::new(
            VecPath::constant(grid, &[3.0, 3.0]).unwrap(),
            VecPath::constant(grid, &[2.0]).unwrap(),
        )
        .unwrap();
        let r = solve_minimal(&sys, Start::Pair(start), &SolveOptions::default()).unwrap();
        assert!(r.converged());
        assert_eq!(r.sweeps_used, 1);
        assert_eq!(r.solution.x.at(5), &[1.0, -1.0]);
        assert_eq!(r.solution.y.at(0), &[0.5]);
    }

    #[test]
    fn still_initial_supersolution_uses_boundary_maxima() {
        let b = BoundaryData::new(vec![1.0, -1.0], vec![0.5, 2.0]).unwrap();
        let sys = registry::still(2, 2, 1.0, b).unwrap();
        let grid = Grid::new(1.0, 10).unwrap();
        let env = crate::system::Envelope::new("zero", |_, _| 0.0, |_, _| 0.0);
        let cert = certify_condition(&sys, Condition::I, &env, &grid, &EnvelopeCheck::default(), &IvpOptions::default())
            .unwrap();
        let p = initial_supersolution(&sys, &cert).unwrap();
        assert!(p.x.values().iter().all(|&v| v == 1.0));
        assert!(p.y.values().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn bounded_coupled_descends_to_a_solution() {
        let sys = registry::bounded_coupled_default(1, 0.0).unwrap();
        let grid = Grid::new(1.0, 1000).unwrap();
        let env = registry::bounded_coupled_alpha(1, 0.0);
        let cert = certify_condition(&sys, Condition::I, &env, &grid, &EnvelopeCheck::default(), &IvpOptions::default())
            .unwrap();
        assert!(cert.pass);
        let init = initial_supersolution(&sys, &cert).unwrap();
        assert!(is_supersolution(&sys, &init, 1e-6).unwrap().pass);
        let once = sweep(&sys, &init, &IvpOptions::default()).unwrap();
        assert!(once.leq(&init, 1e-10).unwrap());
        let r = solve_minimal(&sys, Start::Certificate(&cert), &SolveOptions::default()).unwrap();
        assert!(r.converged() && r.monotone_ok);
        assert!(r.sweeps_used <= 200);
        let again = sweep(&sys, &r.solution, &IvpOptions::default()).unwrap();
        assert!(iterate_distance(&again, &r.solution).unwrap() <= 2e-6);
    }

    #[test]
    fn oscillator_descends_without_bound() {
        let sys = registry::oscillator(3.0, 4.0).unwrap();
        let grid = Grid::new(sys.horizon(), 400).unwrap();
        let sup = crate::oscillator::solution_path(4.0, 5.0, &grid).unwrap();
        let err = solve_minimal(&sys, Start::Pair(sup), &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnboundedBelow { .. }));
    }
}
