//! Boundary value problem instances and the checks that certify them:
//! residuals, supersolution verdicts, sampled quasi-monotonicity, the scalar
//! extreme reductions and the two envelope conditions that bound the family
//! of supersolutions from below.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::ivp::{solve_scalar_cauchy, Anchor, FieldEval, FieldFn, IvpOptions};
use crate::order::{BoundaryData, Grid, PathPair, VecPath};
use crate::sampling::Halton;

/// `(t, x, y, out)`.
pub type BlockFn = dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync;

/// A forward–backward system `ẋ = f(t,x,y)`, `ẏ = g(t,x,y)` on `[0,T]`
/// with `x(0) = x̄` and `y(T) = ȳ`.
#[derive(Clone)]
pub struct SystemDef {
    name: String,
    m: usize,
    n: usize,
    horizon: f64,
    boundary: BoundaryData,
    f: Arc<BlockFn>,
    g: Arc<BlockFn>,
}

impl fmt::Debug for SystemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemDef")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("n", &self.n)
            .field("horizon", &self.horizon)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

impl SystemDef {
    pub fn new<F, G>(
        name: impl Into<String>,
        m: usize,
        n: usize,
        horizon: f64,
        boundary: BoundaryData,
        f: F,
        g: G,
    ) -> Result<Self>
    where
        F: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
        G: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::from_arcs(name, m, n, horizon, boundary, Arc::new(f), Arc::new(g))
    }

    pub fn from_arcs(
        name: impl Into<String>,
        m: usize,
        n: usize,
        horizon: f64,
        boundary: BoundaryData,
        f: Arc<BlockFn>,
        g: Arc<BlockFn>,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("block dimensions must be positive"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument("horizon must be finite and positive"));
        }
        check_boundary(m, n, &boundary)?;
        Ok(Self {
            name: name.into(),
            m,
            n,
            horizon,
            boundary,
            f,
            g,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    #[inline]
    pub fn eval_f(&self, t: f64, x: &[f64], y: &[f64], out: &mut [f64]) {
        (self.f)(t, x, y, out)
    }

    #[inline]
    pub fn eval_g(&self, t: f64, x: &[f64], y: &[f64], out: &mut [f64]) {
        (self.g)(t, x, y, out)
    }

    pub fn f_arc(&self) -> Arc<BlockFn> {
        self.f.clone()
    }

    pub fn g_arc(&self) -> Arc<BlockFn> {
        self.g.clone()
    }

    /// Same fields, new boundary data.
    pub fn with_boundary(&self, boundary: BoundaryData) -> Result<Self> {
        check_boundary(self.m, self.n, &boundary)?;
        let mut out = self.clone();
        out.boundary = boundary;
        Ok(out)
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument("horizon must be finite and positive"));
        }
        let mut out = self.clone();
        out.horizon = horizon;
        Ok(out)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `ẋ = f(t, x, y(t))` with `y` frozen.
    pub fn x_field(&self) -> FieldEval {
        let f = self.f.clone();
        let func: Arc<FieldFn> = Arc::new(move |t, x, y, out| f(t, x, y, out));
        FieldEval::from_arc(self.m, self.n, func)
    }

    /// `ẏ = g(t, x(t), y)` with `x` frozen.
    pub fn y_field(&self) -> FieldEval {
        let g = self.g.clone();
        let func: Arc<FieldFn> = Arc::new(move |t, y, x, out| g(t, x, y, out));
        FieldEval::from_arc(self.n, self.m, func)
    }

    /// The coupled field on the stacked state `(x, y)`.
    pub fn joint_field(&self) -> FieldEval {
        let (f, g, m) = (self.f.clone(), self.g.clone(), self.m);
        let func: Arc<FieldFn> = Arc::new(move |t, z, _, out| {
            let (x, y) = z.split_at(m);
            let (ox, oy) = out.split_at_mut(m);
            f(t, x, y, ox);
            g(t, x, y, oy);
        });
        FieldEval::from_arc(self.m + self.n, 0, func)
    }

    /// `ẋ = f + φ(t)`, `ẏ = g − ψ(t)` with new boundary data. Solutions of
    /// the forced system with `φ, ψ ⪰ 0` and boundary data above the original
    /// are supersolutions of the original system.
    pub fn forced<P, Q>(&self, phi: P, psi: Q, boundary: BoundaryData) -> Result<Self>
    where
        P: Fn(f64, &mut [f64]) + Send + Sync + 'static,
        Q: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        let (f, g) = (self.f.clone(), self.g.clone());
        let (m, n) = (self.m, self.n);
        let ff = move |t: f64, x: &[f64], y: &[f64], out: &mut [f64]| {
            f(t, x, y, out);
            let mut extra = vec![0.0; m];
            phi(t, &mut extra);
            for (o, e) in out.iter_mut().zip(&extra) {
                *o += e;
            }
        };
        let gg = move |t: f64, x: &[f64], y: &[f64], out: &mut [f64]| {
            g(t, x, y, out);
            let mut extra = vec![0.0; n];
            psi(t, &mut extra);
            for (o, e) in out.iter_mut().zip(&extra) {
                *o -= e;
            }
        };
        let mut name = self.name.clone();
        name.push_str("+forcing");
        Self::new(name, m, n, self.horizon, boundary, ff, gg)
    }

    /// Checks dimensions and horizon of a pair against the system.
    pub fn check_pair(&self, pair: &PathPair) -> Result<()> {
        if pair.x.dim() != self.m {
            return Err(Error::Shape {
                what: "x block dimension",
                expected: self.m,
                found: pair.x.dim(),
            });
        }
        if pair.y.dim() != self.n {
            return Err(Error::Shape {
                what: "y block dimension",
                expected: self.n,
                found: pair.y.dim(),
            });
        }
        let h = pair.grid().horizon();
        if (h - self.horizon).abs() > 1e-12 * self.horizon.max(1.0) {
            return Err(Error::InvalidArgument("pair horizon differs from the system horizon"));
        }
        Ok(())
    }
}

fn check_boundary(m: usize, n: usize, b: &BoundaryData) -> Result<()> {
    if b.x_bar.len() != m {
        return Err(Error::Shape {
            what: "x boundary",
            expected: m,
            found: b.x_bar.len(),
        });
    }
    if b.y_bar.len() != n {
        return Err(Error::Shape {
            what: "y boundary",
            expected: n,
            found: b.y_bar.len(),
        });
    }
    Ok(())
}

/// A scalar extreme value together with where it occurred.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Located {
    pub value: f64,
    /// Interval index (the defect is measured at its midpoint).
    pub node: usize,
    pub component: usize,
}

impl Located {
    fn start(value: f64) -> Self {
        Self {
            value,
            node: 0,
            component: 0,
        }
    }
}

/// Visits every interval with the forward-difference slopes and the fields
/// at the interpolated midpoint.
fn for_each_midpoint(
    sys: &SystemDef,
    pair: &PathPair,
    mut visit: impl FnMut(usize, &[f64], &[f64], &[f64], &[f64]),
) -> Result<()> {
    sys.check_pair(pair)?;
    let grid = pair.grid();
    let (m, n) = (sys.m, sys.n);
    let h = grid.step();
    let mut xm = vec![0.0; m];
    let mut ym = vec![0.0; n];
    let mut dx = vec![0.0; m];
    let mut dy = vec![0.0; n];
    let mut fx = vec![0.0; m];
    let mut gy = vec![0.0; n];
    for k in 0..grid.intervals() {
        let (x0, x1) = (pair.x.at(k), pair.x.at(k + 1));
        let (y0, y1) = (pair.y.at(k), pair.y.at(k + 1));
        for i in 0..m {
            xm[i] = 0.5 * (x0[i] + x1[i]);
            dx[i] = (x1[i] - x0[i]) / h;
        }
        for j in 0..n {
            ym[j] = 0.5 * (y0[j] + y1[j]);
            dy[j] = (y1[j] - y0[j]) / h;
        }
        let tm = 0.5 * (grid.node(k) + grid.node(k + 1));
        sys.eval_f(tm, &xm, &ym, &mut fx);
        sys.eval_g(tm, &xm, &ym, &mut gy);
        visit(k, &dx, &fx, &dy, &gy);
    }
    Ok(())
}

/// Interior and boundary defects of a candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Per interval, the largest `|slope − field|` over all components.
    pub per_interval: Vec<f64>,
    pub worst_x: Located,
    pub worst_y: Located,
    /// `max_i |x_i(0) − x̄_i|`.
    pub boundary_x: f64,
    /// `max_j |y_j(T) − ȳ_j|`.
    pub boundary_y: f64,
}

impl ResidualReport {
    pub fn interior(&self) -> f64 {
        self.worst_x.value.max(self.worst_y.value)
    }

    pub fn boundary(&self) -> f64 {
        self.boundary_x.max(self.boundary_y)
    }

    /// Largest of all interior and boundary defects.
    pub fn max(&self) -> f64 {
        self.interior().max(self.boundary())
    }
}

pub fn residual(sys: &SystemDef, pair: &PathPair) -> Result<ResidualReport> {
    let mut per_interval = Vec::with_capacity(pair.grid().intervals());
    let mut wx = Located::start(0.0);
    let mut wy = Located::start(0.0);
    for_each_midpoint(sys, pair, |k, dx, fx, dy, gy| {
        let mut local = 0.0f64;
        for (i, (a, b)) in dx.iter().zip(fx).enumerate() {
            let e = (a - b).abs();
            local = local.max(e);
            if e > wx.value || e.is_nan() {
                wx = Located {
                    value: e,
                    node: k,
                    component: i,
                };
            }
        }
        for (j, (a, b)) in dy.iter().zip(gy).enumerate() {
            let e = (a - b).abs();
            local = local.max(e);
            if e > wy.value || e.is_nan() {
                wy = Located {
                    value: e,
                    node: k,
                    component: j,
                };
            }
        }
        per_interval.push(local);
    })?;
    let b = &sys.boundary;
    let n = pair.grid().intervals();
    let boundary_x = max_abs_diff(pair.x.at(0), &b.x_bar);
    let boundary_y = max_abs_diff(pair.y.at(n), &b.y_bar);
    Ok(ResidualReport {
        per_interval,
        worst_x: wx,
        worst_y: wy,
        boundary_x,
        boundary_y,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (u, v)| m.max((u - v).abs()))
}

/// Verdict of the supersolution inequalities at grid resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct SupersolutionCertificate {
    pub pass: bool,
    /// `x(0) − x̄`.
    pub boundary_gap_x: Vec<f64>,
    /// `y(T) − ȳ`.
    pub boundary_gap_y: Vec<f64>,
    /// Smallest `ẋ_i − f_i` over midpoints; nonnegative for a supersolution.
    pub worst_x: Located,
    /// Smallest `g_j − ẏ_j` over midpoints; nonnegative for a supersolution.
    pub worst_y: Located,
    pub tol: f64,
}

pub fn is_supersolution(sys: &SystemDef, pair: &PathPair, tol: f64) -> Result<SupersolutionCertificate> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument("tolerance must be nonnegative"));
    }
    let mut wx = Located::start(f64::INFINITY);
    let mut wy = Located::start(f64::INFINITY);
    for_each_midpoint(sys, pair, |k, dx, fx, dy, gy| {
        for (i, (a, b)) in dx.iter().zip(fx).enumerate() {
            let d = a - b;
            if !(d >= wx.value) {
                wx = Located {
                    value: d,
                    node: k,
                    component: i,
                };
            }
        }
        for (j, (a, b)) in dy.iter().zip(gy).enumerate() {
            let d = b - a;
            if !(d >= wy.value) {
                wy = Located {
                    value: d,
                    node: k,
                    component: j,
                };
            }
        }
    })?;
    let b = &sys.boundary;
    let n = pair.grid().intervals();
    let gap_x: Vec<f64> = pair.x.at(0).iter().zip(&b.x_bar).map(|(u, v)| u - v).collect();
    let gap_y: Vec<f64> = pair.y.at(n).iter().zip(&b.y_bar).map(|(u, v)| u - v).collect();
    let pass = gap_x.iter().chain(&gap_y).all(|&g| g >= -tol)
        && wx.value >= -tol
        && wy.value >= -tol;
    Ok(SupersolutionCertificate {
        pass,
        boundary_gap_x: gap_x,
        boundary_gap_y: gap_y,
        worst_x: wx,
        worst_y: wy,
        tol,
    })
}

/// Which sign pattern a monotonicity violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MCondition {
    /// `f_i` nondecreasing in off-diagonal `x_k` and in `y_j`.
    M1,
    /// `g_j` nonincreasing in `x_i` and in off-diagonal `y_k`.
    M2,
}

/// Variable perturbed in a slope test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
}

/// Which `y_j` block the `f_i` requirement covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum M1Reading {
    /// Every `j`, including `j = i`.
    #[default]
    AllJ,
    /// Only `j ≠ i`.
    OffDiagonal,
}

/// Coordinate ranges for sampled checks; `t` always ranges over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl SampleBox {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument("sample box needs finite lo < hi"));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    fn scale(&self, u: f64) -> f64 {
        self.lo + (self.hi - self.lo) * u
    }
}

impl Default for SampleBox {
    fn default() -> Self {
        Self { lo: -10.0, hi: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityOptions {
    pub samples: usize,
    pub step: f64,
    pub slope_tol: f64,
    pub reading: M1Reading,
    pub seed: u64,
    /// At most this many violations are stored; all are counted.
    pub max_recorded: usize,
}

impl Default for MonotonicityOptions {
    fn default() -> Self {
        Self {
            samples: 2000,
            step: 1e-6,
            slope_tol: 1e-9,
            reading: M1Reading::AllJ,
            seed: 0,
            max_recorded: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub condition: MCondition,
    /// Row of `f` (for M1) or `g` (for M2).
    pub row: usize,
    pub wrt: Var,
    /// `(t, x, y)` flattened.
    pub point: Vec<f64>,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub pass: bool,
    pub violations: Vec<MonotonicityViolation>,
    pub violation_count: usize,
    pub slope_tests: usize,
    /// Most negative M1 slope and most positive M2 slope seen.
    pub worst_m1: f64,
    pub worst_m2: f64,
}

pub fn check_quasi_monotone(
    sys: &SystemDef,
    sample_box: &SampleBox,
    opts: &MonotonicityOptions,
) -> Result<MonotonicityReport> {
    if opts.samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample"));
    }
    if !(opts.step > 0.0) || !(opts.slope_tol >= 0.0) {
        return Err(Error::InvalidArgument("step must be positive and slope_tol nonnegative"));
    }
    let (m, n) = (sys.m, sys.n);
    let mut halton = Halton::new(1 + m + n, opts.seed.wrapping_mul(7919));
    let mut u = vec![0.0; 1 + m + n];
    let mut x = vec![0.0; m];
    let mut y = vec![0.0; n];
    let mut xp = vec![0.0; m];
    let mut yp = vec![0.0; n];
    let mut f0 = vec![0.0; m];
    let mut f1 = vec![0.0; m];
    let mut g0 = vec![0.0; n];
    let mut g1 = vec![0.0; n];
    let mut report = MonotonicityReport {
        pass: true,
        violations: Vec::new(),
        violation_count: 0,
        slope_tests: 0,
        worst_m1: f64::INFINITY,
        worst_m2: f64::NEG_INFINITY,
    };
    let h = opts.step;
    for _ in 0..opts.samples {
        halton.next_into(&mut u);
        let t = sys.horizon * u[0];
        for i in 0..m {
            x[i] = sample_box.scale(u[1 + i]);
        }
        for j in 0..n {
            y[j] = sample_box.scale(u[1 + m + j]);
        }
        sys.eval_f(t, &x, &y, &mut f0);
        sys.eval_g(t, &x, &y, &mut g0);
        for v in 0..m + n {
            xp.copy_from_slice(&x);
            yp.copy_from_slice(&y);
            let wrt = if v < m {
                xp[v] += h;
                Var::X(v)
            } else {
                yp[v - m] += h;
                Var::Y(v - m)
            };
            sys.eval_f(t, &xp, &yp, &mut f1);
            sys.eval_g(t, &xp, &yp, &mut g1);
            for i in 0..m {
                let required = match wrt {
                    Var::X(k) => k != i,
                    Var::Y(j) => opts.reading == M1Reading::AllJ || j != i,
                };
                if !required {
                    continue;
                }
                let slope = (f1[i] - f0[i]) / h;
                report.slope_tests += 1;
                report.worst_m1 = report.worst_m1.min(slope);
                if !(slope >= -opts.slope_tol) {
                    record(&mut report, opts, MCondition::M1, i, wrt, t, &x, &y, slope);
                }
            }
            for j in 0..n {
                if wrt == Var::Y(j) {
                    continue;
                }
                let slope = (g1[j] - g0[j]) / h;
                report.slope_tests += 1;
                report.worst_m2 = report.worst_m2.max(slope);
                if !(slope <= opts.slope_tol) {
                    record(&mut report, opts, MCondition::M2, j, wrt, t, &x, &y, slope);
                }
            }
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn record(
    report: &mut MonotonicityReport,
    opts: &MonotonicityOptions,
    condition: MCondition,
    row: usize,
    wrt: Var,
    t: f64,
    x: &[f64],
    y: &[f64],
    slope: f64,
) {
    report.pass = false;
    report.violation_count += 1;
    if report.violations.len() < opts.max_recorded {
        let mut point = Vec::with_capacity(1 + x.len() + y.len());
        point.push(t);
        point.extend_from_slice(x);
        point.extend_from_slice(y);
        report.violations.push(MonotonicityViolation {
            condition,
            row,
            wrt,
            point,
            slope,
        });
    }
}

/// `(t, s, τ) ↦ value`.
pub type ReducedFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// Scalar fields obtained from `f` and `g` on diagonal arguments
/// `x_s = (s,…,s)`, `y_τ = (τ,…,τ)`.
#[derive(Clone)]
pub struct ReducedFields {
    pub f_min: Arc<ReducedFn>,
    pub f_max: Arc<ReducedFn>,
    pub g_min: Arc<ReducedFn>,
    pub g_max: Arc<ReducedFn>,
}

impl fmt::Debug for ReducedFields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedFields").finish_non_exhaustive()
    }
}

impl ReducedFields {
    /// The scalar system `ẋ = f_min(t,x,y)`, `ẏ = g_max(t,x,y)` with the
    /// componentwise minimum of the boundary data of `sys`.
    pub fn reduced_system(&self, sys: &SystemDef) -> Result<SystemDef> {
        let b = sys.boundary();
        let boundary = BoundaryData::new(vec![min_of(&b.x_bar)], vec![min_of(&b.y_bar)])?;
        let (fm, gm) = (self.f_min.clone(), self.g_max.clone());
        let mut name = String::from(sys.name());
        name.push_str("/reduced");
        SystemDef::new(
            name,
            1,
            1,
            sys.horizon(),
            boundary,
            move |t, x, y, out| out[0] = fm(t, x[0], y[0]),
            move |t, x, y, out| out[0] = gm(t, x[0], y[0]),
        )
    }
}

pub(crate) fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Copy)]
enum Block {
    F,
    G,
}

fn reduced(sys: &SystemDef, block: Block, take_max: bool) -> Arc<ReducedFn> {
    let (m, n) = (sys.m, sys.n);
    let func = match block {
        Block::F => sys.f.clone(),
        Block::G => sys.g.clone(),
    };
    let rows = match block {
        Block::F => m,
        Block::G => n,
    };
    Arc::new(move |t, s, tau| {
        let x = vec![s; m];
        let y = vec![tau; n];
        let mut out = vec![0.0; rows];
        func(t, &x, &y, &mut out);
        if take_max {
            max_of(&out)
        } else {
            min_of(&out)
        }
    })
}

pub fn reduce_extremes(sys: &SystemDef) -> ReducedFields {
    ReducedFields {
        f_min: reduced(sys, Block::F, false),
        f_max: reduced(sys, Block::F, true),
        g_min: reduced(sys, Block::G, false),
        g_max: reduced(sys, Block::G, true),
    }
}

/// Nodewise minimum over components within each block.
pub fn reduce_pair(pair: &PathPair) -> PathPair {
    PathPair {
        x: pair.x.component_min(),
        y: pair.y.component_min(),
    }
}

/// `(t, v) ↦ bound`.
pub type ScalarBound = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A pair of scalar bounds: `(α₁, α₂)` in `s` for condition (i) or
/// `(β₁, β₂)` in `τ` for condition (ii).
#[derive(Clone)]
pub struct Envelope {
    pub lower: ScalarBound,
    pub upper: ScalarBound,
    /// Free-form description carried into reports.
    pub label: String,
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Envelope").field("label", &self.label).finish_non_exhaustive()
    }
}

impl Envelope {
    pub fn new<L, U>(label: impl Into<String>, lower: L, upper: U) -> Self
    where
        L: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        U: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            lower: Arc::new(lower),
            upper: Arc::new(upper),
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    I,
    II,
}

/// Sampling parameters for the envelope inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    pub samples: usize,
    pub sample_box: SampleBox,
    pub slack: f64,
    pub seed: u64,
}

impl Default for EnvelopeCheck {
    fn default() -> Self {
        Self {
            samples: 10_000,
            sample_box: SampleBox::default(),
            slack: 1e-12,
            seed: 0,
        }
    }
}

/// One Cauchy problem solved while building a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: &'static str,
    /// Datum at the anchored end.
    pub datum: f64,
    pub anchor: Anchor,
    /// Frozen level `M` used in the reduced field, if any.
    pub level: Option<f64>,
    pub solved: bool,
}

#[derive(Debug, Clone)]
pub struct ConditionCertificate {
    pub condition: Condition,
    pub envelope: Envelope,
    pub pass: bool,
    pub envelope_ok: bool,
    /// Largest violation of the sampled envelope inequalities (≤ 0 when ok).
    pub envelope_excess: f64,
    /// Point `(t, s, τ)` where the largest violation occurred.
    pub envelope_witness: Option<[f64; 3]>,
    pub gamma1: Option<VecPath>,
    pub gamma2: Option<VecPath>,
    pub eta1: Option<VecPath>,
    pub eta2: Option<VecPath>,
    /// Uniform lower bound on supersolutions of the reduced system.
    pub m_star: Option<f64>,
    pub instances: Vec<Instance>,
    pub failure: Option<&'static str>,
}

/// Attempts to certify condition (i) or (ii) for `sys` with the given
/// envelope, solving only the Cauchy problems the construction uses.
///
/// Condition (i), with `γ_min = min γ₁` and `γ_max = max γ₂`:
///
/// ```text
///   γ₁' = α₁(t, γ),              γ₁(0) = min x̄
///   γ₂' = α₂(t, γ),              γ₂(0) = max x̄
///   η₁' = g_max(t, γ_min, η),    η₁(T) = min ȳ
///   η₂' = g_min(t, γ_max, η),    η₂(T) = max ȳ
/// ```
///
/// Condition (ii) swaps the roles of the blocks:
///
/// ```text
///   γ₁' = β₂(t, γ),              γ₁(T) = min ȳ
///   γ₂' = β₁(t, γ),              γ₂(T) = max ȳ
///   η₁' = f_min(t, η, γ_min),    η₁(0) = min x̄
///   η₂' = f_max(t, η, γ_max),    η₂(0) = max x̄
/// ```
///
/// In both cases `m_star = min(min γ₁, min η₁)`.
pub fn certify_condition(
    sys: &SystemDef,
    condition: Condition,
    envelope: &Envelope,
    grid: &Grid,
    check: &EnvelopeCheck,
    ivp: &IvpOptions,
) -> Result<ConditionCertificate> {
    if (grid.horizon() - sys.horizon).abs() > 1e-12 * sys.horizon.max(1.0) {
        return Err(Error::InvalidArgument("grid horizon differs from the system horizon"));
    }
    let red = reduce_extremes(sys);
    let (excess, witness) = envelope_excess(sys, condition, envelope, &red, check);
    let envelope_ok = excess <= check.slack;
    let mut cert = ConditionCertificate {
        condition,
        envelope: envelope.clone(),
        pass: false,
        envelope_ok,
        envelope_excess: excess,
        envelope_witness: witness,
        gamma1: None,
        gamma2: None,
        eta1: None,
        eta2: None,
        m_star: None,
        instances: Vec::new(),
        failure: None,
    };
    let b = &sys.boundary;
    let (x_lo, x_hi) = (min_of(&b.x_bar), max_of(&b.x_bar));
    let (y_lo, y_hi) = (min_of(&b.y_bar), max_of(&b.y_bar));

    // The γ problems live in the block the envelope controls.
    let (g_anchor, g_lo, g_hi, e_anchor, e_lo, e_hi) = match condition {
        Condition::I => (Anchor::Start, x_lo, x_hi, Anchor::End, y_lo, y_hi),
        Condition::II => (Anchor::End, y_lo, y_hi, Anchor::Start, x_lo, x_hi),
    };
    let (g1_bound, g2_bound) = match condition {
        Condition::I => (envelope.lower.clone(), envelope.upper.clone()),
        Condition::II => (envelope.upper.clone(), envelope.lower.clone()),
    };

    let gamma1 = solve_instance(
        &mut cert,
        "gamma1",
        FieldEval::scalar(move |t, v| g1_bound(t, v)),
        g_lo,
        g_anchor,
        None,
        grid,
        ivp,
    );
    let gamma2 = solve_instance(
        &mut cert,
        "gamma2",
        FieldEval::scalar(move |t, v| g2_bound(t, v)),
        g_hi,
        g_anchor,
        None,
        grid,
        ivp,
    );
    let (gamma1, gamma2) = match (gamma1, gamma2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(cert),
    };
    let level_lo = gamma1.min_value();
    let level_hi = gamma2.max_value();
    let (eta1_field, eta2_field) = match condition {
        Condition::I => {
            let (lo, hi) = (red.g_max.clone(), red.g_min.clone());
            (
                FieldEval::scalar(move |t, v| lo(t, level_lo, v)),
                FieldEval::scalar(move |t, v| hi(t, level_hi, v)),
            )
        }
        Condition::II => {
            let (lo, hi) = (red.f_min.clone(), red.f_max.clone());
            (
                FieldEval::scalar(move |t, v| lo(t, v, level_lo)),
                FieldEval::scalar(move |t, v| hi(t, v, level_hi)),
            )
        }
    };
    let eta1 = solve_instance(&mut cert, "eta1", eta1_field, e_lo, e_anchor, Some(level_lo), grid, ivp);
    let eta2 = solve_instance(&mut cert, "eta2", eta2_field, e_hi, e_anchor, Some(level_hi), grid, ivp);
    cert.gamma1 = Some(gamma1);
    cert.gamma2 = Some(gamma2);
    let (eta1, eta2) = match (eta1, eta2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(cert),
    };
    cert.m_star = Some(level_lo.min(eta1.min_value()));
    cert.eta1 = Some(eta1);
    cert.eta2 = Some(eta2);
    if !envelope_ok {
        cert.failure = Some("envelope inequality violated at a sampled point");
    }
    cert.pass = envelope_ok;
    Ok(cert)
}

#[allow(clippy::too_many_arguments)]
fn solve_instance(
    cert: &mut ConditionCertificate,
    name: &'static str,
    field: FieldEval,
    datum: f64,
    anchor: Anchor,
    level: Option<f64>,
    grid: &Grid,
    ivp: &IvpOptions,
) -> Option<VecPath> {
    let solved = solve_scalar_cauchy(&field, datum, anchor, grid, ivp).ok();
    cert.instances.push(Instance {
        name,
        datum,
        anchor,
        level,
        solved: solved.is_some(),
    });
    if solved.is_none() && cert.failure.is_none() {
        cert.failure = Some(match name {
            "gamma1" => "Cauchy problem gamma1 blew up",
            "gamma2" => "Cauchy problem gamma2 blew up",
            "eta1" => "Cauchy problem eta1 blew up",
            _ => "Cauchy problem eta2 blew up",
        });
    }
    solved
}

/// Largest `lower − min` or `max − upper` over the sample points.
fn envelope_excess(
    sys: &SystemDef,
    condition: Condition,
    env: &Envelope,
    red: &ReducedFields,
    check: &EnvelopeCheck,
) -> (f64, Option<[f64; 3]>) {
    let mut halton = Halton::new(3, check.seed.wrapping_mul(7919));
    let mut u = [0.0; 3];
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..check.samples {
        halton.next_into(&mut u);
        let t = sys.horizon * u[0];
        let s = check.sample_box.scale(u[1]);
        let tau = check.sample_box.scale(u[2]);
        let (lo_val, hi_val, v) = match condition {
            Condition::I => ((red.f_min)(t, s, tau), (red.f_max)(t, s, tau), s),
            Condition::II => ((red.g_min)(t, s, tau), (red.g_max)(t, s, tau), tau),
        };
        let e = ((env.lower)(t, v) - lo_val).max(hi_val - (env.upper)(t, v));
        if !(e <= worst) {
            worst = e;
            witness = Some([t, s, tau]);
        }
    }
    (worst, witness)
}
