//! Fixed-step RK4 integration on a [`Grid`], forward from `t = 0` or
//! backward from `t = T`, optionally against a frozen path.
//!
//! A frozen path is read by linear interpolation at the RK4 stage times, so
//! the stage at the interval midpoint sees the average of the two node
//! values.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::order::{Grid, VecPath};

/// Right-hand side `(t, state, frozen, out)`.
pub type FieldFn = dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync;

/// A vector field with a state block and an optional frozen block.
#[derive(Clone)]
pub struct FieldEval {
    dim_state: usize,
    dim_frozen: usize,
    func: Arc<FieldFn>,
}

impl fmt::Debug for FieldEval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldEval")
            .field("dim_state", &self.dim_state)
            .field("dim_frozen", &self.dim_frozen)
            .finish_non_exhaustive()
    }
}

impl FieldEval {
    pub fn new<F>(dim_state: usize, dim_frozen: usize, func: F) -> Self
    where
        F: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            dim_state,
            dim_frozen,
            func: Arc::new(func),
        }
    }

    pub fn from_arc(dim_state: usize, dim_frozen: usize, func: Arc<FieldFn>) -> Self {
        Self {
            dim_state,
            dim_frozen,
            func,
        }
    }

    /// Scalar autonomous-in-frozen field `γ̇ = h(t, γ)`.
    pub fn scalar<F>(h: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(1, 0, move |t, s, _, out| out[0] = h(t, s[0]))
    }

    #[inline]
    pub fn dim_state(&self) -> usize {
        self.dim_state
    }

    #[inline]
    pub fn dim_frozen(&self) -> usize {
        self.dim_frozen
    }

    /// Output dimension; always equal to the state dimension.
    #[inline]
    pub fn dim_out(&self) -> usize {
        self.dim_state
    }

    #[inline]
    pub fn eval(&self, t: f64, state: &[f64], frozen: &[f64], out: &mut [f64]) {
        (self.func)(t, state, frozen, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    /// Any state entry with magnitude above this is reported as blow-up.
    pub blowup_threshold: f64,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            blowup_threshold: 1e12,
        }
    }
}

/// Which end of the grid carries the Cauchy datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Start,
    End,
}

/// Solves `ẋ = field(t, x, frozen(t))`, `x(0) = x0`.
pub fn integrate_forward(
    field: &FieldEval,
    x0: &[f64],
    grid: &Grid,
    frozen: Option<&VecPath>,
    opts: &IvpOptions,
) -> Result<VecPath> {
    integrate(field, x0, grid, frozen, opts, Anchor::Start)
}

/// Solves `ẏ = field(t, y, frozen(t))`, `y(T) = y_t`, marching from `T` to 0.
pub fn integrate_backward(
    field: &FieldEval,
    y_t: &[f64],
    grid: &Grid,
    frozen: Option<&VecPath>,
    opts: &IvpOptions,
) -> Result<VecPath> {
    integrate(field, y_t, grid, frozen, opts, Anchor::End)
}

/// Scalar Cauchy problem anchored at either end of the grid.
pub fn solve_scalar_cauchy(
    field: &FieldEval,
    value: f64,
    anchor: Anchor,
    grid: &Grid,
    opts: &IvpOptions,
) -> Result<VecPath> {
    if field.dim_state != 1 || field.dim_frozen != 0 {
        return Err(Error::InvalidArgument("scalar Cauchy problem needs a 1-d field without frozen input"));
    }
    integrate(field, &[value], grid, None, opts, anchor)
}

fn integrate(
    field: &FieldEval,
    init: &[f64],
    grid: &Grid,
    frozen: Option<&VecPath>,
    opts: &IvpOptions,
    anchor: Anchor,
) -> Result<VecPath> {
    let d = field.dim_state;
    if init.len() != d {
        return Err(Error::Shape {
            what: "initial value",
            expected: d,
            found: init.len(),
        });
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial value must be finite"));
    }
    let fd = field.dim_frozen;
    match frozen {
        Some(p) => {
            if p.grid() != grid {
                return Err(Error::GridMismatch);
            }
            if p.dim() != fd {
                return Err(Error::Shape {
                    what: "frozen path dimension",
                    expected: fd,
                    found: p.dim(),
                });
            }
        }
        None if fd > 0 => {
            return Err(Error::InvalidArgument("field expects a frozen path"));
        }
        None => {}
    }

    let n = grid.intervals();
    let mut values = vec![0.0; grid.len() * d];
    let mut stepper = Rk4::new(d, fd);
    let (start, sign) = match anchor {
        Anchor::Start => (0usize, 1.0),
        Anchor::End => (n, -1.0),
    };
    values[start * d..(start + 1) * d].copy_from_slice(init);
    let h = sign * grid.step();
    let mut cur = init.to_vec();
    let mut next = vec![0.0; d];

    for s in 0..n {
        let (from, to) = match anchor {
            Anchor::Start => (s, s + 1),
            Anchor::End => (n - s, n - s - 1),
        };
        if let Some(p) = frozen {
            let a = p.at(from);
            let b = p.at(to);
            stepper.z0.copy_from_slice(a);
            stepper.z1.copy_from_slice(b);
            for ((m, &lo), &hi) in stepper.zm.iter_mut().zip(a).zip(b) {
                *m = 0.5 * (lo + hi);
            }
        }
        stepper.step(field, grid.node(from), h, &cur, &mut next);
        if next
            .iter()
            .any(|v| !v.is_finite() || v.abs() > opts.blowup_threshold)
        {
            return Err(Error::BlowUp {
                node: to,
                time: grid.node(to),
            });
        }
        values[to * d..(to + 1) * d].copy_from_slice(&next);
        core::mem::swap(&mut cur, &mut next);
    }
    Ok(VecPath::from_raw(*grid, d, values))
}

/// Scratch space for classical RK4 steps.
pub(crate) struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
    pub(crate) z0: Vec<f64>,
    pub(crate) zm: Vec<f64>,
    pub(crate) z1: Vec<f64>,
}

impl Rk4 {
    pub(crate) fn new(d: usize, frozen_dim: usize) -> Self {
        Self {
            k1: vec![0.0; d],
            k2: vec![0.0; d],
            k3: vec![0.0; d],
            k4: vec![0.0; d],
            tmp: vec![0.0; d],
            z0: vec![0.0; frozen_dim],
            zm: vec![0.0; frozen_dim],
            z1: vec![0.0; frozen_dim],
        }
    }

    /// One step of size `h` (negative when marching backward); frozen
    /// values for the three stage times must already be in `z0/zm/z1`.
    pub(crate) fn step(&mut self, field: &FieldEval, t: f64, h: f64, x: &[f64], out: &mut [f64]) {
        field.eval(t, x, &self.z0, &mut self.k1);
        for ((tmp, &xi), &k) in self.tmp.iter_mut().zip(x).zip(&self.k1) {
            *tmp = xi + 0.5 * h * k;
        }
        field.eval(t + 0.5 * h, &self.tmp, &self.zm, &mut self.k2);
        for ((tmp, &xi), &k) in self.tmp.iter_mut().zip(x).zip(&self.k2) {
            *tmp = xi + 0.5 * h * k;
        }
        field.eval(t + 0.5 * h, &self.tmp, &self.zm, &mut self.k3);
        for ((tmp, &xi), &k) in self.tmp.iter_mut().zip(x).zip(&self.k3) {
            *tmp = xi + h * k;
        }
        field.eval(t + h, &self.tmp, &self.z1, &mut self.k4);
        for (i, o) in out.iter_mut().enumerate() {
            *o = x[i] + h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{E, PI};

    fn opts() -> IvpOptions {
        IvpOptions::default()
    }

    #[test]
    fn zero_field_keeps_the_datum() {
        let g = Grid::new(3.0, 10).unwrap();
        let zero = FieldEval::new(1, 0, |_, _, _, out| out[0] = 0.0);
        let fwd = integrate_forward(&zero, &[7.0], &g, None, &opts()).unwrap();
        assert!(fwd.values().iter().all(|&v| v == 7.0));
        let bwd = integrate_backward(&zero, &[-2.0], &g, None, &opts()).unwrap();
        assert!(bwd.values().iter().all(|&v| v == -2.0));
    }

    #[test]
    fn exponential_growth_forward() {
        let g = Grid::new(1.0, 1000).unwrap();
        let f = FieldEval::new(1, 0, |_, x, _, out| out[0] = x[0]);
        let p = integrate_forward(&f, &[1.0], &g, None, &opts()).unwrap();
        assert_eq!(p.at(0)[0], 1.0);
        assert!((p.at(1000)[0] - E).abs() <= 1e-9);
    }

    #[test]
    fn exponential_backward() {
        let g = Grid::new(1.0, 1000).unwrap();
        let f = FieldEval::new(1, 0, |_, y, _, out| out[0] = -y[0]);
        let p = integrate_backward(&f, &[1.0], &g, None, &opts()).unwrap();
        assert_eq!(p.at(1000)[0], 1.0);
        assert!((p.at(0)[0] - E).abs() <= 1e-9);
    }

    #[test]
    fn frozen_cosine_integrates_to_sine() {
        let g = Grid::new(PI, 1000).unwrap();
        let cos = VecPath::from_fn(g, 1, |t, o| o[0] = libm::cos(t)).unwrap();
        let f = FieldEval::new(1, 1, |_, _, y, out| out[0] = y[0]);
        let p = integrate_forward(&f, &[0.0], &g, Some(&cos), &opts()).unwrap();
        assert!(p.at(1000)[0].abs() <= 1e-8);
    }

    #[test]
    fn frozen_backward_matches_closed_form() {
        // ẏ = -x(t), x = 5 sin t, y(2π) = 4 gives y = 5 cos t - 1.
        let g = Grid::new(2.0 * PI, 8000).unwrap();
        let x = VecPath::from_fn(g, 1, |t, o| o[0] = 5.0 * libm::sin(t)).unwrap();
        let f = FieldEval::new(1, 1, |_, _, x, out| out[0] = -x[0]);
        let y = integrate_backward(&f, &[4.0], &g, Some(&x), &opts()).unwrap();
        for (k, t) in g.nodes().enumerate() {
            assert!((y.at(k)[0] - (5.0 * libm::cos(t) - 1.0)).abs() <= 1e-6);
        }
    }

    #[test]
    fn scalar_cauchy_examples() {
        let g = Grid::new(1.0, 1000).unwrap();
        let lin = FieldEval::scalar(|_, s| 1.0 - s);
        let p = solve_scalar_cauchy(&lin, 0.0, Anchor::Start, &g, &opts()).unwrap();
        assert!((p.at(1000)[0] - (1.0 - 1.0 / E)).abs() <= 1e-9);

        let still = FieldEval::scalar(|_, _| 0.0);
        let p = solve_scalar_cauchy(&still, 2.5, Anchor::End, &g, &opts()).unwrap();
        assert!(p.values().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn riccati_blows_up_before_one_half() {
        let g = Grid::new(1.0, 1000).unwrap();
        let sq = FieldEval::scalar(|_, s| s * s);
        match solve_scalar_cauchy(&sq, 2.0, Anchor::Start, &g, &opts()) {
            Err(Error::BlowUp { time, .. }) => assert!(time > 0.4 && time <= 0.5 + g.step() + 1e-12),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn forward_then_backward_round_trip() {
        let g = Grid::new(10.0, 1000).unwrap();
        let rot = FieldEval::new(2, 0, |_, z, _, out| {
            out[0] = -0.3 * z[0] + z[1];
            out[1] = -z[0] - 0.1 * z[1];
        });
        let fwd = integrate_forward(&rot, &[1.0, -0.5], &g, None, &opts()).unwrap();
        let back = integrate_backward(&rot, fwd.at(1000), &g, None, &opts()).unwrap();
        assert!((back.at(0)[0] - 1.0).abs() <= 1e-8);
        assert!((back.at(0)[1] + 0.5).abs() <= 1e-8);
    }

    #[test]
    fn halving_the_step_gains_fourth_order() {
        let f = FieldEval::new(1, 0, |t, x, _, out| out[0] = libm::cos(t) * x[0]);
        let exact = libm::exp(libm::sin(2.0));
        let err = |n: usize| {
            let g = Grid::new(2.0, n).unwrap();
            let p = integrate_forward(&f, &[1.0], &g, None, &opts()).unwrap();
            (p.at(n)[0] - exact).abs()
        };
        let ratio = err(40) / err(80);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn argument_checks() {
        let g = Grid::new(1.0, 10).unwrap();
        let f = FieldEval::new(1, 1, |_, _, y, out| out[0] = y[0]);
        assert!(integrate_forward(&f, &[0.0], &g, None, &opts()).is_err());
        let wrong = VecPath::constant(Grid::new(1.0, 11).unwrap(), &[0.0]).unwrap();
        assert_eq!(
            integrate_forward(&f, &[0.0], &g, Some(&wrong), &opts()),
            Err(Error::GridMismatch)
        );
        assert!(integrate_forward(&f, &[0.0, 1.0], &g, None, &opts()).is_err());
        assert!(solve_scalar_cauchy(&f, 0.0, Anchor::Start, &g, &opts()).is_err());
    }
}
