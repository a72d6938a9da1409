//! Uniform time grids, piecewise-linear vector paths and the componentwise
//! partial order on them.
//!
//! A [`VecPath`] stores one `d`-vector per grid node and is read as the
//! piecewise-linear interpolant between nodes. All order relations are
//! checked nodewise, which for piecewise-linear paths is the same as checking
//! them for every `t`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Uniform grid `t_k = k T / N`, `k = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    horizon: f64,
    intervals: usize,
}

impl Grid {
    pub fn new(horizon: f64, intervals: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument("grid horizon must be finite and positive"));
        }
        if intervals < 2 {
            return Err(Error::InvalidArgument("grid needs at least two intervals"));
        }
        Ok(Self { horizon, intervals })
    }

    #[inline]
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of intervals `N`.
    #[inline]
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `N + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.horizon / self.intervals as f64
    }

    /// Time of node `k`. The last node is exactly `T`.
    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        if k == self.intervals {
            self.horizon
        } else {
            self.horizon * k as f64 / self.intervals as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }

    /// Interval index and local fraction in `[0, 1]` for time `t`, clamped
    /// to `[0, T]`.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        if !(t > 0.0) {
            return (0, 0.0);
        }
        if t >= self.horizon {
            return (self.intervals - 1, 1.0);
        }
        let s = t / self.step();
        let k = (s as usize).min(self.intervals - 1);
        (k, (s - k as f64).clamp(0.0, 1.0))
    }
}

/// A `dim`-dimensional path sampled at every node of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct VecPath {
    grid: Grid,
    dim: usize,
    values: Vec<f64>,
}

impl VecPath {
    /// `values` is node-major: the `dim` entries of node 0, then node 1, ...
    pub fn new(grid: Grid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("path dimension must be positive"));
        }
        if values.len() != grid.len() * dim {
            return Err(Error::Shape {
                what: "path values",
                expected: grid.len() * dim,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("path entries must be finite"));
        }
        Ok(Self { grid, dim, values })
    }

    pub(crate) fn from_raw(grid: Grid, dim: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len() * dim);
        Self { grid, dim, values }
    }

    pub fn constant(grid: Grid, value: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * value.len());
        for _ in 0..grid.len() {
            values.extend_from_slice(value);
        }
        Self::new(grid, value.len(), values)
    }

    /// Samples `fill(t, out)` at every node.
    pub fn from_fn<F>(grid: Grid, dim: usize, mut fill: F) -> Result<Self>
    where
        F: FnMut(f64, &mut [f64]),
    {
        let mut values = alloc::vec![0.0; grid.len() * dim];
        for (k, chunk) in values.chunks_exact_mut(dim.max(1)).enumerate() {
            fill(grid.node(k), chunk);
        }
        Self::new(grid, dim, values)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at node `k`.
    #[inline]
    pub fn at(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// Iterator over the values of component `i` at every node.
    pub fn component(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(i).step_by(self.dim).copied()
    }

    /// Linear interpolation at time `t` (clamped to `[0, T]`).
    pub fn sample(&self, t: f64, out: &mut [f64]) {
        let (k, s) = self.grid.locate(t);
        let a = self.at(k);
        let b = self.at(k + 1);
        for ((o, &lo), &hi) in out.iter_mut().zip(a).zip(b) {
            *o = lo + s * (hi - lo);
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Applies `op` to every entry.
    pub fn map(&self, mut op: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.dim, self.values.iter().map(|&v| op(v)).collect())
    }

    /// Nodewise combination of two paths on the same grid.
    pub fn zip_with(&self, other: &Self, mut op: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        check_compatible(self, other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Self::new(self.grid, self.dim, values)
    }

    /// Component `i` as a one-dimensional path.
    pub fn select(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::Shape {
                what: "component index",
                expected: self.dim,
                found: i,
            });
        }
        Self::new(self.grid, 1, self.component(i).collect())
    }

    /// Nodewise minimum over components, as a one-dimensional path.
    pub fn component_min(&self) -> Self {
        let values = self
            .values
            .chunks_exact(self.dim)
            .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        Self::from_raw(self.grid, 1, values)
    }

    /// Repeats a one-dimensional path into `dim` identical components.
    pub fn broadcast(&self, dim: usize) -> Result<Self> {
        if self.dim != 1 {
            return Err(Error::Shape {
                what: "broadcast source dimension",
                expected: 1,
                found: self.dim,
            });
        }
        let mut values = Vec::with_capacity(self.grid.len() * dim);
        for &v in &self.values {
            values.extend(core::iter::repeat_n(v, dim));
        }
        Self::new(self.grid, dim, values)
    }
}

/// Trajectory pair `(x, y)` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPair {
    pub x: VecPath,
    pub y: VecPath,
}

impl PathPair {
    pub fn new(x: VecPath, y: VecPath) -> Result<Self> {
        if x.grid != y.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self { x, y })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.x.grid
    }

    pub fn sup_norm(&self) -> f64 {
        self.x.sup_norm().max(self.y.sup_norm())
    }

    pub fn min_value(&self) -> f64 {
        self.x.min_value().min(self.y.min_value())
    }

    /// Largest nodewise distance over both blocks.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        Ok(sup_distance(&self.x, &other.x)?.max(sup_distance(&self.y, &other.y)?))
    }

    /// `self ⪯ other + slack` in both blocks.
    pub fn leq(&self, other: &Self, slack: f64) -> Result<bool> {
        Ok(leq_path(&self.x, &other.x, slack)? && leq_path(&self.y, &other.y, slack)?)
    }
}

/// Boundary data `x(0) = x̄`, `y(T) = ȳ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub x_bar: Vec<f64>,
    pub y_bar: Vec<f64>,
}

impl BoundaryData {
    pub fn new(x_bar: Vec<f64>, y_bar: Vec<f64>) -> Result<Self> {
        if x_bar.is_empty() || y_bar.is_empty() {
            return Err(Error::InvalidArgument("boundary vectors must be nonempty"));
        }
        if x_bar.iter().chain(&y_bar).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("boundary data must be finite"));
        }
        Ok(Self { x_bar, y_bar })
    }
}

pub(crate) fn check_compatible(u: &VecPath, v: &VecPath) -> Result<()> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    if u.dim != v.dim {
        return Err(Error::Shape {
            what: "path dimension",
            expected: u.dim,
            found: v.dim,
        });
    }
    Ok(())
}

/// First `(node, component, excess)` where `u > v + slack`, if any.
pub fn first_violation(u: &VecPath, v: &VecPath, slack: f64) -> Result<Option<(usize, usize, f64)>> {
    check_compatible(u, v)?;
    let d = u.dim;
    Ok(u
        .values
        .iter()
        .zip(&v.values)
        .position(|(a, b)| *a > *b + slack)
        .map(|idx| (idx / d, idx % d, u.values[idx] - v.values[idx])))
}

/// `u_i(t_k) <= v_i(t_k) + slack` at every node and component.
pub fn leq_path(u: &VecPath, v: &VecPath, slack: f64) -> Result<bool> {
    if !(slack >= 0.0) {
        return Err(Error::InvalidArgument("slack must be nonnegative"));
    }
    Ok(first_violation(u, v, slack)?.is_none())
}

/// Componentwise, nodewise minimum of two pairs.
pub fn pointwise_min(a: &PathPair, b: &PathPair) -> Result<PathPair> {
    let x = a.x.zip_with(&b.x, f64::min)?;
    let y = a.y.zip_with(&b.y, f64::min)?;
    PathPair::new(x, y)
}

/// `max_{k,i} |u_i(t_k) - v_i(t_k)|`.
pub fn sup_distance(u: &VecPath, v: &VecPath) -> Result<f64> {
    check_compatible(u, v)?;
    Ok(u
        .values
        .iter()
        .zip(&v.values)
        .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}
