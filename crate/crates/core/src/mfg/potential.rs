use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::sampling::Halton;

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A potential `V: ℝᵈ → ℝ` with gradient, Hessian (row-major) and supplied
/// bounds on `‖DV‖∞` and `‖D²V‖∞`.
#[derive(Clone)]
pub struct Potential {
    name: String,
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Arc<VectorFn>,
    hessian: Arc<VectorFn>,
    hess_inf_norm: f64,
    grad_inf_norm: f64,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("hess_inf_norm", &self.hess_inf_norm)
            .field("grad_inf_norm", &self.grad_inf_norm)
            .finish_non_exhaustive()
    }
}

impl PartialEq for Potential {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.dim == other.dim
    }
}

impl Potential {
    pub fn new<V, G, H>(
        name: impl Into<String>,
        dim: usize,
        value: V,
        gradient: G,
        hessian: H,
        hess_inf_norm: f64,
        grad_inf_norm: f64,
    ) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        H: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidArgument("potential dimension must be positive"));
        }
        if !(hess_inf_norm >= 0.0 && grad_inf_norm >= 0.0) {
            return Err(Error::InvalidArgument("potential bounds must be nonnegative"));
        }
        Ok(Self {
            name: name.into(),
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Arc::new(hessian),
            hess_inf_norm,
            grad_inf_norm,
        })
    }

    /// `V(x) = √(1 + x²) − 1` on the line.
    pub fn v_sqrt() -> Self {
        Self::new(
            "v_sqrt",
            1,
            |x| libm::sqrt(1.0 + x[0] * x[0]) - 1.0,
            |x, o| o[0] = x[0] / libm::sqrt(1.0 + x[0] * x[0]),
            |x, o| {
                let r = 1.0 + x[0] * x[0];
                o[0] = 1.0 / (r * libm::sqrt(r));
            },
            1.0,
            1.0,
        )
        .expect("valid constants")
    }

    /// `V(x) = Σ (√(1 + x_i²) − 1)`.
    pub fn sqrt_sum(dim: usize) -> Result<Self> {
        Self::new(
            "sqrt_sum",
            dim,
            |x| x.iter().map(|&v| libm::sqrt(1.0 + v * v) - 1.0).sum(),
            |x, o| {
                for (oi, &v) in o.iter_mut().zip(x) {
                    *oi = v / libm::sqrt(1.0 + v * v);
                }
            },
            move |x, o| {
                o.fill(0.0);
                for (i, &v) in x.iter().enumerate() {
                    let r = 1.0 + v * v;
                    o[i * x.len() + i] = 1.0 / (r * libm::sqrt(r));
                }
            },
            1.0,
            1.0,
        )
    }

    /// `V ≡ 0`.
    pub fn zero(dim: usize) -> Result<Self> {
        Self::new("zero", dim, |_| 0.0, |_, o| o.fill(0.0), |_, o| o.fill(0.0), 0.0, 0.0)
    }

    /// Looks up `v_sqrt`, `sqrt_sum` or `zero`.
    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        match name {
            "v_sqrt" if dim == 1 => Ok(Self::v_sqrt()),
            "v_sqrt" => Err(Error::InvalidArgument("v_sqrt is one-dimensional")),
            "sqrt_sum" => Self::sqrt_sum(dim),
            "zero" => Self::zero(dim),
            _ => Err(Error::InvalidArgument("unknown potential")),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    #[inline]
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }

    #[inline]
    pub fn hessian(&self, x: &[f64], out: &mut [f64]) {
        (self.hessian)(x, out)
    }

    pub fn hess_inf_norm(&self) -> f64 {
        self.hess_inf_norm
    }

    pub fn grad_inf_norm(&self) -> f64 {
        self.grad_inf_norm
    }

    pub fn hessian_at_zero(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.dim * self.dim];
        self.hessian(&vec![0.0; self.dim], &mut h);
        h
    }

    /// `D²V(0)·(1,…,1)`.
    pub fn e_vector(&self) -> Vec<f64> {
        let h = self.hessian_at_zero();
        h.chunks_exact(self.dim).map(|r| r.iter().sum()).collect()
    }

    /// Smallest row sum of `D²V(0)`.
    pub fn gamma_min(&self) -> f64 {
        self.e_vector().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Largest row sum of `D²V(0)`.
    pub fn gamma_max(&self) -> f64 {
        self.e_vector().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn diagonal_at_zero(&self) -> bool {
        let h = self.hessian_at_zero();
        let d = self.dim;
        (0..d).all(|i| (0..d).all(|j| i == j || h[i * d + j] == 0.0))
    }

    /// Spot checks of the structural assumptions on a box `[−r, r]ᵈ`.
    pub fn check(&self, samples: usize, radius: f64, seed: u64) -> PotentialCheck {
        let d = self.dim;
        let mut g = vec![0.0; d];
        self.gradient(&vec![0.0; d], &mut g);
        let grad_at_zero = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut halton = Halton::new(d, seed.wrapping_mul(7919));
        let mut u = vec![0.0; d];
        let mut x = vec![0.0; d];
        let mut hbuf = vec![0.0; d * d];
        let mut min_entry = f64::INFINITY;
        let mut max_row = 0.0f64;
        let mut max_grad = 0.0f64;
        for _ in 0..samples {
            halton.next_into(&mut u);
            for (xi, &ui) in x.iter_mut().zip(&u) {
                *xi = radius * (2.0 * ui - 1.0);
            }
            self.hessian(&x, &mut hbuf);
            for row in hbuf.chunks_exact(d) {
                max_row = max_row.max(row.iter().map(|v| v.abs()).sum());
                min_entry = row.iter().copied().fold(min_entry, f64::min);
            }
            self.gradient(&x, &mut g);
            max_grad = g.iter().fold(max_grad, |m, v| m.max(v.abs()));
        }
        PotentialCheck {
            grad_at_zero,
            min_hessian_entry: min_entry,
            sampled_hess_norm: max_row,
            sampled_grad_norm: max_grad,
            ok: grad_at_zero <= 1e-12
                && min_entry >= -1e-12
                && max_row <= self.hess_inf_norm + 1e-12
                && max_grad <= self.grad_inf_norm + 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialCheck {
    pub grad_at_zero: f64,
    pub min_hessian_entry: f64,
    /// Largest absolute row sum of the sampled Hessians.
    pub sampled_hess_norm: f64,
    pub sampled_grad_norm: f64,
    pub ok: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_pass_their_spot_checks() {
        for p in [Potential::v_sqrt(), Potential::sqrt_sum(3).unwrap(), Potential::zero(2).unwrap()] {
            assert!(p.check(500, 20.0, 1).ok, "{}", p.name());
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = Potential::sqrt_sum(2).unwrap();
        let x = [0.7, -1.3];
        let mut g = [0.0; 2];
        p.gradient(&x, &mut g);
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            let fd = (p.value(&xp) - p.value(&xm)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn curvature_at_the_origin() {
        let p = Potential::v_sqrt();
        assert_eq!(p.gamma_min(), 1.0);
        assert_eq!(p.gamma_max(), 1.0);
        assert!(p.diagonal_at_zero());
        assert_eq!(Potential::zero(1).unwrap().gamma_min(), 0.0);
    }
}
