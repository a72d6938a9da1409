//! The linear oscillator `ẋ = y`, `ẏ = −x` with `x(0) = a`, `y(T) = b`:
//! closed-form solutions, an unbounded family of supersolutions, and a
//! witness that supersolutions need not dominate the solution.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::order::{Grid, PathPair, VecPath};

/// `x(t) = a cos t + c sin t`, `y = ẋ`, with `c` fixed by `y(T) = b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub a: f64,
    pub c: f64,
}

impl ClosedForm {
    pub fn new(a: f64, b: f64, horizon: f64) -> Result<Self> {
        let cos_t = libm::cos(horizon);
        if cos_t.abs() < 1e-12 {
            return Err(Error::InvalidArgument("horizon is resonant for the oscillator"));
        }
        Ok(Self {
            a,
            c: (b + a * libm::sin(horizon)) / cos_t,
        })
    }

    /// Amplitude `r` of `x = r sin(θ + t)`.
    pub fn amplitude(&self) -> f64 {
        libm::hypot(self.a, self.c)
    }

    /// Phase `θ` of `x = r sin(θ + t)`.
    pub fn phase(&self) -> f64 {
        libm::atan2(self.a, self.c)
    }

    pub fn x(&self, t: f64) -> f64 {
        self.a * libm::cos(t) + self.c * libm::sin(t)
    }

    pub fn y(&self, t: f64) -> f64 {
        -self.a * libm::sin(t) + self.c * libm::cos(t)
    }
}

/// The closed-form solution for data `(a, b)` sampled on `grid`.
pub fn solution_path(a: f64, b: f64, grid: &Grid) -> Result<PathPair> {
    let cf = ClosedForm::new(a, b, grid.horizon())?;
    PathPair::new(
        VecPath::from_fn(*grid, 1, |t, o| o[0] = cf.x(t))?,
        VecPath::from_fn(*grid, 1, |t, o| o[0] = cf.y(t))?,
    )
}

/// Boundary data of the family member with parameter `s ≥ 1`:
/// `(a + (s−1)|a|, b + (s−1)|b|)`, which dominates `(a, b)`.
pub fn family_data(a: f64, b: f64, s: f64) -> (f64, f64) {
    (a + (s - 1.0) * a.abs(), b + (s - 1.0) * b.abs())
}

/// A node where the supersolution lies strictly below the solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonWitness {
    pub node: usize,
    pub t: f64,
    /// 0 for `x`, 1 for `y`.
    pub component: usize,
    pub supersolution: f64,
    pub solution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorDemo {
    pub a: f64,
    pub b: f64,
    pub horizon: f64,
    pub radius: f64,
    pub phase: f64,
    /// Data of the reported supersolution `(a*, b*)`.
    pub a_star: f64,
    pub b_star: f64,
    pub radius_star: f64,
    /// Minimum of the supersolution's `x` over grid nodes in `[0, π]`.
    pub min_x_half_period: f64,
    /// Minimum over the whole horizon.
    pub min_x_full: f64,
    /// Family member used for the comparison witness.
    pub witness_scale: f64,
    pub witness: Option<ComparisonWitness>,
    /// `(s, min_t x*_s)` for growing members of the family.
    pub family_minima: Vec<(f64, f64)>,
}

/// Builds the demo on `[0, 2π]`. `scale` selects the reported member
/// `(a*, b*)`; the witness uses `scale` when it exceeds 1 and `2` otherwise,
/// since the member with `s = 1` is the solution itself.
pub fn demo(a: f64, b: f64, scale: f64, intervals: usize) -> Result<OscillatorDemo> {
    if !(scale >= 1.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument("family scale must be at least 1"));
    }
    let horizon = core::f64::consts::TAU;
    let grid = Grid::new(horizon, intervals)?;
    let base = ClosedForm::new(a, b, horizon)?;
    let (a_star, b_star) = family_data(a, b, scale);
    let star = ClosedForm::new(a_star, b_star, horizon)?;
    let star_path = solution_path(a_star, b_star, &grid)?;
    let mut min_half = f64::INFINITY;
    for (k, t) in grid.nodes().enumerate() {
        if t <= core::f64::consts::PI + 1e-12 {
            min_half = min_half.min(star_path.x.at(k)[0]);
        }
    }
    let min_full = star_path.x.min_value();

    let witness_scale = if scale > 1.0 { scale } else { 2.0 };
    let (wa, wb) = family_data(a, b, witness_scale);
    let sup = solution_path(wa, wb, &grid)?;
    let sol = solution_path(a, b, &grid)?;
    let witness = find_witness(&sup, &sol, &grid);

    let family_minima = [1.0, 2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&s| {
            let (fa, fb) = family_data(a, b, s);
            let r = ClosedForm::new(fa, fb, horizon).map(|c| -c.amplitude());
            (s, r.unwrap_or(f64::NAN))
        })
        .collect();

    Ok(OscillatorDemo {
        a,
        b,
        horizon,
        radius: base.amplitude(),
        phase: base.phase(),
        a_star,
        b_star,
        radius_star: star.amplitude(),
        min_x_half_period: min_half,
        min_x_full: min_full,
        witness_scale,
        witness,
        family_minima,
    })
}

fn find_witness(sup: &PathPair, sol: &PathPair, grid: &Grid) -> Option<ComparisonWitness> {
    let mut best: Option<ComparisonWitness> = None;
    for k in 0..grid.len() {
        for (c, (u, v)) in [(sup.x.at(k)[0], sol.x.at(k)[0]), (sup.y.at(k)[0], sol.y.at(k)[0])]
            .into_iter()
            .enumerate()
        {
            let gap = v - u;
            if gap > 0.0 && best.is_none_or(|b| gap > b.solution - b.supersolution) {
                best = Some(ComparisonWitness {
                    node: k,
                    t: grid.node(k),
                    component: c,
                    supersolution: u,
                    solution: v,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{PI, TAU};

    #[test]
    fn closed_form_matches_polar_form() {
        let cf = ClosedForm::new(3.0, 4.0, TAU).unwrap();
        assert!((cf.amplitude() - 5.0).abs() < 1e-12);
        let theta = libm::asin(0.6);
        for t in [0.0, 0.4, 2.0, 5.5] {
            assert!((cf.x(t) - 5.0 * libm::sin(theta + t)).abs() < 1e-12);
            assert!((cf.y(t) - 5.0 * libm::cos(theta + t)).abs() < 1e-12);
        }
    }

    #[test]
    fn general_horizon_meets_boundary() {
        let cf = ClosedForm::new(1.0, -2.0, 1.3).unwrap();
        assert!((cf.x(0.0) - 1.0).abs() < 1e-14);
        assert!((cf.y(1.3) + 2.0).abs() < 1e-12);
        assert!(ClosedForm::new(1.0, 1.0, PI / 2.0).is_err());
    }

    #[test]
    fn demo_reports_minima_and_witness() {
        let d = demo(3.0, 4.0, 1.0, 4000).unwrap();
        assert!((d.min_x_full + 5.0).abs() < 1e-4);
        assert!((d.min_x_half_period + 3.0).abs() < 1e-4);
        let w = d.witness.unwrap();
        assert!(w.supersolution < w.solution);
        assert_eq!(d.witness_scale, 2.0);
        assert!(d.family_minima.windows(2).all(|p| p[1].1 < p[0].1));
    }
}
