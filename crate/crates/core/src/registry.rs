//! Built-in systems and their envelopes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::mfg::{Convention, Potential, Variables};
use crate::order::BoundaryData;
use crate::system::{Envelope, SystemDef};

/// `ẋ = 0`, `ẏ = 0`.
pub fn still(m: usize, n: usize, horizon: f64, boundary: BoundaryData) -> Result<SystemDef> {
    SystemDef::new(
        "still",
        m,
        n,
        horizon,
        boundary,
        |_, _, _, o| o.fill(0.0),
        |_, _, _, o| o.fill(0.0),
    )
}

/// `ẋ = y`, `ẏ = −x` on `[0, 2π]` with `x(0) = a`, `y(2π) = b`.
pub fn oscillator(a: f64, b: f64) -> Result<SystemDef> {
    oscillator_on(a, b, TAU)
}

pub fn oscillator_on(a: f64, b: f64, horizon: f64) -> Result<SystemDef> {
    SystemDef::new(
        "oscillator",
        1,
        1,
        horizon,
        BoundaryData::new(vec![a], vec![b])?,
        |_, _, y, o| o[0] = y[0],
        |_, x, _, o| o[0] = -x[0],
    )
}

/// Bounded coupled system in dimension `d = m = n` with coupling `c ≥ 0`:
///
/// ```text
///   f_i = tanh y_i − x_i + c Σ_{k≠i} tanh x_k
///   g_j = −tanh x_j − y_j − c Σ_{k≠j} tanh y_k
/// ```
pub fn bounded_coupled(dim: usize, coupling: f64, horizon: f64, boundary: BoundaryData) -> Result<SystemDef> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive"));
    }
    if !(coupling >= 0.0 && coupling.is_finite()) {
        return Err(Error::InvalidArgument("coupling must be finite and nonnegative"));
    }
    let f = move |_: f64, x: &[f64], y: &[f64], o: &mut [f64]| {
        let total: f64 = x.iter().map(|&v| libm::tanh(v)).sum();
        for i in 0..dim {
            let tx = libm::tanh(x[i]);
            o[i] = libm::tanh(y[i]) - x[i] + coupling * (total - tx);
        }
    };
    let g = move |_: f64, x: &[f64], y: &[f64], o: &mut [f64]| {
        let total: f64 = y.iter().map(|&v| libm::tanh(v)).sum();
        for j in 0..dim {
            let ty = libm::tanh(y[j]);
            o[j] = -libm::tanh(x[j]) - y[j] - coupling * (total - ty);
        }
    };
    let name = if dim == 1 {
        alloc::string::String::from("bounded_coupled")
    } else {
        format!("bounded_coupled[{dim}]")
    };
    SystemDef::new(name, dim, dim, horizon, boundary, f, g)
}

/// `bounded_coupled` on `[0, 1]` with `x̄ = 1`, `ȳ = −0.5` in every entry.
pub fn bounded_coupled_default(dim: usize, coupling: f64) -> Result<SystemDef> {
    bounded_coupled(
        dim,
        coupling,
        1.0,
        BoundaryData::new(vec![1.0; dim], vec![-0.5; dim])?,
    )
}

/// `α₁(t,s) = −1 − c(d−1) − s`, `α₂(t,s) = 1 + c(d−1) − s`.
pub fn bounded_coupled_alpha(dim: usize, coupling: f64) -> Envelope {
    let w = 1.0 + coupling * dim.saturating_sub(1) as f64;
    Envelope::new(format!("alpha = ±{w} - s"), move |_, s| -w - s, move |_, s| w - s)
}

/// `β₁(t,τ) = −1 − c(d−1) − τ`, `β₂(t,τ) = 1 + c(d−1) − τ`.
pub fn bounded_coupled_beta(dim: usize, coupling: f64) -> Envelope {
    let w = 1.0 + coupling * dim.saturating_sub(1) as f64;
    Envelope::new(format!("beta = ±{w} - tau"), move |_, t| -w - t, move |_, t| w - t)
}

/// Hamiltonian system `ẋ = D_p H(x,p)`, `ṗ = −D_x H(x,p)` in dimension `d`.
/// `dp_h` and `dx_h` write the two gradients.
pub fn hamiltonian<P, X>(dim: usize, horizon: f64, boundary: BoundaryData, dp_h: P, dx_h: X) -> Result<SystemDef>
where
    P: Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    X: Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
{
    SystemDef::new(
        "hamiltonian",
        dim,
        dim,
        horizon,
        boundary,
        move |_, x, p, o| dp_h(x, p, o),
        move |_, x, p, o| {
            dx_h(x, p, o);
            for v in o.iter_mut() {
                *v = -*v;
            }
        },
    )
}

/// `H(x,p) = Σ √(1+p_i²) + ln cosh(Σ x_i)`, whose second derivatives have
/// the required sign pattern and whose fields are bounded by 1.
pub fn hamiltonian_example(dim: usize, horizon: f64, boundary: BoundaryData) -> Result<SystemDef> {
    hamiltonian(
        dim,
        horizon,
        boundary,
        |_, p, o| {
            for (oi, &pi) in o.iter_mut().zip(p) {
                *oi = pi / libm::sqrt(1.0 + pi * pi);
            }
        },
        |x, _, o| {
            let s: f64 = x.iter().sum();
            o.fill(libm::tanh(s));
        },
    )
}

/// Constant envelope `±1` usable for either condition on the example.
pub fn unit_envelope() -> Envelope {
    Envelope::new("±1", |_, _| -1.0, |_, _| 1.0)
}

/// The equilibrium two-point problem of the mean-field game with
/// `x(0) = 0` and a vanishing costate at `T`.
pub fn mfg_equilibrium(
    potential: &Potential,
    convention: Convention,
    variables: Variables,
    horizon: f64,
) -> Result<SystemDef> {
    crate::mfg::equilibrium_system(potential, convention, variables, horizon)
}

/// `β = ∓‖DV‖∞`, valid for the transformed equilibrium system.
pub fn mfg_beta(potential: &Potential) -> Envelope {
    let g = potential.grad_inf_norm();
    Envelope::new(format!("beta = ±{g}"), move |_, _| -g, move |_, _| g)
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 6] = [
    "still",
    "oscillator",
    "bounded_coupled",
    "hamiltonian",
    "mfg_equilibrium",
    "mfg_equilibrium_raw",
];

/// Parameters understood by [`by_name`]; unset entries take defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistryParams {
    pub a: f64,
    pub b: f64,
    pub dim: usize,
    pub coupling: f64,
    pub horizon: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
    pub convention: Convention,
    pub potential: Potential,
}

impl Default for RegistryParams {
    fn default() -> Self {
        Self {
            a: 3.0,
            b: 4.0,
            dim: 1,
            coupling: 0.0,
            horizon: None,
            x0: None,
            y0: None,
            convention: Convention::B,
            potential: Potential::v_sqrt(),
        }
    }
}

fn fill(v: &Option<Vec<f64>>, dim: usize, default: f64) -> Result<Vec<f64>> {
    match v {
        None => Ok(vec![default; dim]),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; dim]),
        Some(v) if v.len() == dim => Ok(v.clone()),
        Some(v) => Err(Error::Shape {
            what: "boundary vector",
            expected: dim,
            found: v.len(),
        }),
    }
}

/// Looks up a built-in system and, when one exists, its natural envelope
/// and the condition it is meant for.
pub fn by_name(name: &str, p: &RegistryParams) -> Result<SystemDef> {
    match name {
        "still" => still(
            p.dim,
            p.dim,
            p.horizon.unwrap_or(1.0),
            BoundaryData::new(fill(&p.x0, p.dim, 0.0)?, fill(&p.y0, p.dim, 0.0)?)?,
        ),
        "oscillator" => oscillator_on(p.a, p.b, p.horizon.unwrap_or(TAU)),
        "bounded_coupled" => bounded_coupled(
            p.dim,
            p.coupling,
            p.horizon.unwrap_or(1.0),
            BoundaryData::new(fill(&p.x0, p.dim, 1.0)?, fill(&p.y0, p.dim, -0.5)?)?,
        ),
        "hamiltonian" => hamiltonian_example(
            p.dim,
            p.horizon.unwrap_or(1.0),
            BoundaryData::new(fill(&p.x0, p.dim, 0.0)?, fill(&p.y0, p.dim, 0.0)?)?,
        ),
        "mfg_equilibrium" => mfg_equilibrium(
            &p.potential,
            p.convention,
            Variables::Transformed,
            p.horizon.unwrap_or(8.0),
        ),
        "mfg_equilibrium_raw" => mfg_equilibrium(&p.potential, p.convention, Variables::Raw, p.horizon.unwrap_or(8.0)),
        _ => Err(Error::InvalidArgument("unknown system name")),
    }
}

/// Envelopes for conditions (i) and (ii) where the registry knows them.
pub fn envelopes_for(name: &str, p: &RegistryParams) -> (Option<Envelope>, Option<Envelope>) {
    match name {
        "still" => {
            let z = Envelope::new("zero", |_, _| 0.0, |_, _| 0.0);
            (Some(z.clone()), Some(z))
        }
        "oscillator" => (
            Some(Envelope::new("alpha = ±1 - s", |_, s| -1.0 - s, |_, s| 1.0 - s)),
            Some(Envelope::new("beta = ±1 - tau", |_, t| -1.0 - t, |_, t| 1.0 - t)),
        ),
        "bounded_coupled" => (
            Some(bounded_coupled_alpha(p.dim, p.coupling)),
            Some(bounded_coupled_beta(p.dim, p.coupling)),
        ),
        "hamiltonian" => (Some(unit_envelope()), Some(unit_envelope())),
        "mfg_equilibrium" | "mfg_equilibrium_raw" => {
            let g = p.potential.grad_inf_norm();
            // f = q has no bound independent of τ, so only (ii) applies.
            (
                Some(Envelope::new("alpha = ±1", |_, _| -1.0, |_, _| 1.0)),
                Some(Envelope::new(format!("beta = ±{g}"), move |_, _| -g, move |_, _| g)),
            )
        }
        _ => (None, None),
    }
}
