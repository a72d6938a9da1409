//! Solvers for two-point boundary value problems of quasi-monotone
//! forward–backward ODE systems
//!
//! ```text
//!     ẋ = f(t, x, y),   x(0) = x̄,      x ∈ ℝᵐ
//!     ẏ = g(t, x, y),   y(T) = ȳ,      y ∈ ℝⁿ
//! ```
//!
//! The crate computes minimal solutions as limits of decreasing sequences of
//! supersolutions, certifies the envelope conditions that make the family of
//! supersolutions bounded below, cross-checks results by single shooting, and
//! applies the machinery to a mean-field game with a quadratic control cost.
//!
//! Everything here is pure computation over `alloc` containers; file formats
//! and the command-line front end live in the `qmbvp` crate.
#![no_std]
// Negated comparisons are used on purpose so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod ivp;
mod linalg;
pub mod mfg;
pub mod monotone;
pub mod order;
pub mod oscillator;
pub mod registry;
mod sampling;
pub mod shooting;
pub mod system;

pub use error::{Error, Result};
pub use ivp::{
    integrate_backward, integrate_forward, solve_scalar_cauchy, Anchor, FieldEval, IvpOptions,
};
pub use monotone::{
    initial_supersolution, solve_minimal, sweep, sweep_y_first, MinimalSolutionReport,
    SolveOptions, SolveStatus, Start, SweepOrder,
};
pub use order::{leq_path, pointwise_min, sup_distance, BoundaryData, Grid, PathPair, VecPath};
pub use shooting::{multi_start, shoot, ShootOptions, ShootResult};
pub use system::{
    certify_condition, check_quasi_monotone, is_supersolution, reduce_extremes, reduce_pair,
    residual, Condition, ConditionCertificate, Envelope, EnvelopeCheck, M1Reading,
    MonotonicityOptions, MonotonicityReport, ReducedFields, ResidualReport, SampleBox,
    ScalarBound, SupersolutionCertificate, SystemDef,
};
