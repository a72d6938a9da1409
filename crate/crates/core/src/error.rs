use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must agree in dimension or length do not.
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// Paths live on different time grids.
    GridMismatch,
    InvalidArgument(&'static str),
    /// A state entry left the finite region `|v| <= blowup_threshold`.
    BlowUp { node: usize, time: f64 },
    NoConvergence { iterations: usize, residual: f64 },
    /// The monotone iteration kept descending past the divergence guard.
    UnboundedBelow { sweep: usize, value: f64 },
    /// A sweep produced an iterate that is not below its input.
    MonotonicityViolation {
        sweep: usize,
        node: usize,
        component: usize,
        excess: f64,
    },
    /// An iterate dropped below the certified lower bound.
    LowerBoundViolation { sweep: usize, value: f64, bound: f64 },
    /// A certificate required by the operation did not pass.
    CertificateFailed(&'static str),
    Precondition { what: &'static str, value: f64 },
    /// The fixed-point map could not be evaluated at the given iterate.
    PhiFailed { iterate: usize, residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape {
                what,
                expected,
                found,
            } => write!(f, "shape mismatch in {what}: expected {expected}, found {found}"),
            Error::GridMismatch => write!(f, "paths are defined on different grids"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::BlowUp { node, time } => {
                write!(f, "solution blew up at node {node} (t = {time})")
            }
            Error::NoConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:e})"
            ),
            Error::UnboundedBelow { sweep, value } => write!(
                f,
                "iterates are unbounded below: value {value:e} after sweep {sweep}"
            ),
            Error::MonotonicityViolation {
                sweep,
                node,
                component,
                excess,
            } => write!(
                f,
                "sweep {sweep} increased component {component} at node {node} by {excess:e}"
            ),
            Error::LowerBoundViolation {
                sweep,
                value,
                bound,
            } => write!(
                f,
                "sweep {sweep} produced value {value} below certified bound {bound}"
            ),
            Error::CertificateFailed(what) => write!(f, "certificate failed: {what}"),
            Error::Precondition { what, value } => {
                write!(f, "precondition violated: {what} (value {value:e})")
            }
            Error::PhiFailed { iterate, residual } => write!(
                f,
                "fixed-point map failed at iterate {iterate} (shooting residual {residual:e})"
            ),
        }
    }
}
