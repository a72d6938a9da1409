//! JSON views of solver results. Non-finite numbers serialize as `null`.

use serde_json::{json, Value};

use qmbvp_core::mfg::{
    AdmissibilityReport, CandidateReport, EquilibriaReport, IterationTrace, MfgConfig, SpectrumReport, Variant,
};
use qmbvp_core::oscillator::OscillatorDemo;
use qmbvp_core::system::{Instance, Located, M1Reading, MCondition, Var};
use qmbvp_core::{
    Anchor, Condition, ConditionCertificate, Error, MinimalSolutionReport, MonotonicityReport, ResidualReport,
    SolveStatus, SupersolutionCertificate,
};

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

pub fn condition_label(c: Condition) -> &'static str {
    match c {
        Condition::I => "i",
        Condition::II => "ii",
    }
}

pub fn status(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxSweeps => "max_sweeps",
        SolveStatus::Stalled => "stalled",
    }
}

pub fn variant(v: Variant) -> &'static str {
    match v {
        Variant::AsPrinted => "as_printed",
        Variant::SignAdjusted => "sign_adjusted",
    }
}

fn located(l: &Located) -> Value {
    json!({ "value": l.value, "interval": l.node, "component": l.component })
}

pub fn monotonicity(r: &MonotonicityReport, reading: M1Reading) -> Value {
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| {
            let (block, idx) = match v.wrt {
                Var::X(k) => ("x", k),
                Var::Y(k) => ("y", k),
            };
            json!({
                "condition": match v.condition { MCondition::M1 => "M1", MCondition::M2 => "M2" },
                "row": v.row,
                "wrt": format!("{block}{}", idx + 1),
                "point": v.point,
                "slope": v.slope,
            })
        })
        .collect();
    json!({
        "verdict": verdict(r.pass),
        "m1_reading": match reading { M1Reading::AllJ => "all", M1Reading::OffDiagonal => "off-diagonal" },
        "slope_tests": r.slope_tests,
        "violation_count": r.violation_count,
        "worst_m1": r.worst_m1,
        "worst_m2": r.worst_m2,
        "violations": violations,
    })
}

fn instance(i: &Instance) -> Value {
    json!({
        "name": i.name,
        "datum": i.datum,
        "anchor": match i.anchor { Anchor::Start => "t=0", Anchor::End => "t=T" },
        "level": i.level,
        "solved": i.solved,
    })
}

pub fn certificate(c: &ConditionCertificate) -> Value {
    let ends = |p: &Option<qmbvp_core::VecPath>| p.as_ref().map(|v| json!({ "min": v.min_value(), "max": v.max_value() }));
    json!({
        "condition": condition_label(c.condition),
        "verdict": verdict(c.pass),
        "envelope": c.envelope.label,
        "envelope_ok": c.envelope_ok,
        "envelope_excess": c.envelope_excess,
        "envelope_witness": c.envelope_witness,
        "m_star": c.m_star,
        "gamma1": ends(&c.gamma1),
        "gamma2": ends(&c.gamma2),
        "eta1": ends(&c.eta1),
        "eta2": ends(&c.eta2),
        "instances_checked": c.instances.iter().map(instance).collect::<Vec<_>>(),
        "failure": c.failure,
    })
}

pub fn supersolution(c: &SupersolutionCertificate) -> Value {
    json!({
        "verdict": verdict(c.pass),
        "tol": c.tol,
        "boundary_gap_x": c.boundary_gap_x,
        "boundary_gap_y": c.boundary_gap_y,
        "worst_x": located(&c.worst_x),
        "worst_y": located(&c.worst_y),
    })
}

pub fn residuals(r: &ResidualReport) -> Value {
    json!({
        "max": r.max(),
        "interior": r.interior(),
        "boundary": r.boundary(),
        "worst_x": located(&r.worst_x),
        "worst_y": located(&r.worst_y),
    })
}

pub fn minimal(r: &MinimalSolutionReport) -> Value {
    json!({
        "status": status(r.status),
        "converged": r.converged(),
        "sweeps_used": r.sweeps_used,
        "final_residual": r.final_residual(),
        "residual_history": r.residual_history,
        "monotone_ok": r.monotone_ok,
        "worst_order_excess": r.worst_order_excess,
        "m_star": r.m_star,
        "solution_min": r.solution.min_value(),
        "solution_sup_norm": r.solution.sup_norm(),
    })
}

pub fn error(e: &Error) -> Value {
    let kind = match e {
        Error::Shape { .. } => "shape",
        Error::GridMismatch => "grid_mismatch",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::BlowUp { .. } => "blow_up",
        Error::NoConvergence { .. } => "no_convergence",
        Error::UnboundedBelow { .. } => "unbounded_below",
        Error::MonotonicityViolation { .. } => "monotonicity_violation",
        Error::LowerBoundViolation { .. } => "lower_bound_violation",
        Error::CertificateFailed(_) => "certificate_failed",
        Error::Precondition { .. } => "precondition",
        Error::PhiFailed { .. } => "phi_failed",
    };
    json!({ "kind": kind, "message": e.to_string() })
}

pub fn demo(d: &OscillatorDemo) -> Value {
    json!({
        "a": d.a,
        "b": d.b,
        "horizon": d.horizon,
        "radius": d.radius,
        "phase": d.phase,
        "a_star": d.a_star,
        "b_star": d.b_star,
        "radius_star": d.radius_star,
        "min_x_half_period": d.min_x_half_period,
        "min_x_full_horizon": d.min_x_full,
        "witness_scale": d.witness_scale,
        "witness": d.witness.map(|w| json!({
            "node": w.node,
            "t": w.t,
            "component": if w.component == 0 { "x" } else { "y" },
            "supersolution": w.supersolution,
            "solution": w.solution,
        })),
        "family_minima": d.family_minima.iter().map(|(s, m)| json!({ "scale": s, "min_x": m })).collect::<Vec<_>>(),
    })
}

fn mfg_head(cfg: &MfgConfig) -> Value {
    json!({
        "potential": cfg.potential.name(),
        "dim": cfg.potential.dim(),
        "kappa": cfg.kappa,
        "horizon": cfg.horizon,
        "intervals": cfg.intervals,
        "convention": cfg.convention.label(),
    })
}

fn admissibility_body(r: &AdmissibilityReport) -> Value {
    json!({
        "kappa": { "lhs": r.kappa, "rhs": r.hess_inf_norm, "pass": r.kappa_ok },
        "horizon": {
            "lhs": r.horizon_lhs,
            "rhs": r.horizon_rhs,
            "terms": r.horizon_terms,
            "threshold_T": r.horizon_threshold,
            "pass": r.horizon_ok,
        },
        "verdict": verdict(r.pass),
    })
}

pub fn admissibility(cfg: &MfgConfig, r: &AdmissibilityReport) -> Value {
    json!({ "config": mfg_head(cfg), "admissibility": admissibility_body(r) })
}

pub fn trace(cfg: &MfgConfig, t: &IterationTrace) -> Value {
    json!({
        "config": mfg_head(cfg),
        "converged": t.converged,
        "iterations": t.step_distances.len(),
        "step_distances": t.step_distances,
        "distances_to_limit": t.distances_to_limit,
        "empirical_ratio": t.empirical_ratio,
        "final_sup_norm": t.iterates.last().map(|b| b.sup_norm()),
        "failure": t.failure.as_ref().map(error),
    })
}

pub fn equilibria(cfg: &MfgConfig, r: &EquilibriaReport) -> Value {
    let n = cfg.intervals;
    json!({
        "config": mfg_head(cfg),
        "admissibility": admissibility_body(&r.admissibility),
        "guesses": r.guesses,
        "count": r.equilibria.len(),
        "equilibria": r.equilibria.iter().enumerate().map(|(k, e)| json!({
            "file": format!("mfg_equilibrium_{}.csv", k + 1),
            "q0": e.q0,
            "residual": e.residual,
            "sup_norm": e.pair.sup_norm(),
            "x_max": e.pair.x.max_value(),
            "x_T": e.pair.x.at(n),
            "from_shooting": e.from_shooting,
            "from_monotone": e.from_monotone,
        })).collect::<Vec<_>>(),
        "minimal": r.minimal.as_ref().map(|m| json!({
            "theta": m.theta,
            "sweeps_used": m.sweeps_used,
            "final_residual": m.final_residual,
            "monotone_ok": m.monotone_ok,
            "m_star": m.m_star,
            "x_T": m.solution.x.at(n),
        })),
    })
}

pub fn spectrum(cfg: &MfgConfig, r: &SpectrumReport) -> Value {
    json!({
        "config": mfg_head(cfg),
        "label": r.label,
        "equilibrium_norm": r.equilibrium_norm,
        "analytic_lambdas": r.analytic_lambdas,
        "analytic_dominant": r.analytic_dominant,
        "dominant_lambda_power": r.dominant_lambda_power,
        "power_iterations": r.power_iterations,
        "power_converged": r.power_converged,
        "bound": r.bound,
        "bound_satisfied": r.bound_satisfied,
        "stable": r.stable,
    })
}

pub fn candidate(cfg: &MfgConfig, r: &CandidateReport) -> Value {
    json!({
        "config": mfg_head(cfg),
        "variant": variant(r.variant),
        "theta": r.theta,
        "lambda": r.lambda,
        "e": r.e,
        "h": r.h,
        "continuity": {
            "breakpoint": r.continuity.breakpoint,
            "jump_x": r.continuity.jump_x,
            "jump_q": r.continuity.jump_q,
            "continuous": r.continuity.continuous,
        },
        "certificate": supersolution(&r.certificate),
        "x_min": r.pair.x.min_value(),
    })
}
