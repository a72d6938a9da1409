use std::fs;

use serde_json::{json, Map, Value};

use qmbvp_core::mfg::{
    self, admissibility, candidate_supersolution, default_lambda, equilibria_with, fixed_point_trace, phi_warm,
    spectrum, Convention, MfgConfig, Potential, SpectrumOptions, Variant,
};
use qmbvp_core::oscillator::{self, family_data, solution_path};
use qmbvp_core::registry::{self, RegistryParams};
use qmbvp_core::system::M1Reading;
use qmbvp_core::{
    certify_condition, check_quasi_monotone, is_supersolution, multi_start, residual, solve_minimal, Condition,
    ConditionCertificate, EnvelopeCheck, Error, Grid, IvpOptions, MonotonicityOptions, PathPair, SampleBox,
    ShootOptions, SolveOptions, SolveStatus, Start, SystemDef, VecPath,
};

use crate::config::{Command, ConfigError, RunConfig, Settings};
use crate::csv::{pair_from_csv, pair_to_csv, path_to_csv, table_to_csv};
use crate::report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    NoConvergence = 1,
    BadConfig = 2,
    Unbounded = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Exit status for a solver error.
    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::UnboundedBelow { .. } | Error::BlowUp { .. } => Exit::Unbounded,
            Error::Shape { .. }
            | Error::GridMismatch
            | Error::InvalidArgument(_)
            | Error::CertificateFailed(_)
            | Error::Precondition { .. } => Exit::BadConfig,
            Error::NoConvergence { .. }
            | Error::MonotonicityViolation { .. }
            | Error::LowerBoundViolation { .. }
            | Error::PhiFailed { .. } => Exit::NoConvergence,
        }
    }
}

/// A failure before any report could be produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self {
            exit: Exit::BadConfig,
            message: e.0,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            exit: Exit::for_error(&e),
            message: e.to_string(),
        }
    }
}

fn bad_config<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        exit: Exit::BadConfig,
        message: msg.into(),
    })
}

/// Everything a command produced, before it is written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit: Exit,
    pub summary: String,
    pub report: Value,
    /// `(file name, contents)` written next to the JSON report.
    pub files: Vec<(String, String)>,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let s = &cfg.settings;
    let mut out = match cfg.command {
        Command::Check => check(s),
        Command::SolveMinimal => solve(s),
        Command::Shoot => shoot(s),
        Command::DemoOscillator => demo(s),
        Command::MfgAdmissibility => mfg_admissibility(s),
        Command::MfgPhi => mfg_phi(s),
        Command::MfgFixedPoint => mfg_fixed_point(s),
        Command::MfgEquilibria => mfg_equilibria(s),
        Command::MfgSpectrum => mfg_spectrum(s),
        Command::MfgSupersolution => mfg_supersolution(s),
    }?;
    let mut head = Map::new();
    head.insert("command".into(), json!(cfg.command.name()));
    head.insert("exit_code".into(), json!(out.exit.code()));
    // The output directory is left out so reports compare equal across directories.
    let settings = s.iter().filter(|(k, _)| *k != "out").map(|(k, v)| (k.to_string(), json!(v)));
    head.insert("settings".into(), Value::Object(settings.collect()));
    if let Value::Object(body) = std::mem::take(&mut out.report) {
        head.extend(body);
    }
    out.report = Value::Object(head);
    Ok(out)
}

fn convention(s: &Settings) -> Result<Convention, Failure> {
    match s.raw("convention").unwrap_or("B") {
        "A" | "a" => Ok(Convention::A),
        "B" | "b" => Ok(Convention::B),
        other => bad_config(format!("convention must be A or B, not {other:?}")),
    }
}

fn potential(s: &Settings) -> Result<Potential, Failure> {
    let dim = s.get_or("dim", 1usize)?;
    Ok(Potential::by_name(s.raw("potential").unwrap_or("v_sqrt"), dim)?)
}

fn registry_params(s: &Settings) -> Result<RegistryParams, Failure> {
    let d = RegistryParams::default();
    Ok(RegistryParams {
        a: s.get_or("a", d.a)?,
        b: s.get_or("b", d.b)?,
        dim: s.get_or("dim", d.dim)?,
        coupling: s.get_or("coupling", d.coupling)?,
        horizon: s.get("T")?,
        x0: s.list("x0")?,
        y0: s.list("y0")?,
        convention: convention(s)?,
        potential: if s.raw("system").is_some_and(|n| n.starts_with("mfg")) {
            potential(s)?
        } else {
            d.potential
        },
    })
}

fn system(s: &Settings) -> Result<(String, RegistryParams, SystemDef), Failure> {
    let Some(name) = s.raw("system") else {
        return bad_config(format!("--system is required (one of {})", registry::NAMES.join(", ")));
    };
    let p = registry_params(s)?;
    let sys = registry::by_name(name, &p)?;
    Ok((name.to_string(), p, sys))
}

fn grid_for(s: &Settings, horizon: f64, default_n: usize) -> Result<Grid, Failure> {
    Ok(Grid::new(horizon, s.get_or("N", default_n)?)?)
}

fn seed(s: &Settings) -> Result<u64, Failure> {
    Ok(s.get_or("seed", 0u64)?)
}

fn conditions(s: &Settings) -> Result<Vec<Condition>, Failure> {
    match s.raw("condition").unwrap_or("auto") {
        "i" | "I" | "1" => Ok(vec![Condition::I]),
        "ii" | "II" | "2" => Ok(vec![Condition::II]),
        "auto" | "both" => Ok(vec![Condition::I, Condition::II]),
        other => bad_config(format!("condition must be i, ii or auto, not {other:?}")),
    }
}

fn certify_all(
    s: &Settings,
    name: &str,
    p: &RegistryParams,
    sys: &SystemDef,
    grid: &Grid,
) -> Result<Vec<ConditionCertificate>, Failure> {
    let (env_i, env_ii) = registry::envelopes_for(name, p);
    let check = EnvelopeCheck {
        samples: s.get_or("samples", EnvelopeCheck::default().samples)?,
        seed: seed(s)?,
        ..EnvelopeCheck::default()
    };
    let mut out = Vec::new();
    for c in conditions(s)? {
        let env = match c {
            Condition::I => &env_i,
            Condition::II => &env_ii,
        };
        if let Some(env) = env {
            out.push(certify_condition(sys, c, env, grid, &check, &IvpOptions::default())?);
        }
    }
    Ok(out)
}

fn check(s: &Settings) -> Result<Outcome, Failure> {
    let (name, p, sys) = system(s)?;
    let reading = match s.raw("m1-reading").unwrap_or("all") {
        "all" => M1Reading::AllJ,
        "off-diagonal" => M1Reading::OffDiagonal,
        other => return bad_config(format!("m1-reading must be all or off-diagonal, not {other:?}")),
    };
    let opts = MonotonicityOptions {
        samples: s.get_or("samples", MonotonicityOptions::default().samples)?,
        seed: seed(s)?,
        reading,
        ..MonotonicityOptions::default()
    };
    let mono = check_quasi_monotone(&sys, &SampleBox::default(), &opts)?;
    let grid = grid_for(s, sys.horizon(), 1000)?;
    let certs = certify_all(s, &name, &p, &sys, &grid)?;
    let mut summary = format!(
        "check {name}: monotonicity {}",
        report::verdict(mono.pass)
    );
    for c in &certs {
        summary.push_str(&format!(
            ", condition ({}) {}",
            report::condition_label(c.condition),
            report::verdict(c.pass)
        ));
    }
    let mut body = json!({
        "system": name,
        "monotonicity": report::monotonicity(&mono, reading),
        "conditions": certs.iter().map(report::certificate).collect::<Vec<_>>(),
    });
    if let Some(path) = s.raw("pair") {
        let text = fs::read_to_string(path).map_err(|e| Failure {
            exit: Exit::BadConfig,
            message: format!("cannot read {path}: {e}"),
        })?;
        let pair = pair_from_csv(&text)?;
        let tol = s.get_or("tol", 1e-6)?;
        let cert = is_supersolution(&sys, &pair, tol)?;
        let res = residual(&sys, &pair)?;
        summary.push_str(&format!(", supersolution {}", report::verdict(cert.pass)));
        body["supersolution"] = report::supersolution(&cert);
        body["residuals"] = report::residuals(&res);
    }
    Ok(Outcome {
        exit: Exit::Ok,
        summary,
        report: body,
        files: Vec::new(),
    })
}

fn solve(s: &Settings) -> Result<Outcome, Failure> {
    let (name, p, sys) = system(s)?;
    let grid = grid_for(s, sys.horizon(), 1000)?;
    let opts = SolveOptions {
        tol: s.get_or("tol", SolveOptions::default().tol)?,
        max_sweeps: s.get_or("max-iters", SolveOptions::default().max_sweeps)?,
        ..SolveOptions::default()
    };
    let start_kind = s.raw("start").unwrap_or("auto").to_string();
    let mut certs = Vec::new();
    let mut start_label = start_kind.clone();
    let pair_start = |label: &str| -> Result<Option<PathPair>, Failure> {
        match label {
            "family" => {
                if name != "oscillator" {
                    return bad_config("--start family is only defined for the oscillator");
                }
                let (a, b) = family_data(p.a, p.b, s.get_or("scale", 2.0)?);
                Ok(Some(solution_path(a, b, &grid)?))
            }
            "auto" | "certificate" => Ok(None),
            path => {
                let text = fs::read_to_string(path).map_err(|e| Failure {
                    exit: Exit::BadConfig,
                    message: format!("cannot read {path}: {e}"),
                })?;
                Ok(Some(pair_from_csv(&text)?))
            }
        }
    };
    let mut explicit = pair_start(&start_kind)?;
    if explicit.is_none() {
        certs = certify_all(s, &name, &p, &sys, &grid)?;
        if !certs.iter().any(|c| c.pass) {
            if start_kind == "auto" && name == "oscillator" {
                explicit = pair_start("family")?;
                start_label = "family".into();
            } else {
                return bad_config(format!("no certificate passed for {name}; supply --start"));
            }
        }
    }
    let result = match &explicit {
        Some(pair) => solve_minimal(&sys, Start::Pair(pair.clone()), &opts),
        None => {
            let cert = certs.iter().find(|c| c.pass).expect("checked above");
            start_label = format!("certificate ({})", report::condition_label(cert.condition));
            solve_minimal(&sys, Start::Certificate(cert), &opts)
        }
    };
    let mut body = json!({
        "system": name,
        "start": start_label,
        "conditions": certs.iter().map(report::certificate).collect::<Vec<_>>(),
    });
    match result {
        Ok(rep) => {
            let exit = match rep.status {
                SolveStatus::Converged => Exit::Ok,
                _ => Exit::NoConvergence,
            };
            let summary = format!(
                "solve-minimal {name}: {} after {} sweeps, residual {:e}",
                report::status(rep.status),
                rep.sweeps_used,
                rep.final_residual()
            );
            body["result"] = report::minimal(&rep);
            Ok(Outcome {
                exit,
                summary,
                report: body,
                files: vec![
                    ("solve_minimal_solution.csv".into(), pair_to_csv(&rep.solution)),
                    ("solve_minimal_initial.csv".into(), pair_to_csv(&rep.initial_supersolution)),
                ],
            })
        }
        Err(e) => {
            let exit = Exit::for_error(&e);
            body["error"] = report::error(&e);
            let files = explicit
                .map(|p| vec![("solve_minimal_initial.csv".to_string(), pair_to_csv(&p))])
                .unwrap_or_default();
            Ok(Outcome {
                exit,
                summary: format!("solve-minimal {name}: {e}"),
                report: body,
                files,
            })
        }
    }
}

fn guesses(s: &Settings, default: &[f64]) -> Result<Vec<f64>, Failure> {
    let g = s.list("guesses")?.unwrap_or_else(|| default.to_vec());
    if g.is_empty() {
        return bad_config("need at least one guess");
    }
    Ok(g)
}

fn shoot(s: &Settings) -> Result<Outcome, Failure> {
    let (name, _, sys) = system(s)?;
    let grid = grid_for(s, sys.horizon(), 1000)?;
    let opts = ShootOptions {
        tol: s.get_or("tol", ShootOptions::default().tol)?,
        max_iters: s.get_or("max-iters", ShootOptions::default().max_iters)?,
        ..ShootOptions::default()
    };
    let g = guesses(s, &[-2.0, -1.0, 0.0, 1.0, 2.0])?;
    let starts: Vec<Vec<f64>> = g.iter().map(|&v| vec![v; sys.n()]).collect();
    let found = multi_start(&sys, &starts, &grid, &opts, 1e-6)?;
    let mut files = Vec::new();
    for (k, r) in found.iter().enumerate() {
        let sol = r.solution.as_ref().expect("multi_start keeps converged runs");
        files.push((format!("shoot_solution_{}.csv", k + 1), pair_to_csv(sol)));
    }
    let body = json!({
        "system": name,
        "guesses": g,
        "count": found.len(),
        "y0_found": found.iter().map(|r| r.y0.clone()).collect::<Vec<_>>(),
        "final_residual": found.iter().map(|r| r.final_residual).collect::<Vec<_>>(),
        "iterations": found.iter().map(|r| r.iterations).collect::<Vec<_>>(),
        "files": files.iter().map(|f| f.0.clone()).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        exit: if found.is_empty() { Exit::NoConvergence } else { Exit::Ok },
        summary: format!("shoot {name}: {} distinct solutions from {} guesses", found.len(), g.len()),
        report: body,
        files,
    })
}

fn demo(s: &Settings) -> Result<Outcome, Failure> {
    let a = s.get_or("a", 3.0)?;
    let b = s.get_or("b", 4.0)?;
    let scale = s.get_or("scale", 1.0)?;
    let n = s.get_or("N", 4000usize)?;
    let d = oscillator::demo(a, b, scale, n)?;
    let grid = Grid::new(d.horizon, n)?;
    let star = solution_path(d.a_star, d.b_star, &grid)?;
    let sol = solution_path(a, b, &grid)?;
    let summary = format!(
        "demo-oscillator: r = {}, min x* on [0,pi] = {:.6}, on [0,2pi] = {:.6}, witness {}",
        d.radius,
        d.min_x_half_period,
        d.min_x_full,
        d.witness.map_or("none".to_string(), |w| format!("at t = {:.4}", w.t))
    );
    Ok(Outcome {
        exit: Exit::Ok,
        summary,
        report: report::demo(&d),
        files: vec![
            ("demo_oscillator_solution.csv".into(), pair_to_csv(&sol)),
            ("demo_oscillator_supersolution.csv".into(), pair_to_csv(&star)),
        ],
    })
}

fn mfg_config(s: &Settings) -> Result<MfgConfig, Failure> {
    let mut cfg = MfgConfig::new(
        potential(s)?,
        s.get_or("kappa", 1.0)?,
        s.get_or("T", 8.0)?,
        s.get_or("N", 2000usize)?,
        convention(s)?,
    )?;
    if let Some(t) = s.get("tol")? {
        cfg.residual_tol = t;
    }
    Ok(cfg)
}

fn constant_barycenter(s: &Settings, cfg: &MfgConfig) -> Result<VecPath, Failure> {
    let b0 = s.list("b0")?.unwrap_or_else(|| vec![0.01]);
    let d = cfg.potential.dim();
    let v = match b0.len() {
        1 => vec![b0[0]; d],
        l if l == d => b0,
        l => return bad_config(format!("b0 has {l} entries, expected 1 or {d}")),
    };
    Ok(VecPath::constant(cfg.grid(), &v)?)
}

fn mfg_admissibility(s: &Settings) -> Result<Outcome, Failure> {
    let cfg = mfg_config(s)?;
    let r = admissibility(&cfg);
    Ok(Outcome {
        exit: Exit::Ok,
        summary: format!(
            "mfg-admissibility: kappa {}, horizon {} (threshold T = {:.4}), overall {}",
            report::verdict(r.kappa_ok),
            report::verdict(r.horizon_ok),
            r.horizon_threshold,
            report::verdict(r.pass)
        ),
        report: report::admissibility(&cfg, &r),
        files: Vec::new(),
    })
}

fn mfg_phi(s: &Settings) -> Result<Outcome, Failure> {
    let cfg = mfg_config(s)?;
    let b = constant_barycenter(s, &cfg)?;
    let out = phi_warm(&cfg, &b, &vec![0.0; cfg.potential.dim()])?;
    Ok(Outcome {
        exit: Exit::Ok,
        summary: format!(
            "mfg-phi: sup |b| = {:e}, sup |phi(b)| = {:e}",
            b.sup_norm(),
            out.x.sup_norm()
        ),
        report: json!({
            "convention": cfg.convention.label(),
            "b_sup_norm": b.sup_norm(),
            "phi_sup_norm": out.x.sup_norm(),
            "q0": out.q0,
            "shoot_residual": out.shoot_residual,
            "newton_iters": out.newton_iters,
        }),
        files: vec![("mfg_phi.csv".into(), path_to_csv(&out.x, "x"))],
    })
}

fn mfg_fixed_point(s: &Settings) -> Result<Outcome, Failure> {
    let cfg = mfg_config(s)?;
    let b0 = constant_barycenter(s, &cfg)?;
    let max_iters = s.get_or("max-iters", 200usize)?;
    let tol = s.get_or("tol", 1e-10)?;
    let trace = fixed_point_trace(&cfg, &b0, max_iters, tol)?;
    let rows: Vec<Vec<f64>> = trace
        .distances_to_limit
        .iter()
        .enumerate()
        .map(|(k, &dl)| {
            let step = trace.step_distances.get(k).copied().unwrap_or(f64::NAN);
            let norm = trace.iterates[k].sup_norm();
            vec![k as f64, norm, step, dl]
        })
        .collect();
    let exit = match (&trace.failure, trace.converged) {
        (Some(_), _) | (None, false) => Exit::NoConvergence,
        (None, true) => Exit::Ok,
    };
    Ok(Outcome {
        exit,
        summary: format!(
            "mfg-fixed-point: {} after {} iterations, empirical ratio {}",
            if trace.converged { "converged" } else { "not converged" },
            trace.step_distances.len(),
            trace.empirical_ratio.map_or("n/a".to_string(), |r| format!("{r:.6}"))
        ),
        report: report::trace(&cfg, &trace),
        files: vec![(
            "mfg_fixed_point_trace.csv".into(),
            table_to_csv(&["iterate", "sup_norm", "step_distance", "distance_to_limit"], &rows),
        )],
    })
}

fn mfg_equilibria(s: &Settings) -> Result<Outcome, Failure> {
    let cfg = mfg_config(s)?;
    let g = guesses(s, &mfg::default_guesses())?;
    let rep = equilibria_with(&cfg, &g)?;
    let files = rep
        .equilibria
        .iter()
        .enumerate()
        .map(|(k, e)| (format!("mfg_equilibrium_{}.csv", k + 1), pair_to_csv(&e.pair)))
        .collect();
    Ok(Outcome {
        exit: if rep.equilibria.is_empty() { Exit::NoConvergence } else { Exit::Ok },
        summary: format!(
            "mfg-equilibria (convention {}): {} distinct equilibria{}",
            cfg.convention.label(),
            rep.equilibria.len(),
            if rep.minimal.is_some() { ", minimal solution reached by monotone iteration" } else { "" }
        ),
        report: report::equilibria(&cfg, &rep),
        files,
    })
}

fn mfg_spectrum(s: &Settings) -> Result<Outcome, Failure> {
    let cfg = mfg_config(s)?;
    let grid = cfg.grid();
    let d = cfg.potential.dim();
    let which = s.raw("equilibrium").unwrap_or("zero");
    let eq = match which {
        "zero" => PathPair::new(VecPath::constant(grid, &vec![0.0; d])?, VecPath::constant(grid, &vec![0.0; d])?)?,
        "minimal" => {
            let rep = equilibria_with(&cfg, &mfg::default_guesses())?;
            match rep.minimal {
                Some(m) => m.solution,
                None => {
                    return Err(Failure {
                        exit: Exit::NoConvergence,
                        message: "no minimal equilibrium was reached".into(),
                    })
                }
            }
        }
        path => {
            let text = fs::read_to_string(path).map_err(|e| Failure {
                exit: Exit::BadConfig,
                message: format!("cannot read {path}: {e}"),
            })?;
            pair_from_csv(&text)?
        }
    };
    let opts = SpectrumOptions {
        seed: seed(s)?,
        max_iters: s.get_or("max-iters", SpectrumOptions::default().max_iters)?,
        ..SpectrumOptions::default()
    };
    let r = spectrum(&cfg, &eq, &opts)?;
    Ok(Outcome {
        exit: if r.power_converged { Exit::Ok } else { Exit::NoConvergence },
        summary: format!(
            "mfg-spectrum ({} equilibrium): dominant eigenvalue {:.6}, bound {:.6}, {}",
            r.label,
            r.dominant_lambda_power,
            r.bound,
            if r.stable { "stable" } else { "unstable" }
        ),
        report: report::spectrum(&cfg, &r),
        files: Vec::new(),
    })
}

fn mfg_supersolution(s: &Settings) -> Result<Outcome, Failure> {
    let cfg = mfg_config(s)?;
    let theta = s.get_or("theta", 0.05)?;
    let lambda = s.get_or("lambda", default_lambda(cfg.horizon))?;
    let variant = match s.raw("variant").unwrap_or("sign_adjusted") {
        "sign_adjusted" => Variant::SignAdjusted,
        "as_printed" => Variant::AsPrinted,
        other => return bad_config(format!("variant must be sign_adjusted or as_printed, not {other:?}")),
    };
    let r = candidate_supersolution(&cfg, theta, lambda, variant)?;
    Ok(Outcome {
        exit: Exit::Ok,
        summary: format!(
            "mfg-supersolution: {} candidate, continuity {}, certificate {}",
            report::variant(variant),
            report::verdict(r.continuity.continuous),
            report::verdict(r.certificate.pass)
        ),
        report: report::candidate(&cfg, &r),
        files: vec![("mfg_supersolution.csv".into(), pair_to_csv(&r.pair))],
    })
}
