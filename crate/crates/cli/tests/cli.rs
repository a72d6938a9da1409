use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(dir: &Path, line: &str) -> (i32, String, String) {
    let mut args: Vec<String> = line.split_whitespace().map(String::from).collect();
    args.push("--out".into());
    args.push(dir.display().to_string());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = qmbvp::run_with(&args, None, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(dir: &Path, stem: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json"))).unwrap()).unwrap()
}

#[test]
fn check_on_the_oscillator() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(dir.path(), "check --system oscillator --a 3 --b 4");
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1);
    let r = report(dir.path(), "check");
    assert_eq!(r["monotonicity"]["verdict"], "pass");
    let conds = r["conditions"].as_array().unwrap();
    assert_eq!(conds.len(), 2);
    assert!(conds.iter().all(|c| c["verdict"] == "fail"));
    assert_eq!(conds[0]["envelope_ok"], false);
}

#[test]
fn check_certifies_a_supplied_pair() {
    let dir = tempfile::tempdir().unwrap();
    let (code, ..) = run(dir.path(), "solve-minimal --system bounded_coupled");
    assert_eq!(code, 0);
    let pair = dir.path().join("solve_minimal_initial.csv");
    let line = format!("check --system bounded_coupled --pair {}", pair.display());
    let (code, out, _) = run(dir.path(), &line);
    assert_eq!(code, 0);
    assert!(out.contains("supersolution pass"), "{out}");
    assert_eq!(report(dir.path(), "check")["supersolution"]["verdict"], "pass");
}

#[test]
fn solve_minimal_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, ..) = run(dir.path(), "solve-minimal --system bounded_coupled --dim 2 --coupling 0.5");
    assert_eq!(code, 0);
    let r = report(dir.path(), "solve_minimal");
    assert_eq!(r["result"]["status"], "converged");
    assert!(r["result"]["m_star"].is_number());
    let csv = fs::read_to_string(dir.path().join("solve_minimal_solution.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2,y1,y2\n"));

    let (code, ..) = run(dir.path(), "solve-minimal --system oscillator --a 3 --b 4");
    assert_eq!(code, 3);
    assert_eq!(report(dir.path(), "solve_minimal")["error"]["kind"], "unbounded_below");

    let (code, ..) = run(dir.path(), "solve-minimal --system mfg_equilibrium --N 400 --tol 1e-9 --max-iters 5");
    assert_eq!(code, 1);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for line in [
        "frobnicate",
        "check",
        "check --system nowhere",
        "check --system oscillator --N one",
        "shoot --system oscillator --colour blue",
        "mfg-phi --convention C",
        "mfg-phi --kappa -1",
        "mfg-supersolution --variant other",
        "solve-minimal --system bounded_coupled --start family",
    ] {
        let (code, _, err) = run(dir.path(), line);
        assert_eq!(code, 2, "{line}: {err}");
        assert!(err.starts_with("error:"), "{line}");
    }
}

#[test]
fn shoot_writes_numbered_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let (code, ..) = run(dir.path(), "shoot --system oscillator --a 3 --b 4 --guesses -2,0,1,3.9,10 --N 4000");
    assert_eq!(code, 0);
    let r = report(dir.path(), "shoot");
    assert_eq!(r["count"], 1);
    let y0 = r["y0_found"][0][0].as_f64().unwrap();
    assert!((y0 - 4.0).abs() < 1e-6);
    assert!(dir.path().join("shoot_solution_1.csv").exists());
}

#[test]
fn oscillator_demo_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, ..) = run(dir.path(), "demo-oscillator --a 3 --b 4 --scale 1");
    assert_eq!(code, 0);
    let r = report(dir.path(), "demo_oscillator");
    assert!((r["radius"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert!((r["min_x_full_horizon"].as_f64().unwrap() + 5.0).abs() < 1e-4);
    assert!((r["min_x_half_period"].as_f64().unwrap() + 3.0).abs() < 1e-4);
    assert!(r["witness"]["t"].is_number());
}

#[test]
fn mfg_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (code, ..) = run(dir.path(), "mfg-admissibility --T 7");
    assert_eq!(code, 0);
    let r = report(dir.path(), "mfg_admissibility");
    assert_eq!(r["admissibility"]["verdict"], "fail");
    assert_eq!(r["admissibility"]["kappa"]["pass"], true);

    let (code, ..) = run(dir.path(), "mfg-phi --convention A --b0 0 --N 400");
    assert_eq!(code, 0);
    assert!(report(dir.path(), "mfg_phi")["phi_sup_norm"].as_f64().unwrap() < 1e-12);

    let (code, ..) = run(dir.path(), "mfg-fixed-point --convention A --N 500");
    assert_eq!(code, 0);
    let trace = fs::read_to_string(dir.path().join("mfg_fixed_point_trace.csv")).unwrap();
    assert!(trace.starts_with("iterate,sup_norm,step_distance,distance_to_limit\n"));

    let (code, ..) = run(dir.path(), "mfg-spectrum --convention A --N 1000");
    assert_eq!(code, 0);
    let r = report(dir.path(), "mfg_spectrum");
    assert_eq!(r["bound_satisfied"], true);
    assert_eq!(r["analytic_lambdas"].as_array().unwrap().len(), 10);

    let (code, ..) = run(dir.path(), "mfg-supersolution --variant as_printed");
    assert_eq!(code, 0);
    assert_eq!(report(dir.path(), "mfg_supersolution")["continuity"]["continuous"], false);

    let (code, ..) = run(dir.path(), "mfg-equilibria --convention A --N 1000");
    assert_eq!(code, 0);
    assert_eq!(report(dir.path(), "mfg_equilibria")["count"], 1);
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "system = oscillator\na = 1\nb = 2\nN = 300\n").unwrap();
    let line = format!("shoot --config {} --b 5", conf.display());
    let (code, ..) = run(dir.path(), &line);
    assert_eq!(code, 0);
    let r = report(dir.path(), "shoot");
    assert_eq!(r["settings"]["b"], "5");
    assert_eq!(r["settings"]["N"], "300");
    assert!((r["y0_found"][0][0].as_f64().unwrap() - 5.0).abs() < 1e-6);
}

#[test]
fn binary_honours_the_output_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from-env");
    let flag_dir = dir.path().join("from-flag");
    let bin = env!("CARGO_BIN_EXE_qmbvp");
    let out = Command::new(bin)
        .args(["mfg-admissibility"])
        .env("QMBVP_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join("mfg_admissibility.json").exists());
    let out = Command::new(bin)
        .args(["mfg-admissibility", "--out"])
        .arg(&flag_dir)
        .env("QMBVP_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(flag_dir.join("mfg_admissibility.json").exists());
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("solve-minimal"));
}

#[test]
fn identical_runs_write_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for line in ["check --system bounded_coupled --dim 2 --coupling 0.5 --seed 9", "mfg-supersolution --N 500"] {
        assert_eq!(run(a.path(), line).0, 0);
        assert_eq!(run(b.path(), line).0, 0);
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}
