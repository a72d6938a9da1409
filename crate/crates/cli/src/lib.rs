//! File formats and the command-line front end for `qmbvp-core`.
//!
//! Each command writes `<command>.json` and any trajectory CSVs into the
//! output directory, then prints a one-line summary.

pub mod commands;
pub mod config;
pub mod csv;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::Path;

pub use commands::{execute, Exit, Failure, Outcome};
pub use config::{parse_args, Command, Invocation, RunConfig, Settings};

/// Writes the report and trajectory files of `outcome` into `dir`.
pub fn write_outcome(dir: &Path, command: Command, outcome: &Outcome) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut json = serde_json::to_string_pretty(&outcome.report).expect("reports are plain JSON values");
    json.push('\n');
    fs::write(dir.join(format!("{}.json", command.stem())), json)?;
    for (name, contents) in &outcome.files {
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

/// Runs one invocation; `env_out` stands in for the output-directory
/// environment variable.
pub fn run_with<W: Write, E: Write>(args: &[String], env_out: Option<&str>, stdout: &mut W, stderr: &mut E) -> i32 {
    let cfg = match parse_args(args, env_out) {
        Ok(Invocation::Help) => {
            let _ = write!(stdout, "{}", config::USAGE);
            return Exit::Ok.code();
        }
        Ok(Invocation::Run(c)) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}\n\n{}", config::USAGE);
            return Exit::BadConfig.code();
        }
    };
    match execute(&cfg) {
        Ok(outcome) => {
            if let Err(e) = write_outcome(&cfg.out, cfg.command, &outcome) {
                let _ = writeln!(stderr, "error: cannot write to {}: {e}", cfg.out.display());
                return Exit::BadConfig.code();
            }
            let _ = writeln!(stdout, "{}", outcome.summary);
            outcome.exit.code()
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.exit.code()
        }
    }
}

/// Entry point used by the binary.
pub fn run(args: &[String]) -> i32 {
    let env_out = std::env::var(config::OUT_ENV).ok();
    run_with(args, env_out.as_deref(), &mut std::io::stdout(), &mut std::io::stderr())
}
