//! Command-line and `key = value` file configuration.
//!
//! Every setting can be given as `--key value`, `--key=value`, or as a line
//! `key = value` in a file passed with `--config`. Flags win over the file.
//! The output directory falls back to `QMBVP_OUT` and then to `qmbvp-out`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

pub const DEFAULT_OUT: &str = "qmbvp-out";
pub const OUT_ENV: &str = "QMBVP_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    SolveMinimal,
    Shoot,
    DemoOscillator,
    MfgAdmissibility,
    MfgPhi,
    MfgFixedPoint,
    MfgEquilibria,
    MfgSpectrum,
    MfgSupersolution,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Check,
        Command::SolveMinimal,
        Command::Shoot,
        Command::DemoOscillator,
        Command::MfgAdmissibility,
        Command::MfgPhi,
        Command::MfgFixedPoint,
        Command::MfgEquilibria,
        Command::MfgSpectrum,
        Command::MfgSupersolution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::SolveMinimal => "solve-minimal",
            Command::Shoot => "shoot",
            Command::DemoOscillator => "demo-oscillator",
            Command::MfgAdmissibility => "mfg-admissibility",
            Command::MfgPhi => "mfg-phi",
            Command::MfgFixedPoint => "mfg-fixed-point",
            Command::MfgEquilibria => "mfg-equilibria",
            Command::MfgSpectrum => "mfg-spectrum",
            Command::MfgSupersolution => "mfg-supersolution",
        }
    }

    /// File stem used for the command's outputs.
    pub fn stem(self) -> String {
        self.name().replace('-', "_")
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Keys accepted on the command line and in config files.
pub const KEYS: &[&str] = &[
    "system",
    "N",
    "tol",
    "T",
    "kappa",
    "convention",
    "out",
    "seed",
    "a",
    "b",
    "scale",
    "dim",
    "coupling",
    "x0",
    "y0",
    "potential",
    "theta",
    "lambda",
    "variant",
    "guesses",
    "max-iters",
    "b0",
    "samples",
    "condition",
    "start",
    "m1-reading",
    "pair",
    "equilibrium",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// What the command line asked for.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Help,
    Run(RunConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub settings: Settings,
    pub out: PathBuf,
}

/// Resolved string settings with typed accessors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("cannot parse {key} = {v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated floats.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| ConfigError(format!("cannot parse {key} entry {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

fn check_key(key: &str) -> Result<(), ConfigError> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        err(format!("unknown setting {key:?}"))
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_file_contents(text: &str) -> Result<Settings, ConfigError> {
    let mut s = Settings::default();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("config line {} is not key = value", no + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        check_key(k)?;
        s.set(k, v);
    }
    Ok(s)
}

/// Resolves argv (without the program name) against an optional value of
/// the output-directory environment variable.
pub fn parse_args(args: &[String], env_out: Option<&str>) -> Result<Invocation, ConfigError> {
    let mut command = None;
    let mut flags = Settings::default();
    let mut config_file = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        if arg == "--help" || arg == "-h" || arg == "help" {
            return Ok(Invocation::Help);
        }
        if let Some(flag) = arg.strip_prefix("--") {
            let (key, value) = match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let Some(v) = it.next() else {
                        return err(format!("flag --{flag} needs a value"));
                    };
                    (flag.to_string(), v.clone())
                }
            };
            if key == "config" {
                config_file = Some(value);
                continue;
            }
            check_key(&key)?;
            flags.set(&key, &value);
        } else if command.is_none() {
            command = Some(Command::parse(arg).ok_or_else(|| ConfigError(format!("unknown command {arg:?}")))?);
        } else {
            return err(format!("unexpected argument {arg:?}"));
        }
    }
    let Some(command) = command else {
        return err("missing command");
    };
    let mut settings = match config_file {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| ConfigError(format!("cannot read {path}: {e}")))?;
            parse_file_contents(&text)?
        }
        None => Settings::default(),
    };
    for (k, v) in flags.iter() {
        settings.set(k, v);
    }
    let out = settings
        .raw("out")
        .map(str::to_string)
        .or_else(|| env_out.map(str::to_string))
        .unwrap_or_else(|| DEFAULT_OUT.to_string());
    Ok(Invocation::Run(RunConfig {
        command,
        settings,
        out: PathBuf::from(out),
    }))
}

pub const USAGE: &str = "\
usage: qmbvp <command> [--key value ...] [--config FILE]

commands:
  check              quasi-monotonicity and condition certificates
  solve-minimal      monotone iteration to the minimal solution
  shoot              multi-start single shooting
  demo-oscillator    unbounded supersolutions of the linear oscillator
  mfg-admissibility  parameter inequalities of the mean-field game
  mfg-phi            one evaluation of the best-response map
  mfg-fixed-point    fixed-point iteration of the best-response map
  mfg-equilibria     equilibrium search by shooting and monotone iteration
  mfg-spectrum       linear stability of an equilibrium
  mfg-supersolution  explicit negative supersolution candidate

common settings:
  --system NAME --N INTERVALS --tol TOL --T HORIZON --kappa K
  --convention A|B --out DIR --seed SEED

exit codes: 0 ok, 1 no convergence, 2 invalid configuration, 3 unbounded below
";

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn run_cfg(inv: Invocation) -> RunConfig {
        match inv {
            Invocation::Run(c) => c,
            Invocation::Help => panic!("expected a run"),
        }
    }

    #[test]
    fn flags_in_both_styles() {
        let c = run_cfg(parse_args(&args("check --system oscillator --a=3 --b 4"), None).unwrap());
        assert_eq!(c.command, Command::Check);
        assert_eq!(c.settings.raw("system"), Some("oscillator"));
        assert_eq!(c.settings.get::<f64>("a").unwrap(), Some(3.0));
        assert_eq!(c.settings.get::<f64>("b").unwrap(), Some(4.0));
        assert_eq!(c.out, PathBuf::from(DEFAULT_OUT));
    }

    #[test]
    fn out_precedence() {
        let c = run_cfg(parse_args(&args("shoot"), Some("/env")).unwrap());
        assert_eq!(c.out, PathBuf::from("/env"));
        let c = run_cfg(parse_args(&args("shoot --out /flag"), Some("/env")).unwrap());
        assert_eq!(c.out, PathBuf::from("/flag"));
    }

    #[test]
    fn file_is_overridden_by_flags() {
        let dir = std::env::temp_dir().join(format!("qmbvp-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        fs::write(&path, "# demo\nsystem = bounded_coupled\nN = 200\ntol=1e-7\n").unwrap();
        let line = format!("solve-minimal --config {} --N 400", path.display());
        let c = run_cfg(parse_args(&args(&line), None).unwrap());
        assert_eq!(c.settings.raw("system"), Some("bounded_coupled"));
        assert_eq!(c.settings.get::<usize>("N").unwrap(), Some(400));
        assert_eq!(c.settings.get::<f64>("tol").unwrap(), Some(1e-7));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_args(&args("launch"), None).is_err());
        assert!(parse_args(&args("check --colour red"), None).is_err());
        assert!(parse_args(&args("check --N"), None).is_err());
        assert!(parse_args(&args(""), None).is_err());
        assert!(parse_file_contents("N 3").is_err());
        let c = run_cfg(parse_args(&args("check --N x"), None).unwrap());
        assert!(c.settings.get::<usize>("N").is_err());
        assert_eq!(parse_args(&args("--help"), None).unwrap(), Invocation::Help);
    }

    #[test]
    fn lists() {
        let c = run_cfg(parse_args(&args("shoot --guesses -1,0,2.5"), None).unwrap());
        assert_eq!(c.settings.list("guesses").unwrap(), Some(vec![-1.0, 0.0, 2.5]));
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(Command::parse(c.name()), Some(c));
        }
    }
}
