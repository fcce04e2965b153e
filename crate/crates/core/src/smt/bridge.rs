//! Runs an external SMT-LIB2 solver on a problem file.
//!
//! The solver is any executable that takes the problem path as its last
//! argument and prints `sat`/`unsat` followed by the model requested by
//! `(get-model)`. Anything other than a definite answer with a readable
//! model is a [`SolverError`], never an `unsat`.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::problem::Problem;
use super::sexp::{self, Sexp};

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "PAXP_SMT_SOLVER";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub executable: PathBuf,
    /// Arguments placed before the problem path.
    pub args: Vec<String>,
    pub time_limit: Duration,
}

impl SolverConfig {
    pub fn new(executable: impl Into<PathBuf>) -> Self {
        SolverConfig {
            executable: executable.into(),
            args: Vec::new(),
            time_limit: Duration::from_secs(60),
        }
    }

    /// Reads [`SOLVER_ENV`]; `None` when unset or empty.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(SOLVER_ENV)
            .filter(|v| !v.is_empty())
            .map(SolverConfig::new)
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = limit;
        self
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver executable {0:?} not found")]
    NotFound(PathBuf),
    #[error("could not run solver: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exceeded the time limit of {0:?}")]
    Timeout(Duration),
    #[error("solver answered unknown")]
    Unknown,
    #[error("solver reported an error: {0}")]
    Reported(String),
    #[error("unparseable solver output: {0}")]
    Unparseable(String),
}

/// A definite solver answer. `Sat` carries the value of every `u_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Vec<bool>),
    Unsat,
}

/// Writes the problem to a temporary file and runs the solver on it.
pub fn solve_external(problem: &Problem, config: &SolverConfig) -> Result<Verdict, SolverError> {
    let mut file = tempfile::Builder::new()
        .prefix("paxp-")
        .suffix(".smt2")
        .tempfile()?;
    file.write_all(problem.to_smtlib().as_bytes())?;
    file.flush()?;
    let output = run(config, file.path())?;
    parse_response(&output, problem.features)
}

fn run(config: &SolverConfig, path: &std::path::Path) -> Result<String, SolverError> {
    let mut child = Command::new(&config.executable)
        .args(&config.args)
        .arg(path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                SolverError::NotFound(config.executable.clone())
            }
            _ => SolverError::Io(e),
        })?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let deadline = Instant::now() + config.time_limit;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SolverError::Timeout(config.time_limit));
        }
        thread::sleep(Duration::from_millis(2));
    }
    let out = reader
        .join()
        .map_err(|_| SolverError::Unparseable("stdout reader panicked".into()))??;
    Ok(out)
}

/// Parses `sat`/`unsat` and, for `sat`, the boolean model of u_1..u_m.
///
/// Variables the model leaves out are unconstrained and read as universal.
pub fn parse_response(output: &str, features: usize) -> Result<Verdict, SolverError> {
    let items = sexp::parse_all(output).map_err(|e| SolverError::Unparseable(e.to_string()))?;
    let mut items = items.into_iter();
    let first = items
        .next()
        .ok_or_else(|| SolverError::Unparseable("empty output".into()))?;
    match first.atom() {
        Some("unsat") => return Ok(Verdict::Unsat),
        Some("unknown") => return Err(SolverError::Unknown),
        Some("sat") => {}
        _ => {
            if let Some([Sexp::Atom(head), rest @ ..]) = first.list() {
                if head == "error" {
                    let msg = rest
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>()
                        .join(" ");
                    return Err(SolverError::Reported(msg));
                }
            }
            return Err(SolverError::Unparseable(first.to_string()));
        }
    }
    let model = items
        .next()
        .ok_or_else(|| SolverError::Unparseable("sat without a model".into()))?;
    let entries = model
        .list()
        .ok_or_else(|| SolverError::Unparseable(model.to_string()))?;
    let mut universal = vec![true; features];
    for entry in entries {
        if entry.atom() == Some("model") {
            continue;
        }
        let parts = entry
            .list()
            .ok_or_else(|| SolverError::Unparseable(entry.to_string()))?;
        if let Some(Sexp::Atom(head)) = parts.first() {
            if head == "error" {
                return Err(SolverError::Reported(entry.to_string()));
            }
        }
        match parts {
            [Sexp::Atom(def), Sexp::Atom(name), Sexp::List(params), Sexp::Atom(sort), value]
                if def == "define-fun" && params.is_empty() =>
            {
                let Some(j) = name
                    .strip_prefix("u_")
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|j| (1..=features).contains(j))
                else {
                    continue;
                };
                if sort != "Bool" {
                    return Err(SolverError::Unparseable(entry.to_string()));
                }
                universal[j - 1] = match value.atom() {
                    Some("true") => true,
                    Some("false") => false,
                    _ => return Err(SolverError::Unparseable(entry.to_string())),
                };
            }
            _ => return Err(SolverError::Unparseable(entry.to_string())),
        }
    }
    Ok(Verdict::Sat(universal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_z3_style_models() {
        let out = "sat\n(\n  (define-fun u_3 () Bool\n    false)\n  (define-fun u_1 () Bool\n    true)\n)\n";
        assert_eq!(
            parse_response(out, 3).unwrap(),
            Verdict::Sat(vec![true, true, false])
        );
        let out = "sat\n(model (define-fun u_1 () Bool false) (define-fun eta_1 () Int 3))\n";
        assert_eq!(
            parse_response(out, 2).unwrap(),
            Verdict::Sat(vec![false, true])
        );
    }

    #[test]
    fn parses_unsat_and_failures() {
        assert_eq!(
            parse_response(
                "unsat\n(error \"line 9 column 10: model is not available\")\n",
                2
            )
            .unwrap(),
            Verdict::Unsat
        );
        assert!(matches!(
            parse_response("unknown\n", 2),
            Err(SolverError::Unknown)
        ));
        assert!(matches!(
            parse_response("", 2),
            Err(SolverError::Unparseable(_))
        ));
        assert!(matches!(
            parse_response("(error \"bad logic\")", 2),
            Err(SolverError::Reported(_))
        ));
        assert!(matches!(
            parse_response("sat\n", 2),
            Err(SolverError::Unparseable(_))
        ));
        assert!(matches!(
            parse_response("sat\n((define-fun u_1 () Bool 7))", 2),
            Err(SolverError::Unparseable(_))
        ));
    }

    #[test]
    fn missing_executable_is_an_error() {
        let problem =
            Problem::from_smtlib("(set-logic QF_LIA)(declare-fun u_1 () Bool)(assert u_1)")
                .unwrap();
        let cfg = SolverConfig::new("/nonexistent/solver-binary");
        assert!(matches!(
            solve_external(&problem, &cfg),
            Err(SolverError::NotFound(_))
        ));
    }
}
