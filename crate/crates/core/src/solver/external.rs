//! Adapter for external DIMACS solvers speaking the standard
//! `s SATISFIABLE` / `v ...` stdout protocol.

use std::io::Read;
use std::process::{Command, Stdio};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::sat_encoding::{to_dimacs, CnfFormula};

use super::{SolveBudget, SolveOutcome, SolveStatus};

/// Runs `command <dimacs-path>` through the shell and parses its verdict.
/// The process is killed when the budget runs out, yielding `Timeout`.
/// A reported model is verified against the formula before being surfaced.
pub fn solve_external(
    formula: &CnfFormula,
    command: &str,
    budget: SolveBudget,
) -> Result<SolveOutcome> {
    let start = Instant::now();
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("instance.cnf");
    std::fs::write(&path, to_dimacs(formula))?;

    let mut child = Command::new("sh")
        .arg("-c")
        .arg(format!("{command} {}", path.display()))
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::ExternalSolver(format!("failed to launch '{command}': {e}")))?;

    let deadline = budget.duration();
    let timed_out = loop {
        match child.try_wait().map_err(|e| Error::ExternalSolver(e.to_string()))? {
            Some(_) => break false,
            None if start.elapsed() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                break true;
            }
            None => std::thread::sleep(std::time::Duration::from_millis(10)),
        }
    };
    let elapsed_seconds = start.elapsed().as_secs_f64();
    if timed_out {
        return Ok(SolveOutcome { status: SolveStatus::Timeout, model: None, elapsed_seconds });
    }

    let mut stdout = String::new();
    if let Some(mut out) = child.stdout.take() {
        out.read_to_string(&mut stdout)
            .map_err(|e| Error::ExternalSolver(format!("reading solver output: {e}")))?;
    }
    parse_output(formula, &stdout).map(|(status, model)| SolveOutcome {
        status,
        model,
        elapsed_seconds,
    })
}

fn parse_output(formula: &CnfFormula, stdout: &str) -> Result<(SolveStatus, Option<Vec<bool>>)> {
    let mut status = None;
    let mut lits: Vec<i64> = Vec::new();
    for line in stdout.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = match rest.trim() {
                "SATISFIABLE" => Some(SolveStatus::Sat),
                "UNSATISFIABLE" => Some(SolveStatus::Unsat),
                other => {
                    return Err(Error::ExternalSolver(format!("unrecognized status line 's {other}'")))
                }
            };
        } else if let Some(rest) = line.strip_prefix("v ") {
            for tok in rest.split_whitespace() {
                let lit: i64 = tok
                    .parse()
                    .map_err(|e| Error::ExternalSolver(format!("bad model literal '{tok}': {e}")))?;
                lits.push(lit);
            }
        } else if line == "v" {
            continue;
        }
    }
    match status {
        None => Err(Error::ExternalSolver("no 's' status line in solver output".into())),
        Some(SolveStatus::Unsat) => Ok((SolveStatus::Unsat, None)),
        Some(SolveStatus::Sat) => {
            let mut model = vec![false; formula.num_vars()];
            for &lit in &lits {
                if lit == 0 {
                    continue;
                }
                let var = lit.unsigned_abs() as usize;
                if var <= formula.num_vars() {
                    model[var - 1] = lit > 0;
                }
            }
            if !formula.is_satisfied_by(&model) {
                return Err(Error::ExternalSolver(
                    "reported model does not satisfy the formula".into(),
                ));
            }
            Ok((SolveStatus::Sat, Some(model)))
        }
        Some(SolveStatus::Timeout) => unreachable!("timeout is never parsed"),
    }
}
