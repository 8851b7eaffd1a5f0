//! CNF decision procedures: a built-in CDCL solver and an adapter for
//! external DIMACS solvers, both under a wall-clock budget.

mod cdcl;
mod external;

use std::time::Duration;

use crate::error::{Error, Result};
use crate::sat_encoding::CnfFormula;

pub use external::solve_external;

/// Wall-clock budget for a single solve call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveBudget {
    pub seconds: f64,
}

impl SolveBudget {
    pub fn new(seconds: f64) -> Result<Self> {
        // Rejects NaN as well as non-positive values.
        if seconds.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidParameters(format!("budget must be positive, got {seconds}")));
        }
        Ok(Self { seconds })
    }

    pub fn duration(&self) -> Duration {
        Duration::from_secs_f64(self.seconds)
    }
}

impl Default for SolveBudget {
    /// 600 seconds per instance.
    fn default() -> Self {
        Self { seconds: 600.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveStatus::Sat => write!(f, "SAT"),
            SolveStatus::Unsat => write!(f, "UNSAT"),
            SolveStatus::Timeout => write!(f, "TIMEOUT"),
        }
    }
}

/// Result of a solve call. A model is present iff the status is `Sat`;
/// `Unsat` is exact, never budget-induced.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub model: Option<Vec<bool>>,
    pub elapsed_seconds: f64,
}

/// Which decision procedure to run: the built-in CDCL solver or an external
/// DIMACS solver command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverBackend {
    Builtin,
    External(String),
}

impl SolverBackend {
    pub fn solve(&self, formula: &CnfFormula, budget: SolveBudget) -> Result<SolveOutcome> {
        match self {
            SolverBackend::Builtin => solve(formula, budget),
            SolverBackend::External(cmd) => solve_external(formula, cmd, budget),
        }
    }
}

/// Decides `formula` with the built-in CDCL solver. Every surfaced model is
/// re-verified against the formula before being returned.
pub fn solve(formula: &CnfFormula, budget: SolveBudget) -> Result<SolveOutcome> {
    let start = std::time::Instant::now();
    let mut solver = cdcl::Solver::new(formula.num_vars());
    for clause in formula.clauses() {
        solver.add_clause(clause)?;
    }
    let status = solver.search(budget.duration());
    let elapsed_seconds = start.elapsed().as_secs_f64();
    match status {
        cdcl::SearchResult::Sat => {
            let model = solver.model();
            if !formula.is_satisfied_by(&model) {
                return Err(Error::InconsistentModel(
                    "built-in solver produced a non-model".into(),
                ));
            }
            Ok(SolveOutcome { status: SolveStatus::Sat, model: Some(model), elapsed_seconds })
        }
        cdcl::SearchResult::Unsat => {
            Ok(SolveOutcome { status: SolveStatus::Unsat, model: None, elapsed_seconds })
        }
        cdcl::SearchResult::Timeout => {
            Ok(SolveOutcome { status: SolveStatus::Timeout, model: None, elapsed_seconds })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn formula(num_vars: usize, clauses: &[&[i32]]) -> CnfFormula {
        CnfFormula::new(num_vars, clauses.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    #[test]
    fn empty_formula_is_sat() {
        let f = formula(0, &[]);
        let out = solve(&f, SolveBudget::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Sat);
        assert_eq!(out.model.unwrap(), Vec::<bool>::new());
    }

    #[test]
    fn contradiction_is_unsat() {
        let f = formula(1, &[&[1], &[-1]]);
        let out = solve(&f, SolveBudget::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Unsat);
    }

    #[test]
    fn simple_sat() {
        let f = formula(3, &[&[1, 2], &[-1, 3], &[-2, -3], &[2, 3]]);
        let out = solve(&f, SolveBudget::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Sat);
        assert!(f.is_satisfied_by(&out.model.unwrap()));
    }

    #[test]
    fn pigeonhole_3_into_2_unsat() {
        // Three pigeons, two holes. Vars p_{i,h} = 2i + h + 1.
        let mut clauses: Vec<Vec<i32>> = Vec::new();
        for i in 0..3i32 {
            clauses.push(vec![2 * i + 1, 2 * i + 2]);
        }
        for h in 0..2i32 {
            for i in 0..3i32 {
                for j in 0..i {
                    clauses.push(vec![-(2 * i + h + 1), -(2 * j + h + 1)]);
                }
            }
        }
        let f = CnfFormula::new(6, clauses).unwrap();
        let out = solve(&f, SolveBudget::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Unsat);
    }

    #[test]
    fn deterministic() {
        let f = formula(4, &[&[1, -2], &[2, 3, -4], &[-1, 4], &[-3, -4], &[1, 2, 3, 4]]);
        let a = solve(&f, SolveBudget::default()).unwrap();
        let b = solve(&f, SolveBudget::default()).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.model, b.model);
    }
}
