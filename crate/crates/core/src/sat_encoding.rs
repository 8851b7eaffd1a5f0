//! CNF encoding of the initial-mapping embedding problem.
//!
//! Literal x_{i,j} is true when program node i is mapped to connectivity-graph
//! node j. Three clause groups enforce that the assignment is a function
//! (Condition 1), injective (Condition 2), and edge-preserving (Condition 3).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graphs::ProgramGraph;
use crate::mapping_search::Mapping;
use crate::swap_strategy::ConnectivityGraph;

/// Maps (program node, physical node) pairs to DIMACS variable indices:
/// var(i, j) = i * num_physical + j + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarMap {
    num_program: usize,
    num_physical: usize,
}

impl VarMap {
    pub fn new(num_program: usize, num_physical: usize) -> Self {
        Self { num_program, num_physical }
    }

    pub fn num_program(&self) -> usize {
        self.num_program
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    pub fn num_vars(&self) -> usize {
        self.num_program * self.num_physical
    }

    pub fn var(&self, program: usize, physical: usize) -> i32 {
        debug_assert!(program < self.num_program && physical < self.num_physical);
        (program * self.num_physical + physical + 1) as i32
    }

    /// Inverse of `var` for a positive variable index.
    pub fn pair(&self, var: i32) -> (usize, usize) {
        debug_assert!(var >= 1 && (var as usize) <= self.num_vars());
        let idx = var as usize - 1;
        (idx / self.num_physical, idx % self.num_physical)
    }
}

/// A CNF formula over variables 1..=num_vars; clauses hold nonzero signed
/// DIMACS literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for clause in &clauses {
            let mut seen = BTreeSet::new();
            for &lit in clause {
                if lit == 0 {
                    return Err(Error::InvalidInput("zero literal in clause".into()));
                }
                if lit.unsigned_abs() as usize > num_vars {
                    return Err(Error::InvalidInput(format!(
                        "literal {lit} exceeds num_vars = {num_vars}"
                    )));
                }
                if seen.contains(&-lit) {
                    return Err(Error::InvalidInput(format!(
                        "clause contains both {lit} and {}",
                        -lit
                    )));
                }
                seen.insert(lit);
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// True when `model` (indexed by variable - 1) satisfies every clause.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        if model.len() < self.num_vars {
            return false;
        }
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let value = model[lit.unsigned_abs() as usize - 1];
                if lit > 0 {
                    value
                } else {
                    !value
                }
            })
        })
    }
}

/// Partial placement carried between clustering iterations. `pins` fixes
/// program nodes of the current instance to physical nodes; `occupied` blocks
/// physical nodes taken by program nodes outside the instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PinSet {
    pins: BTreeMap<usize, usize>,
    occupied: BTreeSet<usize>,
}

impl PinSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pin(&mut self, program: usize, physical: usize) -> Result<()> {
        if self.pins.values().any(|&p| p == physical) || self.occupied.contains(&physical) {
            return Err(Error::InvalidPins(format!("physical node {physical} pinned twice")));
        }
        if self.pins.contains_key(&program) {
            return Err(Error::InvalidPins(format!("program node {program} pinned twice")));
        }
        self.pins.insert(program, physical);
        Ok(())
    }

    /// Blocks a physical node without a corresponding program node in the
    /// current instance.
    pub fn occupy(&mut self, physical: usize) -> Result<()> {
        if self.pins.values().any(|&p| p == physical) || !self.occupied.insert(physical) {
            return Err(Error::InvalidPins(format!("physical node {physical} occupied twice")));
        }
        Ok(())
    }

    pub fn pins(&self) -> &BTreeMap<usize, usize> {
        &self.pins
    }

    pub fn is_empty(&self) -> bool {
        self.pins.is_empty() && self.occupied.is_empty()
    }

    /// All physical nodes unavailable to free program nodes.
    fn blocked_physical(&self) -> BTreeSet<usize> {
        self.pins.values().copied().chain(self.occupied.iter().copied()).collect()
    }
}

/// Builds the embedding CNF for P into C. Clause groups are emitted in a
/// fixed order so DIMACS output is byte-stable:
/// Condition 1a, Condition 1b, Condition 2, Condition 3, then pin units.
pub fn encode_embedding(
    program: &ProgramGraph,
    connectivity: &ConnectivityGraph,
    pins: &PinSet,
) -> Result<(CnfFormula, VarMap)> {
    let n = program.num_nodes();
    let m = connectivity.num_qubits();
    if n > m {
        return Err(Error::InvalidSize(format!(
            "program graph has {n} nodes but connectivity graph only {m}"
        )));
    }
    for (&i, &j) in pins.pins() {
        if i >= n {
            return Err(Error::InvalidPins(format!("pinned program node {i} out of range")));
        }
        if j >= m {
            return Err(Error::InvalidPins(format!("pinned physical node {j} out of range")));
        }
    }
    let vars = VarMap::new(n, m);
    let mut clauses = Vec::new();

    // Condition 1a: every program node sits somewhere.
    for i in 0..n {
        clauses.push((0..m).map(|j| vars.var(i, j)).collect());
    }
    // Condition 1b: nowhere twice.
    for i in 0..n {
        for j in 1..m {
            for k in 0..j {
                clauses.push(vec![-vars.var(i, j), -vars.var(i, k)]);
            }
        }
    }
    // Condition 2: no physical node hosts two program nodes.
    for k in 0..m {
        for i in 1..n {
            for j in 0..i {
                clauses.push(vec![-vars.var(i, k), -vars.var(j, k)]);
            }
        }
    }
    // Condition 3: program edges map to connectivity edges, one direction per
    // undirected edge.
    let neighbors: Vec<Vec<usize>> = (0..m).map(|k| connectivity.neighbors(k)).collect();
    for &(i, j) in program.edges() {
        for (k, adj) in neighbors.iter().enumerate() {
            let mut clause = vec![-vars.var(i, k)];
            clause.extend(adj.iter().map(|&kp| vars.var(j, kp)));
            clauses.push(clause);
        }
    }
    // Pins: fix placed nodes and exclude every taken physical node from the
    // free ones.
    if !pins.is_empty() {
        for (&i, &j) in pins.pins() {
            clauses.push(vec![vars.var(i, j)]);
        }
        let blocked = pins.blocked_physical();
        for i in 0..n {
            if pins.pins().contains_key(&i) {
                continue;
            }
            for &k in &blocked {
                clauses.push(vec![-vars.var(i, k)]);
            }
        }
    }

    Ok((CnfFormula::new(vars.num_vars(), clauses)?, vars))
}

/// Recovers the mapping from a satisfying assignment: program node i maps to
/// the unique j with x_{i,j} true.
pub fn decode_model(model: &[bool], vars: &VarMap) -> Result<Mapping> {
    let mut assignment = Vec::with_capacity(vars.num_program());
    for i in 0..vars.num_program() {
        let mut target = None;
        for j in 0..vars.num_physical() {
            if model[vars.var(i, j) as usize - 1] {
                if target.is_some() {
                    return Err(Error::InconsistentModel(format!(
                        "program node {i} assigned to multiple physical nodes"
                    )));
                }
                target = Some(j);
            }
        }
        match target {
            Some(j) => assignment.push(j),
            None => {
                return Err(Error::InconsistentModel(format!(
                    "program node {i} assigned to no physical node"
                )))
            }
        }
    }
    Mapping::new(assignment, vars.num_physical())
}

/// Standard DIMACS CNF text, byte-identical for identical formulas.
pub fn to_dimacs(formula: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", formula.num_vars(), formula.num_clauses());
    for clause in formula.clauses() {
        for lit in clause {
            out.push_str(&lit.to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

/// Parses DIMACS CNF text (comment lines allowed before and after the header).
pub fn from_dimacs(text: &str) -> Result<CnfFormula> {
    let mut num_vars = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(Error::Parse(format!("line {}: bad DIMACS header", lineno + 1)));
            }
            num_vars = Some(
                fields[2]
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?,
            );
            continue;
        }
        for tok in line.split_whitespace() {
            let lit: i32 =
                tok.parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(Error::Parse("unterminated clause at end of input".into()));
    }
    let num_vars = num_vars.ok_or_else(|| Error::Parse("missing DIMACS header".into()))?;
    CnfFormula::new(num_vars, clauses)
}

/// Expected clause count of an unpinned embedding instance, from the sizes of
/// the clause groups.
pub fn expected_clause_count(num_program: usize, num_physical: usize, num_edges: usize) -> usize {
    let (n, m, e) = (num_program, num_physical, num_edges);
    n + n * m * (m - 1) / 2 + m * n * (n - 1) / 2 + e * m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swap_strategy::{connectivity_graph, line_swap_strategy};

    fn complete_connectivity(n: usize) -> ConnectivityGraph {
        let s = line_swap_strategy(n).unwrap();
        connectivity_graph(&s, n - 2).unwrap()
    }

    #[test]
    fn k3_into_k3_counts() {
        let p = ProgramGraph::complete(3);
        let c = complete_connectivity(3);
        let (f, vars) = encode_embedding(&p, &c, &PinSet::new()).unwrap();
        assert_eq!(vars.num_vars(), 9);
        assert_eq!(f.num_clauses(), 30);
        assert_eq!(f.num_clauses(), expected_clause_count(3, 3, 3));
    }

    #[test]
    fn k3_dimacs_header() {
        let p = ProgramGraph::complete(3);
        let c = complete_connectivity(3);
        let (f, _) = encode_embedding(&p, &c, &PinSet::new()).unwrap();
        assert!(to_dimacs(&f).starts_with("p cnf 9 30\n"));
    }

    #[test]
    fn dimacs_trivia() {
        let empty = CnfFormula::new(0, vec![]).unwrap();
        assert_eq!(to_dimacs(&empty), "p cnf 0 0\n");
        let unit = CnfFormula::new(1, vec![vec![1]]).unwrap();
        assert_eq!(to_dimacs(&unit), "p cnf 1 1\n1 0\n");
    }

    #[test]
    fn dimacs_roundtrip() {
        let p = ProgramGraph::complete(4);
        let c = complete_connectivity(4);
        let (f, _) = encode_embedding(&p, &c, &PinSet::new()).unwrap();
        assert_eq!(from_dimacs(&to_dimacs(&f)).unwrap(), f);
    }

    #[test]
    fn decode_rejects_double_assignment() {
        let vars = VarMap::new(2, 2);
        // x_{0,0}, x_{0,1} both true.
        let model = vec![true, true, false, true];
        assert!(matches!(decode_model(&model, &vars), Err(Error::InconsistentModel(_))));
    }

    #[test]
    fn decode_simple() {
        let vars = VarMap::new(2, 2);
        let model = vec![true, false, false, true];
        let mapping = decode_model(&model, &vars).unwrap();
        assert_eq!(mapping.assignment(), &[0, 1]);
    }

    #[test]
    fn oversized_program_rejected() {
        let p = ProgramGraph::complete(4);
        let c = complete_connectivity(3);
        assert!(matches!(
            encode_embedding(&p, &c, &PinSet::new()),
            Err(Error::InvalidSize(_))
        ));
    }

    #[test]
    fn pin_clauses_present() {
        let p = ProgramGraph::path(3);
        let c = complete_connectivity(3);
        let mut pins = PinSet::new();
        pins.pin(0, 2).unwrap();
        let (f, vars) = encode_embedding(&p, &c, &pins).unwrap();
        let unpinned = expected_clause_count(3, 3, 2);
        // One positive unit plus one exclusion per free node.
        assert_eq!(f.num_clauses(), unpinned + 1 + 2);
        assert!(f.clauses().contains(&vec![vars.var(0, 2)]));
        assert!(f.clauses().contains(&vec![-vars.var(1, 2)]));
        assert!(f.clauses().contains(&vec![-vars.var(2, 2)]));
    }

    #[test]
    fn pinset_rejects_conflicts() {
        let mut pins = PinSet::new();
        pins.pin(0, 1).unwrap();
        assert!(pins.pin(1, 1).is_err());
        assert!(pins.pin(0, 2).is_err());
        assert!(pins.occupy(1).is_err());
        pins.occupy(3).unwrap();
        assert!(pins.pin(2, 3).is_err());
    }
}
