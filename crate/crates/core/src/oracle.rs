//! Backtracking subgraph-monomorphism search. Independent ground truth for
//! the SAT pipeline on small instances: program edges must map to
//! connectivity edges, program non-edges are unconstrained.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::graphs::ProgramGraph;
use crate::mapping_search::Mapping;
use crate::solver::SolveBudget;
use crate::swap_strategy::{connectivity_graph, ConnectivityGraph, SwapStrategy};

/// Result of an embedding search. `mapping` is present iff `found`;
/// `timed_out` marks budget exhaustion, in which case absence of a mapping
/// is no verdict.
#[derive(Debug, Clone)]
pub struct EmbedResult {
    pub found: bool,
    pub mapping: Option<Mapping>,
    pub nodes_explored: u64,
    pub elapsed_seconds: f64,
    pub timed_out: bool,
}

struct SearchCtx<'a> {
    program: &'a ProgramGraph,
    connectivity: &'a ConnectivityGraph,
    program_neighbors: Vec<Vec<usize>>,
    program_degree: Vec<usize>,
    connectivity_degree: Vec<usize>,
    deadline: Instant,
    nodes_explored: u64,
    timed_out: bool,
}

impl SearchCtx<'_> {
    /// Next program node to place: most already-mapped neighbors, then
    /// highest degree, then lowest index.
    fn pick_next(&self, mapped: &[Option<usize>]) -> Option<usize> {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in 0..self.program.num_nodes() {
            if mapped[v].is_some() {
                continue;
            }
            let placed_neighbors =
                self.program_neighbors[v].iter().filter(|&&u| mapped[u].is_some()).count();
            let key = (placed_neighbors, self.program_degree[v], usize::MAX - v);
            if best.is_none_or(|(pn, d, iv)| key > (pn, d, iv)) {
                best = Some(key);
            }
        }
        best.map(|(_, _, iv)| usize::MAX - iv)
    }

    fn search(&mut self, mapped: &mut [Option<usize>], used: &mut [bool], depth: usize) -> bool {
        if depth == self.program.num_nodes() {
            return true;
        }
        if self.nodes_explored.is_multiple_of(1024) && Instant::now() >= self.deadline {
            self.timed_out = true;
            return false;
        }
        let v = self.pick_next(mapped).expect("unmapped node exists");
        for c in 0..self.connectivity.num_qubits() {
            if used[c] || self.connectivity_degree[c] < self.program_degree[v] {
                continue;
            }
            let consistent = self.program_neighbors[v].iter().all(|&u| match mapped[u] {
                Some(cu) => self.connectivity.has_edge(c, cu),
                None => true,
            });
            if !consistent {
                continue;
            }
            self.nodes_explored += 1;
            mapped[v] = Some(c);
            used[c] = true;
            if self.search(mapped, used, depth + 1) {
                return true;
            }
            mapped[v] = None;
            used[c] = false;
            if self.timed_out {
                return false;
            }
        }
        false
    }
}

/// Depth-first monomorphism search with degree and mapped-neighbor pruning.
pub fn find_embedding(
    program: &ProgramGraph,
    connectivity: &ConnectivityGraph,
    budget: SolveBudget,
) -> Result<EmbedResult> {
    if program.num_nodes() > connectivity.num_qubits() {
        return Err(Error::InvalidSize(format!(
            "program graph has {} nodes but connectivity graph only {}",
            program.num_nodes(),
            connectivity.num_qubits()
        )));
    }
    let start = Instant::now();
    let mut ctx = SearchCtx {
        program,
        connectivity,
        program_neighbors: (0..program.num_nodes()).map(|v| program.neighbors(v)).collect(),
        program_degree: program.degrees(),
        connectivity_degree: (0..connectivity.num_qubits())
            .map(|c| connectivity.degree(c))
            .collect(),
        deadline: start + budget.duration(),
        nodes_explored: 0,
        timed_out: false,
    };
    let mut mapped = vec![None; program.num_nodes()];
    let mut used = vec![false; connectivity.num_qubits()];
    let found = ctx.search(&mut mapped, &mut used, 0);
    let elapsed_seconds = start.elapsed().as_secs_f64();
    let mapping = if found {
        let assignment: Vec<usize> = mapped.iter().map(|m| m.expect("complete")).collect();
        let mapping = Mapping::new(assignment, connectivity.num_qubits())?;
        debug_assert!(mapping.embeds(program, connectivity));
        Some(mapping)
    } else {
        None
    };
    Ok(EmbedResult {
        found,
        mapping,
        nodes_explored: ctx.nodes_explored,
        elapsed_seconds,
        timed_out: ctx.timed_out,
    })
}

/// Exact minimum depth by linear scan: first l in 0..=L with an embedding.
/// Intended for small instances only. The budget covers the whole scan.
pub fn exact_lmin_scan(
    program: &ProgramGraph,
    strategy: &SwapStrategy,
    budget: SolveBudget,
) -> Result<usize> {
    let start = Instant::now();
    for l in 0..=strategy.num_ordered_layers() {
        let remaining = budget.seconds - start.elapsed().as_secs_f64();
        if remaining <= 0.0 {
            return Err(Error::BudgetExceeded(format!("last decided l = {}", l.wrapping_sub(1))));
        }
        let connectivity = connectivity_graph(strategy, l)?;
        let result = find_embedding(program, &connectivity, SolveBudget::new(remaining)?)?;
        if result.timed_out {
            return Err(Error::BudgetExceeded(format!("last decided l = {}", l.wrapping_sub(1))));
        }
        if result.found {
            return Ok(l);
        }
    }
    Err(Error::Infeasible("no embedding at any depth".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{gnp_graph, RngSeed};
    use crate::swap_strategy::line_swap_strategy;

    fn connectivity(n: usize, l: usize) -> ConnectivityGraph {
        connectivity_graph(&line_swap_strategy(n).unwrap(), l).unwrap()
    }

    /// Brute force over all bijections of equal-size graphs.
    fn all_bijections_embed(p: &ProgramGraph, c: &ConnectivityGraph) -> Vec<Vec<usize>> {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for rest in permutations(n - 1) {
                for pos in 0..=rest.len() {
                    let mut perm = rest.clone();
                    perm.insert(pos, n - 1);
                    out.push(perm);
                }
            }
            out
        }
        permutations(p.num_nodes())
            .into_iter()
            .filter(|perm| {
                p.edges().iter().all(|&(a, b)| c.has_edge(perm[a], perm[b]))
            })
            .collect()
    }

    #[test]
    fn k3_into_k3_all_bijections() {
        let p = ProgramGraph::complete(3);
        let c = connectivity(3, 1);
        assert_eq!(all_bijections_embed(&p, &c).len(), 6);
        let r = find_embedding(&p, &c, SolveBudget::default()).unwrap();
        assert!(r.found);
        assert!(r.mapping.unwrap().embeds(&p, &c));
    }

    #[test]
    fn k3_into_path_not_found() {
        let p = ProgramGraph::complete(3);
        let c = connectivity(3, 0);
        assert!(all_bijections_embed(&p, &c).is_empty());
        let r = find_embedding(&p, &c, SolveBudget::default()).unwrap();
        assert!(!r.found);
        assert!(!r.timed_out);
    }

    #[test]
    fn threshold_behaviour_small_random() {
        let s = line_swap_strategy(10).unwrap();
        for seed in 0..5 {
            let p = gnp_graph(10, 0.2, RngSeed(seed)).unwrap();
            let lmin = exact_lmin_scan(&p, &s, SolveBudget::default()).unwrap();
            let at = find_embedding(&p, &connectivity(10, lmin), SolveBudget::default()).unwrap();
            assert!(at.found);
            if lmin > 0 {
                let below =
                    find_embedding(&p, &connectivity(10, lmin - 1), SolveBudget::default())
                        .unwrap();
                assert!(!below.found);
            }
        }
    }

    #[test]
    fn exact_lmin_known_cases() {
        let s3 = line_swap_strategy(3).unwrap();
        assert_eq!(exact_lmin_scan(&ProgramGraph::path(3), &s3, SolveBudget::default()).unwrap(), 0);
        assert_eq!(
            exact_lmin_scan(&ProgramGraph::complete(3), &s3, SolveBudget::default()).unwrap(),
            1
        );
        for n in 4..=8 {
            let s = line_swap_strategy(n).unwrap();
            assert_eq!(
                exact_lmin_scan(&ProgramGraph::complete(n), &s, SolveBudget::default()).unwrap(),
                n - 2,
                "K_{n}"
            );
        }
    }
}
