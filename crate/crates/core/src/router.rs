//! Swap-strategy routing: given an initial mapping, schedule the program
//! gates and swap layers and count the resulting CNOTs.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::ProgramGraph;
use crate::mapping_search::Mapping;
use crate::swap_strategy::SwapStrategy;

/// One scheduled round of the transpiled circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Round {
    /// Program edges applied simultaneously, with the physical qubit pair
    /// each edge runs on at that moment.
    Gates { edges: Vec<(usize, usize)>, physical: Vec<(usize, usize)> },
    /// SWAP gates applied simultaneously (physical qubit pairs).
    Swaps { pairs: Vec<(usize, usize)> },
}

/// A routed circuit. `cnot_count` covers SWAP-gate CNOTs only (three per
/// SWAP); program gates are reported separately via `program_gate_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutedCircuit {
    pub rounds: Vec<Round>,
    pub swap_layers_used: usize,
    pub swaps_applied: usize,
    pub cnot_count: usize,
    pub program_gate_count: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RouteOptions {
    /// Remove SWAPs whose both qubits touch no later gate or surviving SWAP.
    pub trim_dead_swaps: bool,
}

/// Routes with trimming disabled.
pub fn route(program: &ProgramGraph, strategy: &SwapStrategy, mapping: &Mapping) -> Result<RoutedCircuit> {
    route_with_options(program, strategy, mapping, RouteOptions::default())
}

pub fn route_with_options(
    program: &ProgramGraph,
    strategy: &SwapStrategy,
    mapping: &Mapping,
    options: RouteOptions,
) -> Result<RoutedCircuit> {
    let n = program.num_nodes();
    let m = strategy.num_qubits();
    if mapping.num_program() != n || mapping.num_physical() != m {
        return Err(Error::InvalidParameters(format!(
            "mapping shape ({} -> {}) does not match program ({n}) and device ({m})",
            mapping.num_program(),
            mapping.num_physical()
        )));
    }
    let coupling = strategy.coupling();
    let mut position: Vec<usize> = mapping.assignment().to_vec();
    let mut remaining: BTreeSet<(usize, usize)> = program.edges().iter().copied().collect();
    let mut rounds = Vec::new();
    let mut swap_layers_used = 0;

    loop {
        // Apply every currently feasible edge, packed into minimal gate
        // rounds by repeated maximal matching on physical qubits.
        let mut feasible: Vec<(usize, usize)> = remaining
            .iter()
            .copied()
            .filter(|&(a, b)| coupling.has_edge(position[a], position[b]))
            .collect();
        while !feasible.is_empty() {
            let mut busy = vec![false; m];
            let mut edges = Vec::new();
            let mut physical = Vec::new();
            feasible.retain(|&(a, b)| {
                let (pa, pb) = (position[a], position[b]);
                if busy[pa] || busy[pb] {
                    true
                } else {
                    busy[pa] = true;
                    busy[pb] = true;
                    edges.push((a, b));
                    physical.push((pa.min(pb), pa.max(pb)));
                    remaining.remove(&(a, b));
                    false
                }
            });
            rounds.push(Round::Gates { edges, physical });
        }
        if remaining.is_empty() {
            break;
        }
        if swap_layers_used == strategy.num_ordered_layers() {
            return Err(Error::RoutingIncomplete { unapplied: remaining.into_iter().collect() });
        }
        let layer = strategy.ordered_layer(swap_layers_used).swaps().to_vec();
        for &(a, b) in &layer {
            for p in position.iter_mut() {
                if *p == a {
                    *p = b;
                } else if *p == b {
                    *p = a;
                }
            }
        }
        rounds.push(Round::Swaps { pairs: layer });
        swap_layers_used += 1;
    }

    if options.trim_dead_swaps {
        trim(&mut rounds, m);
    }
    let swaps_applied = rounds
        .iter()
        .map(|r| match r {
            Round::Swaps { pairs } => pairs.len(),
            _ => 0,
        })
        .sum();
    Ok(RoutedCircuit {
        rounds,
        swap_layers_used,
        swaps_applied,
        cnot_count: 3 * swaps_applied,
        program_gate_count: program.num_edges(),
    })
}

/// Backward pass: a SWAP survives only if one of its qubits is used by a
/// later gate or a later surviving SWAP.
fn trim(rounds: &mut [Round], num_qubits: usize) {
    let mut used = vec![false; num_qubits];
    for round in rounds.iter_mut().rev() {
        match round {
            Round::Gates { physical, .. } => {
                for &(a, b) in physical.iter() {
                    used[a] = true;
                    used[b] = true;
                }
            }
            Round::Swaps { pairs } => {
                pairs.retain(|&(a, b)| used[a] || used[b]);
                for &(a, b) in pairs.iter() {
                    used[a] = true;
                    used[b] = true;
                }
            }
        }
    }
}

/// Outcome of replaying a circuit against its inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub pass: bool,
    pub violation: Option<String>,
}

impl VerificationReport {
    fn fail(msg: String) -> Self {
        Self { pass: false, violation: Some(msg) }
    }
}

/// Replays `circuit`, tracking physical positions: every gate edge must be
/// adjacent in the coupling map when applied, every program edge applied
/// exactly once, and every swap round must be a sub-layer of the strategy
/// order.
pub fn verify_routing(
    circuit: &RoutedCircuit,
    program: &ProgramGraph,
    strategy: &SwapStrategy,
    mapping: &Mapping,
) -> VerificationReport {
    let coupling = strategy.coupling();
    let mut position: Vec<usize> = mapping.assignment().to_vec();
    let mut applied: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut swap_index = 0;
    for (r, round) in circuit.rounds.iter().enumerate() {
        match round {
            Round::Gates { edges, physical } => {
                if physical.len() != edges.len() {
                    return VerificationReport::fail(format!(
                        "round {r}: {} edges but {} physical pairs",
                        edges.len(),
                        physical.len()
                    ));
                }
                let mut busy = BTreeSet::new();
                for (&(a, b), &(pa, pb)) in edges.iter().zip(physical) {
                    if a >= program.num_nodes() || b >= program.num_nodes() {
                        return VerificationReport::fail(format!(
                            "round {r}: edge ({a}, {b}) out of range"
                        ));
                    }
                    if !program.has_edge(a, b) {
                        return VerificationReport::fail(format!(
                            "round {r}: ({a}, {b}) is not a program edge"
                        ));
                    }
                    let e = (a.min(b), a.max(b));
                    if !applied.insert(e) {
                        return VerificationReport::fail(format!(
                            "round {r}: edge ({a}, {b}) applied twice"
                        ));
                    }
                    if (pa, pb) != (position[a], position[b])
                        && (pb, pa) != (position[a], position[b])
                    {
                        return VerificationReport::fail(format!(
                            "round {r}: edge ({a}, {b}) recorded on ({pa}, {pb}) but sits on \
                             ({}, {})",
                            position[a], position[b]
                        ));
                    }
                    if !coupling.has_edge(position[a], position[b]) {
                        return VerificationReport::fail(format!(
                            "round {r}: edge ({a}, {b}) not adjacent (positions {}, {})",
                            position[a], position[b]
                        ));
                    }
                    if !busy.insert(position[a]) || !busy.insert(position[b]) {
                        return VerificationReport::fail(format!(
                            "round {r}: qubit used twice within the round"
                        ));
                    }
                }
            }
            Round::Swaps { pairs } => {
                if swap_index >= strategy.num_ordered_layers() {
                    return VerificationReport::fail(format!(
                        "round {r}: more swap rounds than ordered layers"
                    ));
                }
                let layer = strategy.ordered_layer(swap_index);
                for &(a, b) in pairs {
                    let e = (a.min(b), a.max(b));
                    if !layer.swaps().contains(&e) {
                        return VerificationReport::fail(format!(
                            "round {r}: swap ({a}, {b}) not in strategy layer {swap_index}"
                        ));
                    }
                }
                for &(a, b) in pairs {
                    for p in position.iter_mut() {
                        if *p == a {
                            *p = b;
                        } else if *p == b {
                            *p = a;
                        }
                    }
                }
                swap_index += 1;
            }
        }
    }
    for &(a, b) in program.edges() {
        if !applied.contains(&(a, b)) {
            return VerificationReport::fail(format!("program edge ({a}, {b}) never applied"));
        }
    }
    VerificationReport { pass: true, violation: None }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum RoundFile {
    Gates { edges: Vec<[usize; 2]> },
    Swaps { pairs: Vec<[usize; 2]> },
}

#[derive(Serialize, Deserialize)]
struct CircuitFile {
    rounds: Vec<RoundFile>,
    metrics: CircuitMetrics,
}

#[derive(Serialize, Deserialize)]
struct CircuitMetrics {
    swap_layers_used: usize,
    swaps_applied: usize,
    cnot_count: usize,
    program_gate_count: usize,
}

pub fn write_circuit(circuit: &RoutedCircuit, path: impl AsRef<Path>) -> Result<()> {
    let file = CircuitFile {
        rounds: circuit
            .rounds
            .iter()
            .map(|r| match r {
                Round::Gates { edges, .. } => {
                    RoundFile::Gates { edges: edges.iter().map(|&(a, b)| [a, b]).collect() }
                }
                Round::Swaps { pairs } => {
                    RoundFile::Swaps { pairs: pairs.iter().map(|&(a, b)| [a, b]).collect() }
                }
            })
            .collect(),
        metrics: CircuitMetrics {
            swap_layers_used: circuit.swap_layers_used,
            swaps_applied: circuit.swaps_applied,
            cnot_count: circuit.cnot_count,
            program_gate_count: circuit.program_gate_count,
        },
    };
    let mut s = serde_json::to_string_pretty(&file).expect("circuit serializes");
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Flat text form for diffing: one gate per line, `ZZ i j` or `SWAP a b`.
pub fn circuit_to_text(circuit: &RoutedCircuit) -> String {
    let mut out = String::new();
    for round in &circuit.rounds {
        match round {
            Round::Gates { edges, .. } => {
                for &(a, b) in edges {
                    out.push_str(&format!("ZZ {a} {b}\n"));
                }
            }
            Round::Swaps { pairs } => {
                for &(a, b) in pairs {
                    out.push_str(&format!("SWAP {a} {b}\n"));
                }
            }
        }
    }
    out
}
