//! Command-line front end: graph generation, CNF encoding, solving, mapping
//! search, routing, and the benchmark harness.

mod bench;
mod output;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use swapsat::clustering::{clustered_mapping_with, read_cluster_plan, spectral_partition};
use swapsat::graphs::{gnp_graph, random_regular_graph, read_graph, write_graph, RngSeed};
use swapsat::mapping_search::{binary_search_mapping_with, SearchOutcome};
use swapsat::oracle::exact_lmin_scan;
use swapsat::router::{route_with_options, verify_routing, write_circuit, RouteOptions};
use swapsat::sat_encoding::{encode_embedding, from_dimacs, to_dimacs, PinSet};
use swapsat::solver::{SolveBudget, SolveStatus, SolverBackend};
use swapsat::swap_strategy::{connectivity_graph, line_swap_strategy, read_strategy, SwapStrategy};
use swapsat::ProgramGraph;

use output::{read_mapping, write_atomic, write_mapping, write_trace_csv};

#[derive(Parser)]
#[command(name = "swapsat", version, about = "SAT-based initial qubit mapping for swap strategies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum GraphKind {
    Rr3,
    Gnp,
}

impl std::fmt::Display for GraphKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphKind::Rr3 => write!(f, "rr3"),
            GraphKind::Gnp => write!(f, "gnp"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random program graph and write it as edge-list JSON.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        kind: GraphKind,
        /// Edge probability for gnp graphs.
        #[arg(long, default_value_t = 0.2)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode an embedding instance as DIMACS CNF plus a variable-map sidecar.
    Encode {
        #[arg(long)]
        graph: PathBuf,
        /// Strategy JSON; defaults to the line strategy sized to the graph.
        #[arg(long)]
        strategy: Option<PathBuf>,
        /// Number of swap layers l for the connectivity graph.
        #[arg(long)]
        l: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide a DIMACS CNF file.
    Solve {
        cnf: PathBuf,
        #[arg(long, default_value_t = 600.0)]
        budget_seconds: f64,
        /// `builtin` or `external:<command>`.
        #[arg(long, default_value = "builtin")]
        solver: String,
        /// Write the model as JSON (`true` literals) when satisfiable.
        #[arg(long)]
        model_out: Option<PathBuf>,
    },
    /// Find an initial mapping by binary search over the number of swap layers.
    Map {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long, default_value_t = 600.0)]
        budget_seconds: f64,
        /// Partition into this many clusters and map them iteratively.
        #[arg(long)]
        clusters: Option<usize>,
        /// Import a cluster plan instead of spectral partitioning.
        #[arg(long)]
        cluster_plan: Option<PathBuf>,
        /// Seed for the spectral partitioner.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "builtin")]
        solver: String,
        /// Cross-validate against the exact backtracking oracle (small n only).
        #[arg(long)]
        check_oracle: bool,
        /// Mapping JSON output.
        #[arg(long)]
        out: PathBuf,
        /// Trace CSV output (l,status,seconds).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Route a program graph with a given mapping and write the circuit.
    Route {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long)]
        trim_dead_swaps: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep graph kinds, sizes, seeds, and methods; write a benchmark CSV.
    Bench(bench::BenchArgs),
}

pub(crate) fn parse_backend(spec: &str) -> Result<SolverBackend> {
    if spec == "builtin" {
        Ok(SolverBackend::Builtin)
    } else if let Some(cmd) = spec.strip_prefix("external:") {
        Ok(SolverBackend::External(cmd.to_string()))
    } else {
        bail!("--solver must be 'builtin' or 'external:<command>', got '{spec}'")
    }
}

fn load_strategy(path: &Option<PathBuf>, graph: &ProgramGraph) -> Result<SwapStrategy> {
    match path {
        Some(p) => Ok(read_strategy(p).with_context(|| format!("reading {}", p.display()))?),
        None => Ok(line_swap_strategy(graph.num_nodes())?),
    }
}

pub(crate) fn generate_graph(kind: GraphKind, n: usize, p: f64, seed: u64) -> Result<ProgramGraph> {
    Ok(match kind {
        GraphKind::Rr3 => random_regular_graph(n, 3, RngSeed(seed))?,
        GraphKind::Gnp => gnp_graph(n, p, RngSeed(seed))?,
    })
}

fn check_against_oracle(
    graph: &ProgramGraph,
    strategy: &SwapStrategy,
    outcome: &SearchOutcome,
) -> Result<()> {
    let oracle_l = exact_lmin_scan(graph, strategy, SolveBudget::default())?;
    if outcome.l_min < oracle_l {
        bail!(
            "oracle disagreement: search certified l = {} below the exact optimum {}",
            outcome.l_min,
            oracle_l
        );
    }
    for entry in &outcome.trace {
        if entry.status == SolveStatus::Unsat && entry.l >= oracle_l {
            bail!(
                "oracle disagreement: exact UNSAT at l = {} but the oracle embeds at {}",
                entry.l,
                oracle_l
            );
        }
    }
    let timed_out = outcome.trace.iter().any(|t| t.status == SolveStatus::Timeout);
    if !timed_out && outcome.l_min != oracle_l {
        bail!(
            "oracle disagreement: no timeouts but search found {} instead of {}",
            outcome.l_min,
            oracle_l
        );
    }
    eprintln!("oracle check passed: exact l_min = {oracle_l}");
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Generate { n, kind, p, seed, out } => {
            let graph = generate_graph(kind, n, p, seed)?;
            write_graph(&graph, &out)?;
            eprintln!("wrote {} ({} nodes, {} edges)", out.display(), graph.num_nodes(), graph.num_edges());
        }
        Command::Encode { graph, strategy, l, out } => {
            let g = read_graph(&graph)?;
            let s = load_strategy(&strategy, &g)?;
            let c = connectivity_graph(&s, l)?;
            let (formula, vars) = encode_embedding(&g, &c, &PinSet::new())?;
            write_atomic(&out, to_dimacs(&formula).as_bytes())?;
            let sidecar = out.with_extension("vars.json");
            write_atomic(
                &sidecar,
                format!(
                    "{{\"num_program\": {}, \"num_physical\": {}}}\n",
                    vars.num_program(),
                    vars.num_physical()
                )
                .as_bytes(),
            )?;
            eprintln!(
                "wrote {} ({} vars, {} clauses) and {}",
                out.display(),
                formula.num_vars(),
                formula.num_clauses(),
                sidecar.display()
            );
        }
        Command::Solve { cnf, budget_seconds, solver, model_out } => {
            let text = std::fs::read_to_string(&cnf)?;
            let formula = from_dimacs(&text)?;
            let backend = parse_backend(&solver)?;
            let outcome = backend.solve(&formula, SolveBudget::new(budget_seconds)?)?;
            println!("s {}", outcome.status);
            println!("t {:.3}", outcome.elapsed_seconds);
            if let (Some(path), Some(model)) = (model_out, &outcome.model) {
                let lits: Vec<i64> = model
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if v { i as i64 + 1 } else { -(i as i64 + 1) })
                    .collect();
                write_atomic(&path, format!("{}\n", serde_json::to_string(&lits)?).as_bytes())?;
            }
            if outcome.status == SolveStatus::Timeout {
                std::process::exit(2);
            }
        }
        Command::Map {
            graph,
            strategy,
            budget_seconds,
            clusters,
            cluster_plan,
            seed,
            solver,
            check_oracle,
            out,
            trace_out,
        } => {
            let g = read_graph(&graph)?;
            let s = load_strategy(&strategy, &g)?;
            let backend = parse_backend(&solver)?;
            let budget = SolveBudget::new(budget_seconds)?;
            let outcome = match (&cluster_plan, clusters) {
                (Some(path), _) => {
                    let plan = read_cluster_plan(path, g.num_nodes())?;
                    clustered_mapping_with(&g, &s, &plan, budget, &backend)?
                }
                (None, Some(k)) => {
                    let plan = spectral_partition(&g, k, RngSeed(seed))?;
                    clustered_mapping_with(&g, &s, &plan, budget, &backend)?
                }
                (None, None) => binary_search_mapping_with(&g, &s, budget, &backend)?,
            };
            if check_oracle {
                check_against_oracle(&g, &s, &outcome)?;
            }
            write_mapping(&outcome.mapping, outcome.l_min, &out)?;
            if let Some(path) = trace_out {
                write_trace_csv(&outcome.trace, &path)?;
            }
            println!("l_min {}", outcome.l_min);
        }
        Command::Route { graph, strategy, mapping, trim_dead_swaps, out } => {
            let g = read_graph(&graph)?;
            let s = load_strategy(&strategy, &g)?;
            let m = read_mapping(&mapping, s.num_qubits())?;
            let circuit =
                route_with_options(&g, &s, &m, RouteOptions { trim_dead_swaps })?;
            let report = verify_routing(&circuit, &g, &s, &m);
            if !report.pass {
                bail!("routing self-check failed: {:?}", report.violation);
            }
            write_circuit(&circuit, &out)?;
            println!("swap_layers {}", circuit.swap_layers_used);
            println!("swaps {}", circuit.swaps_applied);
            println!("cnots {}", circuit.cnot_count);
        }
        Command::Bench(args) => bench::run(args)?,
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
