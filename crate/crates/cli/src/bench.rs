//! Benchmark harness: sweeps (graph kind, size, seed, method) cells and
//! writes one CSV row per cell, deterministically ordered.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;

use swapsat::clustering::{clustered_mapping_with, spectral_partition};
use swapsat::graphs::RngSeed;
use swapsat::mapping_search::{best_random_mapping, binary_search_mapping_with, trivial_mapping};
use swapsat::router::{route_with_options, RouteOptions, RoutedCircuit};
use swapsat::solver::SolveBudget;
use swapsat::swap_strategy::line_swap_strategy;

use crate::output::write_atomic;
use crate::{generate_graph, parse_backend, GraphKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Trivial,
    Random,
    Sat,
    Clustered,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Trivial => write!(f, "trivial"),
            Method::Random => write!(f, "random"),
            Method::Sat => write!(f, "sat"),
            Method::Clustered => write!(f, "clustered"),
        }
    }
}

#[derive(Args)]
pub struct BenchArgs {
    /// Graph kinds to sweep.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    kind: Vec<GraphKind>,
    /// Graph sizes to sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Edge probability for gnp graphs.
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    /// Number of seeds per cell (seeds 0..count).
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::Trivial, Method::Random, Method::Sat])]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 600.0)]
    budget_seconds: f64,
    /// Trials for the random-baseline mapping.
    #[arg(long, default_value_t = 100)]
    random_trials: usize,
    /// Cluster count for the clustered method.
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    trim_dead_swaps: bool,
    #[arg(long, default_value = "builtin")]
    solver: String,
    /// Parallel cells.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
}

struct Record {
    kind: GraphKind,
    n: usize,
    seed: u64,
    method: Method,
    swap_layers: usize,
    swaps_applied: usize,
    cnot_count: usize,
    eta: Option<f64>,
    wall_seconds: f64,
}

impl Record {
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.3}\n",
            self.kind,
            self.n,
            self.seed,
            self.method,
            self.swap_layers,
            self.swaps_applied,
            self.cnot_count,
            self.eta.map_or(String::new(), |e| format!("{e:.4}")),
            self.wall_seconds
        )
    }
}

fn mix_seed(seed: u64, salt: u64) -> RngSeed {
    RngSeed(seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(salt))
}

fn run_cell(args: &BenchArgs, kind: GraphKind, n: usize, seed: u64) -> Result<Vec<Record>> {
    let graph = generate_graph(kind, n, args.p, seed)?;
    let strategy = line_swap_strategy(n)?;
    let backend = parse_backend(&args.solver)?;
    let budget = SolveBudget::new(args.budget_seconds)?;
    let options = RouteOptions { trim_dead_swaps: args.trim_dead_swaps };
    let mut records = Vec::new();
    let mut random_cnots: Option<usize> = None;

    let mut push = |method: Method,
                    swap_layers: usize,
                    circuit: &RoutedCircuit,
                    wall_seconds: f64,
                    eta: Option<f64>| {
        records.push(Record {
            kind,
            n,
            seed,
            method,
            swap_layers,
            swaps_applied: circuit.swaps_applied,
            cnot_count: circuit.cnot_count,
            eta,
            wall_seconds,
        });
    };

    for &method in &args.methods {
        let start = std::time::Instant::now();
        match method {
            Method::Trivial => {
                let mapping = trivial_mapping(&graph, &strategy)?;
                let circuit = route_with_options(&graph, &strategy, &mapping, options)?;
                let layers = circuit.swap_layers_used;
                push(method, layers, &circuit, start.elapsed().as_secs_f64(), None);
            }
            Method::Random => {
                let (mapping, layers) =
                    best_random_mapping(&graph, &strategy, args.random_trials, mix_seed(seed, 1))?;
                let circuit = route_with_options(&graph, &strategy, &mapping, options)?;
                random_cnots = Some(circuit.cnot_count);
                push(method, layers, &circuit, start.elapsed().as_secs_f64(), None);
            }
            Method::Sat => {
                let outcome = binary_search_mapping_with(&graph, &strategy, budget, &backend)?;
                let circuit = route_with_options(&graph, &strategy, &outcome.mapping, options)?;
                let eta = random_cnots
                    .filter(|&r| r > 0)
                    .map(|r| circuit.cnot_count as f64 / r as f64);
                push(method, outcome.l_min, &circuit, start.elapsed().as_secs_f64(), eta);
            }
            Method::Clustered => {
                let Some(k) = args.clusters else {
                    bail!("--clusters is required for the clustered method");
                };
                let plan = spectral_partition(&graph, k, mix_seed(seed, 2))?;
                let outcome = clustered_mapping_with(&graph, &strategy, &plan, budget, &backend)?;
                let circuit = route_with_options(&graph, &strategy, &outcome.mapping, options)?;
                push(method, outcome.l_min, &circuit, start.elapsed().as_secs_f64(), None);
            }
        }
    }
    Ok(records)
}

pub fn run(args: BenchArgs) -> Result<()> {
    let mut cells: Vec<(GraphKind, usize, u64)> = Vec::new();
    for &kind in &args.kind {
        for &n in &args.n {
            for seed in 0..args.seeds {
                cells.push((kind, n, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;
    let mut results: Vec<((GraphKind, usize, u64), Vec<Record>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(kind, n, seed)| run_cell(&args, kind, n, seed).map(|r| ((kind, n, seed), r)))
            .collect::<Result<Vec<_>>>()
    })?;
    // Deterministic row order regardless of completion order.
    results.sort_by_key(|((kind, n, seed), _)| (format!("{kind}"), *n, *seed));
    let mut csv =
        String::from("graph_kind,n,seed,method,swap_layers,swaps_applied,cnot_count,eta,wall_seconds\n");
    for (_, records) in &results {
        for record in records {
            csv.push_str(&record.csv_row());
        }
    }
    write_atomic(&args.out, csv.as_bytes())?;
    eprintln!("wrote {} ({} rows)", args.out.display(), results.iter().map(|(_, r)| r.len()).sum::<usize>());
    Ok(())
}
