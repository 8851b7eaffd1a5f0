//! Spectral partitioning of large program graphs and the pinned iterative
//! mapping heuristic that places one cluster at a time.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{ProgramGraph, RngSeed};
use crate::mapping_search::{solve_embedding, Mapping, SearchOutcome, TraceEntry};
use crate::sat_encoding::PinSet;
use crate::solver::{SolveBudget, SolverBackend};
use crate::swap_strategy::SwapStrategy;

/// Ordered disjoint clusters covering every node of a program graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPlan {
    clusters: Vec<Vec<usize>>,
}

impl ClusterPlan {
    pub fn new(clusters: Vec<Vec<usize>>, num_nodes: usize) -> Result<Self> {
        let mut seen = vec![false; num_nodes];
        let mut covered = 0;
        for cluster in &clusters {
            if cluster.is_empty() {
                return Err(Error::InvalidParameters("empty cluster".into()));
            }
            for &v in cluster {
                if v >= num_nodes {
                    return Err(Error::InvalidParameters(format!("node {v} out of range")));
                }
                if seen[v] {
                    return Err(Error::InvalidParameters(format!("node {v} in two clusters")));
                }
                seen[v] = true;
                covered += 1;
            }
        }
        if covered != num_nodes {
            return Err(Error::InvalidParameters(format!(
                "clusters cover {covered} of {num_nodes} nodes"
            )));
        }
        Ok(Self { clusters })
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    clusters: Vec<Vec<usize>>,
}

pub fn write_cluster_plan(plan: &ClusterPlan, path: impl AsRef<Path>) -> Result<()> {
    let mut s = serde_json::to_string(&PlanFile { clusters: plan.clusters.clone() })
        .expect("plan serializes");
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_cluster_plan(path: impl AsRef<Path>, num_nodes: usize) -> Result<ClusterPlan> {
    let text = std::fs::read_to_string(path)?;
    let file: PlanFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("cluster plan JSON: {e}")))?;
    ClusterPlan::new(file.clusters, num_nodes)
}

/// Spectral clustering: embed nodes with the k smallest eigenvectors of the
/// symmetric-normalized Laplacian, then run seeded k-means (k-means++
/// initialization, at most 300 iterations, tolerance 1e-6). Clusters are
/// ordered by descending size, ties by smallest member index.
pub fn spectral_partition(program: &ProgramGraph, k: usize, seed: RngSeed) -> Result<ClusterPlan> {
    let n = program.num_nodes();
    if k == 0 || k > n {
        return Err(Error::InvalidParameters(format!("k = {k} must be in 1..={n}")));
    }
    if k == 1 {
        return ClusterPlan::new(vec![(0..n).collect()], n);
    }
    let embedding = laplacian_embedding(program, k);
    let assignment = kmeans(&embedding, k, seed);
    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (node, &c) in assignment.iter().enumerate() {
        clusters[c].push(node);
    }
    clusters.retain(|c| !c.is_empty());
    clusters.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    ClusterPlan::new(clusters, n)
}

/// Rows of the n-by-k matrix of the k smallest eigenvectors of
/// L_sym = I - D^{-1/2} A D^{-1/2}. Zero-degree nodes get zero rows
/// (their Laplacian row is just the identity diagonal). Each eigenvector's
/// sign is fixed by making its largest-magnitude component positive.
fn laplacian_embedding(program: &ProgramGraph, k: usize) -> Vec<Vec<f64>> {
    let n = program.num_nodes();
    let degrees = program.degrees();
    let inv_sqrt: Vec<f64> =
        degrees.iter().map(|&d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() }).collect();
    let mut lap = DMatrix::<f64>::identity(n, n);
    for &(a, b) in program.edges() {
        let w = inv_sqrt[a] * inv_sqrt[b];
        lap[(a, b)] -= w;
        lap[(b, a)] -= w;
    }
    let eigen = lap.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eigen.eigenvalues[i]
            .partial_cmp(&eigen.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut embedding = vec![vec![0.0; k]; n];
    for (dim, &col) in order.iter().take(k).enumerate() {
        let column = eigen.eigenvectors.column(col);
        let mut max_idx = 0;
        for r in 1..n {
            if column[r].abs() > column[max_idx].abs() {
                max_idx = r;
            }
        }
        let sign = if column[max_idx] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            embedding[r][dim] = sign * column[r];
        }
    }
    embedding
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans(points: &[Vec<f64>], k: usize, seed: RngSeed) -> Vec<usize> {
    let n = points.len();
    let dims = points[0].len();
    let mut rng = seed.rng();

    // k-means++ seeding.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.gen_range(0..n)].clone());
    while centers.len() < k {
        let dists: Vec<f64> = points
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| squared_distance(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = dists.iter().sum();
        let next = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dists.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        centers.push(points[next].clone());
    }

    let mut assignment = vec![0usize; n];
    for _ in 0..300 {
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = squared_distance(p, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            assignment[i] = best;
        }
        let mut sums = vec![vec![0.0; dims]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assignment[i]] += 1;
            for d in 0..dims {
                sums[assignment[i]][d] += p[d];
            }
        }
        // Reseed an empty cluster with the point farthest from its center.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&i, &j| {
                        squared_distance(&points[i], &centers[assignment[i]])
                            .partial_cmp(&squared_distance(
                                &points[j],
                                &centers[assignment[j]],
                            ))
                            .unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .expect("nonempty points");
                sums[assignment[far]]
                    .iter_mut()
                    .zip(&points[far])
                    .for_each(|(s, p)| *s -= p);
                counts[assignment[far]] -= 1;
                assignment[far] = c;
                sums[c] = points[far].clone();
                counts[c] = 1;
            }
        }
        let mut movement: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new_center: Vec<f64> =
                sums[c].iter().map(|s| s / counts[c] as f64).collect();
            movement = movement.max(squared_distance(&centers[c], &new_center));
            centers[c] = new_center;
        }
        if movement < 1e-6 {
            break;
        }
    }
    // Final assignment against the converged centers.
    for (i, p) in points.iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.iter().enumerate() {
            let d = squared_distance(p, center);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        assignment[i] = best;
    }
    assignment
}

/// Iteratively maps clusters in plan order. Each step binary-searches l over
/// [l_prev, L] on the subgraph induced by the cluster plus its already-placed
/// neighbors, pinning placed nodes and blocking every occupied qubit.
pub fn clustered_mapping(
    program: &ProgramGraph,
    strategy: &SwapStrategy,
    plan: &ClusterPlan,
    budget: SolveBudget,
) -> Result<SearchOutcome> {
    clustered_mapping_with(program, strategy, plan, budget, &SolverBackend::Builtin)
}

pub fn clustered_mapping_with(
    program: &ProgramGraph,
    strategy: &SwapStrategy,
    plan: &ClusterPlan,
    budget: SolveBudget,
    backend: &SolverBackend,
) -> Result<SearchOutcome> {
    let n = program.num_nodes();
    if n > strategy.num_qubits() {
        return Err(Error::Infeasible(format!(
            "program graph has {n} nodes but the device only {} qubits",
            strategy.num_qubits()
        )));
    }
    // Validate the plan against this graph.
    let _ = ClusterPlan::new(plan.clusters.clone(), n)?;
    let total_layers = strategy.num_ordered_layers();
    let mut placed: BTreeMap<usize, usize> = BTreeMap::new();
    let mut l_prev = 0usize;
    let mut trace: Vec<TraceEntry> = Vec::new();

    for cluster in plan.clusters() {
        let cluster_set: BTreeSet<usize> = cluster.iter().copied().collect();
        let mut active: BTreeSet<usize> = cluster_set.clone();
        for &(a, b) in program.edges() {
            if cluster_set.contains(&a) && placed.contains_key(&b) {
                active.insert(b);
            } else if cluster_set.contains(&b) && placed.contains_key(&a) {
                active.insert(a);
            }
        }
        let active: Vec<usize> = active.into_iter().collect();
        let sub = program.restrict(&active)?;
        let mut pins = PinSet::new();
        for (local, &global) in active.iter().enumerate() {
            if let Some(&phys) = placed.get(&global) {
                pins.pin(local, phys)?;
            }
        }
        let active_set: BTreeSet<usize> = active.iter().copied().collect();
        for (&global, &phys) in &placed {
            if !active_set.contains(&global) {
                pins.occupy(phys)?;
            }
        }

        let mut lo = l_prev;
        let mut hi = total_layers;
        let mut best: Option<(usize, Mapping)> = None;
        while lo < hi {
            let l = (lo + hi) / 2;
            match solve_embedding(&sub, strategy, l, &pins, budget, backend, &mut trace)? {
                Some(mapping) => {
                    best = Some((l, mapping));
                    hi = l;
                }
                None => lo = l + 1,
            }
        }
        if best.as_ref().map(|(l, _)| *l) != Some(lo) {
            match solve_embedding(&sub, strategy, lo, &pins, budget, backend, &mut trace)? {
                Some(mapping) => best = Some((lo, mapping)),
                None => {
                    return Err(Error::Infeasible(format!(
                        "cluster {:?} infeasible even at depth {total_layers}",
                        cluster
                    )))
                }
            }
        }
        let (l_i, sub_mapping) = best.expect("set above");
        for (local, &global) in active.iter().enumerate() {
            placed.entry(global).or_insert_with(|| sub_mapping.physical(local));
        }
        l_prev = l_i;
    }

    let assignment: Vec<usize> = (0..n).map(|v| placed[&v]).collect();
    let mapping = Mapping::new(assignment, strategy.num_qubits())?;
    Ok(SearchOutcome { l_min: l_prev, mapping, trace })
}
