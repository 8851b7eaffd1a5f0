//! Program graphs, coupling maps, random-instance generators, and edge-list I/O.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed for all randomized generators. Identical seed and parameters produce
/// an identical graph on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// The deterministic generator every randomized routine draws from.
    pub fn rng(self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.0)
    }
}

/// Validates and canonicalizes an edge list: smaller endpoint first, sorted
/// lexicographically, no self-loops or duplicates, endpoints in range.
fn canonical_edges(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Vec<(usize, usize)>> {
    let mut seen = BTreeSet::new();
    for (a, b) in edges {
        if a == b {
            return Err(Error::InvalidParameters(format!("self-loop on node {a}")));
        }
        if a >= num_nodes || b >= num_nodes {
            return Err(Error::InvalidParameters(format!(
                "edge ({a}, {b}) out of range for {num_nodes} nodes"
            )));
        }
        let e = (a.min(b), a.max(b));
        if !seen.insert(e) {
            return Err(Error::InvalidParameters(format!("duplicate edge ({}, {})", e.0, e.1)));
        }
    }
    Ok(seen.into_iter().collect())
}

/// Undirected program graph P = (V, E). Nodes are program qubits and edges are
/// commuting two-qubit gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl ProgramGraph {
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Ok(Self { num_nodes, edges: canonical_edges(num_nodes, edges)? })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Canonicalized edges, smaller endpoint first, lexicographically sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == node || b == node).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            if a == node {
                out.push(b);
            } else if b == node {
                out.push(a);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.binary_search(&e).is_ok()
    }

    /// Complete graph K_n.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b)));
        Self::new(n, edges).expect("complete graph is always valid")
    }

    /// Path graph 0-1-...-(n-1).
    pub fn path(n: usize) -> Self {
        Self::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1))).expect("path graph is always valid")
    }

    /// Induced restriction to `nodes` plus reindexing: returns the subgraph on
    /// the given nodes (in the given order) and keeps only edges with both
    /// endpoints selected. Node `nodes[k]` becomes node `k`.
    pub fn restrict(&self, nodes: &[usize]) -> Result<Self> {
        let mut index = vec![usize::MAX; self.num_nodes];
        for (k, &v) in nodes.iter().enumerate() {
            if v >= self.num_nodes {
                return Err(Error::InvalidParameters(format!("node {v} out of range")));
            }
            if index[v] != usize::MAX {
                return Err(Error::InvalidParameters(format!("node {v} selected twice")));
            }
            index[v] = k;
        }
        let edges = self.edges.iter().filter_map(|&(a, b)| {
            match (index[a], index[b]) {
                (usize::MAX, _) | (_, usize::MAX) => None,
                (x, y) => Some((x, y)),
            }
        });
        Self::new(nodes.len(), edges)
    }
}

/// Hardware coupling map C_0: nodes are physical qubits, edges are native
/// two-qubit gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
}

impl CouplingMap {
    pub fn new(num_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Ok(Self { num_qubits, edges: canonical_edges(num_qubits, edges)? })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.binary_search(&e).is_ok()
    }
}

/// Linear coupling map: qubits 0..n-1 with edges (i, i+1).
pub fn line_coupling_map(n: usize) -> Result<CouplingMap> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("line coupling map needs n >= 2, got {n}")));
    }
    CouplingMap::new(n, (0..n - 1).map(|i| (i, i + 1)))
}

/// Random d-regular graph via the configuration model with full restart on
/// self-loops or multi-edges.
pub fn random_regular_graph(n: usize, degree: usize, seed: RngSeed) -> Result<ProgramGraph> {
    if degree >= n {
        return Err(Error::InvalidParameters(format!("degree {degree} must be < n = {n}")));
    }
    if !(n * degree).is_multiple_of(2) {
        return Err(Error::InvalidParameters(format!(
            "n * degree must be even, got n = {n}, degree = {degree}"
        )));
    }
    let mut rng = seed.rng();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
    'restart: loop {
        stubs.shuffle(&mut rng);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue 'restart;
            }
        }
        return ProgramGraph::new(n, seen);
    }
}

/// Erdos-Renyi G(n, p): each candidate edge included independently with
/// probability p.
pub fn gnp_graph(n: usize, p: f64, seed: RngSeed) -> Result<ProgramGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameters(format!("p must be in [0, 1], got {p}")));
    }
    let mut rng = seed.rng();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    ProgramGraph::new(n, edges)
}

#[derive(Serialize, Deserialize)]
struct EdgeListFile {
    num_nodes: usize,
    edges: Vec<[usize; 2]>,
}

fn graph_to_json(num_nodes: usize, edges: &[(usize, usize)]) -> String {
    let file = EdgeListFile { num_nodes, edges: edges.iter().map(|&(a, b)| [a, b]).collect() };
    let mut s = serde_json::to_string(&file).expect("edge list serializes");
    s.push('\n');
    s
}

fn graph_from_json(text: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let file: EdgeListFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("edge-list JSON: {e}")))?;
    let mut seen = BTreeSet::new();
    for (idx, &[a, b]) in file.edges.iter().enumerate() {
        if a == b {
            return Err(Error::Parse(format!("edge {idx}: self-loop on node {a}")));
        }
        if a >= file.num_nodes || b >= file.num_nodes {
            return Err(Error::Parse(format!(
                "edge {idx}: ({a}, {b}) out of range for {} nodes",
                file.num_nodes
            )));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::Parse(format!("edge {idx}: duplicate edge ({a}, {b})")));
        }
    }
    Ok((file.num_nodes, seen.into_iter().collect()))
}

pub fn write_graph(graph: &ProgramGraph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, graph_to_json(graph.num_nodes, &graph.edges))?;
    Ok(())
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<ProgramGraph> {
    let text = std::fs::read_to_string(path)?;
    let (num_nodes, edges) = graph_from_json(&text)?;
    ProgramGraph::new(num_nodes, edges)
}

pub fn write_coupling_map(map: &CouplingMap, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, graph_to_json(map.num_qubits, &map.edges))?;
    Ok(())
}

pub fn read_coupling_map(path: impl AsRef<Path>) -> Result<CouplingMap> {
    let text = std::fs::read_to_string(path)?;
    let (num_qubits, edges) = graph_from_json(&text)?;
    CouplingMap::new(num_qubits, edges)
}

pub(crate) fn coupling_map_to_json_value(map: &CouplingMap) -> serde_json::Value {
    serde_json::json!({
        "num_nodes": map.num_qubits,
        "edges": map.edges.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
    })
}

pub(crate) fn coupling_map_from_json_value(v: &serde_json::Value) -> Result<CouplingMap> {
    let (n, edges) = graph_from_json(&v.to_string())?;
    CouplingMap::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_coupling_map_small() {
        let m = line_coupling_map(2).unwrap();
        assert_eq!(m.edges(), &[(0, 1)]);
        let m = line_coupling_map(10).unwrap();
        assert_eq!(m.edges().len(), 9);
        assert_eq!(m.edges()[0], (0, 1));
        assert_eq!(m.edges()[8], (8, 9));
        let m = line_coupling_map(40).unwrap();
        assert_eq!(m.edges().len(), 39);
        assert!(line_coupling_map(1).is_err());
    }

    #[test]
    fn regular_graph_k4() {
        let g = random_regular_graph(4, 3, RngSeed(7)).unwrap();
        assert_eq!(g, ProgramGraph::complete(4));
    }

    #[test]
    fn regular_graph_degrees() {
        let g = random_regular_graph(40, 3, RngSeed(1)).unwrap();
        assert_eq!(g.num_edges(), 60);
        assert!(g.degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn regular_graph_odd_sum_rejected() {
        assert!(random_regular_graph(5, 3, RngSeed(0)).is_err());
    }

    #[test]
    fn regular_graph_deterministic() {
        let a = random_regular_graph(30, 3, RngSeed(42)).unwrap();
        let b = random_regular_graph(30, 3, RngSeed(42)).unwrap();
        assert_eq!(a, b);
        let c = random_regular_graph(30, 3, RngSeed(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gnp_extremes() {
        let g = gnp_graph(10, 0.0, RngSeed(0)).unwrap();
        assert_eq!(g.num_edges(), 0);
        let g = gnp_graph(10, 1.0, RngSeed(0)).unwrap();
        assert_eq!(g.num_edges(), 45);
    }

    #[test]
    fn gnp_edge_count_mean() {
        // Binomial(780, 0.2): mean 156, sigma = sqrt(780*0.2*0.8) ~ 11.17.
        // Mean over 1000 seeds has sigma ~ 0.353; allow 3 sigma.
        let total: usize =
            (0..1000).map(|s| gnp_graph(40, 0.2, RngSeed(s)).unwrap().num_edges()).sum();
        let mean = total as f64 / 1000.0;
        assert!((mean - 156.0).abs() < 3.0 * 0.3533, "mean = {mean}");
    }

    #[test]
    fn graph_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k3.json");
        let g = ProgramGraph::complete(3);
        write_graph(&g, &path).unwrap();
        assert_eq!(read_graph(&path).unwrap(), g);
    }

    #[test]
    fn graph_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let dup = dir.path().join("dup.json");
        std::fs::write(&dup, r#"{"num_nodes": 3, "edges": [[0,1],[1,0]]}"#).unwrap();
        assert!(matches!(read_graph(&dup), Err(Error::Parse(_))));

        let oob = dir.path().join("oob.json");
        std::fs::write(&oob, r#"{"num_nodes": 3, "edges": [[0,3]]}"#).unwrap();
        assert!(matches!(read_graph(&oob), Err(Error::Parse(_))));
    }

    #[test]
    fn restrict_reindexes() {
        let g = ProgramGraph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let sub = g.restrict(&[1, 2, 4]).unwrap();
        assert_eq!(sub.num_nodes(), 3);
        assert_eq!(sub.edges(), &[(0, 1)]);
    }
}
