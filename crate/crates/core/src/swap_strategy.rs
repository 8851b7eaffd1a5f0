//! Swap strategies and the effective connectivity graph C_l.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{self, line_coupling_map, CouplingMap};

/// One layer of simultaneously applicable SWAP gates. All pairs are disjoint
/// and every pair is an edge of the strategy's coupling map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapLayer {
    swaps: Vec<(usize, usize)>,
}

impl SwapLayer {
    pub fn new(swaps: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon: Vec<(usize, usize)> = swaps
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        canon.sort_unstable();
        let mut used = BTreeSet::new();
        for &(a, b) in &canon {
            if a == b {
                return Err(Error::InvalidParameters(format!("swap ({a}, {b}) is a self-swap")));
            }
            if !used.insert(a) || !used.insert(b) {
                return Err(Error::InvalidParameters(format!(
                    "swap layer is not disjoint at qubit pair ({a}, {b})"
                )));
            }
        }
        Ok(Self { swaps: canon })
    }

    pub fn swaps(&self) -> &[(usize, usize)] {
        &self.swaps
    }

    pub fn len(&self) -> usize {
        self.swaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.swaps.is_empty()
    }
}

/// A swap strategy (S, o, C_0): the distinct swap layers S, the order o in
/// which to apply them (1-based indices into S), and the coupling map C_0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapStrategy {
    layers: Vec<SwapLayer>,
    order: Vec<usize>,
    coupling: CouplingMap,
}

impl SwapStrategy {
    pub fn new(layers: Vec<SwapLayer>, order: Vec<usize>, coupling: CouplingMap) -> Result<Self> {
        for (i, layer) in layers.iter().enumerate() {
            for &(a, b) in layer.swaps() {
                if !coupling.has_edge(a, b) {
                    return Err(Error::InvalidParameters(format!(
                        "layer {}: swap ({a}, {b}) is not a coupling-map edge",
                        i + 1
                    )));
                }
            }
        }
        for &o in &order {
            if o == 0 || o > layers.len() {
                return Err(Error::InvalidParameters(format!(
                    "order entry {o} out of range 1..={}",
                    layers.len()
                )));
            }
        }
        Ok(Self { layers, order, coupling })
    }

    pub fn layers(&self) -> &[SwapLayer] {
        &self.layers
    }

    /// 1-based indices into `layers`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Total number of ordered applications L.
    pub fn num_ordered_layers(&self) -> usize {
        self.order.len()
    }

    pub fn coupling(&self) -> &CouplingMap {
        &self.coupling
    }

    pub fn num_qubits(&self) -> usize {
        self.coupling.num_qubits()
    }

    /// The t-th applied layer (0-based t < L).
    pub fn ordered_layer(&self, t: usize) -> &SwapLayer {
        &self.layers[self.order[t] - 1]
    }
}

/// The line swap strategy on n qubits: s_1 swaps even edges, s_2 odd edges,
/// alternating for n - 2 applications. Reaches full connectivity.
pub fn line_swap_strategy(n: usize) -> Result<SwapStrategy> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("line swap strategy needs n >= 2, got {n}")));
    }
    let s1 = SwapLayer::new((0..n - 1).step_by(2).map(|i| (i, i + 1)))?;
    let s2 = SwapLayer::new((1..n - 1).step_by(2).map(|i| (i, i + 1)))?;
    let order: Vec<usize> = (0..n.saturating_sub(2)).map(|t| 1 + t % 2).collect();
    SwapStrategy::new(vec![s1, s2], order, line_coupling_map(n)?)
}

/// Effective connectivity after `depth` swap layers: two initial-position
/// labels are adjacent iff they become physically adjacent at some time
/// t <= depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityGraph {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    depth: usize,
}

impl ConnectivityGraph {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.binary_search(&e).is_ok()
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

    pub fn degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == node || b == node).count()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.num_qubits * (self.num_qubits - 1) / 2
    }
}

/// Position of each initial-position label after the first `l` ordered swap
/// layers: `result[p]` is the current physical position of the qubit that
/// started at position p. l = 0 gives the identity.
pub fn permutation_after(strategy: &SwapStrategy, l: usize) -> Result<Vec<usize>> {
    if l > strategy.num_ordered_layers() {
        return Err(Error::InvalidParameters(format!(
            "l = {l} out of range 0..={}",
            strategy.num_ordered_layers()
        )));
    }
    let n = strategy.num_qubits();
    // position[label] and its inverse label-at-position, updated in lockstep.
    let mut position: Vec<usize> = (0..n).collect();
    let mut label_at: Vec<usize> = (0..n).collect();
    for t in 0..l {
        for &(a, b) in strategy.ordered_layer(t).swaps() {
            let (la, lb) = (label_at[a], label_at[b]);
            label_at[a] = lb;
            label_at[b] = la;
            position[la] = b;
            position[lb] = a;
        }
    }
    Ok(position)
}

/// Builds C_l: labels i, j are adjacent iff their physical positions are a
/// coupling-map edge at some time t in 0..=l.
pub fn connectivity_graph(strategy: &SwapStrategy, l: usize) -> Result<ConnectivityGraph> {
    if l > strategy.num_ordered_layers() {
        return Err(Error::InvalidParameters(format!(
            "l = {l} out of range 0..={}",
            strategy.num_ordered_layers()
        )));
    }
    let n = strategy.num_qubits();
    let mut label_at: Vec<usize> = (0..n).collect();
    let mut edges = BTreeSet::new();
    let record = |edges: &mut BTreeSet<(usize, usize)>, label_at: &[usize]| {
        for &(a, b) in strategy.coupling().edges() {
            let (la, lb) = (label_at[a], label_at[b]);
            edges.insert((la.min(lb), la.max(lb)));
        }
    };
    record(&mut edges, &label_at);
    for t in 0..l {
        for &(a, b) in strategy.ordered_layer(t).swaps() {
            label_at.swap(a, b);
        }
        record(&mut edges, &label_at);
    }
    Ok(ConnectivityGraph { num_qubits: n, edges: edges.into_iter().collect(), depth: l })
}

#[derive(Serialize, Deserialize)]
struct StrategyFile {
    coupling: serde_json::Value,
    layers: Vec<Vec<[usize; 2]>>,
    order: Vec<usize>,
}

pub fn write_strategy(strategy: &SwapStrategy, path: impl AsRef<Path>) -> Result<()> {
    let file = StrategyFile {
        coupling: graphs::coupling_map_to_json_value(strategy.coupling()),
        layers: strategy
            .layers
            .iter()
            .map(|layer| layer.swaps().iter().map(|&(a, b)| [a, b]).collect())
            .collect(),
        order: strategy.order.clone(),
    };
    let mut s = serde_json::to_string(&file).expect("strategy serializes");
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_strategy(path: impl AsRef<Path>) -> Result<SwapStrategy> {
    let text = std::fs::read_to_string(path)?;
    let file: StrategyFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("strategy JSON: {e}")))?;
    let coupling = graphs::coupling_map_from_json_value(&file.coupling)?;
    let layers = file
        .layers
        .into_iter()
        .map(|swaps| SwapLayer::new(swaps.into_iter().map(|[a, b]| (a, b))))
        .collect::<Result<Vec<_>>>()?;
    SwapStrategy::new(layers, file.order, coupling)
}
