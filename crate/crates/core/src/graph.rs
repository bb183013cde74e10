//! Agent graphs, the greedy two-way cut, and the edge statistics of a cut.
//!
//! Nodes are indexed `0..n` in memory. The JSON form uses 1-based indices.
//! Every graph is symmetric: `(i, j)` is an edge iff `(j, i)` is.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graph families used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphKind {
    Complete,
    /// One coin flip with probability `p` per unordered pair; success adds both directions.
    ErdosRenyi {
        p: f64,
    },
    Circle,
    /// Node 0 is the center.
    Star,
    /// Pairs `(0,1), (2,3), ...`.
    Matching,
}

impl GraphKind {
    pub fn name(&self) -> &'static str {
        match self {
            GraphKind::Complete => "complete",
            GraphKind::ErdosRenyi { .. } => "erdos_renyi",
            GraphKind::Circle => "circle",
            GraphKind::Star => "star",
            GraphKind::Matching => "matching",
        }
    }

    /// Whether the construction consumes randomness.
    pub fn is_random(&self) -> bool {
        matches!(self, GraphKind::ErdosRenyi { .. })
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::ErdosRenyi { p } => write!(f, "erdos_renyi(p={p})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Directed, symmetric, loop-free graph over `n` agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from directed edges, validating symmetry, loops and duplicates.
    /// The stored edge list is sorted lexicographically.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {n}")));
        }
        let mut set = BTreeSet::new();
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!("edge ({i},{j}) out of range for n={n}")));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at node {i}")));
            }
            if !set.insert((i, j)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i},{j})")));
            }
        }
        if let Some(&(i, j)) = set.iter().find(|&&(i, j)| !set.contains(&(j, i))) {
            return Err(Error::InvalidGraph(format!("edge ({i},{j}) has no reverse")));
        }
        Ok(Self::from_sorted_unchecked(n, set.into_iter().collect()))
    }

    fn from_sorted_unchecked(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &edges {
            neighbors[i].push(j);
        }
        Self { n, edges, neighbors }
    }

    /// Builds the graph from undirected pairs `i < j`, adding both directions.
    fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut set = BTreeSet::new();
        for (i, j) in pairs {
            if i != j {
                set.insert((i, j));
                set.insert((j, i));
            }
        }
        Self::from_sorted_unchecked(n, set.into_iter().collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of directed edges `m` (always even).
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors.get(i).is_some_and(|nb| nb.binary_search(&j).is_ok())
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson { n: self.n, edges: self.edges.iter().map(|&(i, j)| [i + 1, j + 1]).collect() }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let mut edges = Vec::with_capacity(json.edges.len());
        for &[i, j] in &json.edges {
            if i == 0 || j == 0 {
                return Err(Error::InvalidGraph("node indices are 1-based".into()));
            }
            edges.push((i - 1, j - 1));
        }
        Self::from_edges(json.n, &edges)
    }
}

/// Serialized graph: `{"n": int, "edges": [[i, j], ...]}` with 1-based node indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

/// Builds a graph of the given family. Only `ErdosRenyi` draws from `rng`.
pub fn build_graph<R: Rng + ?Sized>(kind: GraphKind, n: usize, rng: &mut R) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {n}")));
    }
    let graph = match kind {
        GraphKind::Complete => Graph::from_pairs(n, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))),
        GraphKind::ErdosRenyi { p } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidGraph(format!("edge probability {p} outside (0, 1]")));
            }
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(p) {
                        pairs.push((i, j));
                    }
                }
            }
            Graph::from_pairs(n, pairs)
        }
        GraphKind::Circle => Graph::from_pairs(n, (0..n).map(|i| (i, (i + 1) % n))),
        GraphKind::Star => Graph::from_pairs(n, (1..n).map(|j| (0, j))),
        GraphKind::Matching => {
            if !n.is_multiple_of(2) {
                return Err(Error::InvalidGraph(format!("matching needs an even node count, got {n}")));
            }
            Graph::from_pairs(n, (0..n / 2).map(|k| (2 * k, 2 * k + 1)))
        }
    };
    Ok(graph)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    V1,
    V2,
}

/// Directed edge counts of a two-way split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutCounts {
    /// Edges from `V1` to `V2`.
    pub m12: usize,
    /// Edges from `V2` to `V1`.
    pub m21: usize,
    /// Edges inside `V1`.
    pub m1: usize,
    /// Edges inside `V2`.
    pub m2: usize,
}

impl CutCounts {
    pub fn total(&self) -> usize {
        self.m12 + self.m21 + self.m1 + self.m2
    }

    pub fn cross(&self) -> usize {
        self.m12 + self.m21
    }

    /// `(m1 + m2) / m`, the share of edges that receive a same-arm pair.
    pub fn within_ratio(&self) -> f64 {
        let m = self.total();
        if m == 0 {
            0.0
        } else {
            (self.m1 + self.m2) as f64 / m as f64
        }
    }
}

/// A split `V = V1 ∪ V2` together with its edge counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    sides: Vec<Side>,
    counts: CutCounts,
}

impl Partition {
    pub fn from_sides(g: &Graph, sides: Vec<Side>) -> Result<Self> {
        if sides.len() != g.n() {
            return Err(Error::InvalidPartition(format!("{} side labels for {} nodes", sides.len(), g.n())));
        }
        let counts = count_edges(g, &sides);
        Ok(Self { sides, counts })
    }

    pub fn side(&self, node: usize) -> Side {
        self.sides[node]
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn v1(&self) -> Vec<usize> {
        self.members(Side::V1)
    }

    pub fn v2(&self) -> Vec<usize> {
        self.members(Side::V2)
    }

    fn members(&self, side: Side) -> Vec<usize> {
        (0..self.sides.len()).filter(|&i| self.sides[i] == side).collect()
    }

    pub fn counts(&self) -> CutCounts {
        self.counts
    }
}

fn count_edges(g: &Graph, sides: &[Side]) -> CutCounts {
    let mut c = CutCounts { m12: 0, m21: 0, m1: 0, m2: 0 };
    for &(i, j) in g.edges() {
        match (sides[i], sides[j]) {
            (Side::V1, Side::V2) => c.m12 += 1,
            (Side::V2, Side::V1) => c.m21 += 1,
            (Side::V1, Side::V1) => c.m1 += 1,
            (Side::V2, Side::V2) => c.m2 += 1,
        }
    }
    c
}

/// Greedy max-cut in ascending node order.
///
/// Each node joins `V2` iff it has strictly more already-placed neighbors in
/// `V1` than in `V2`; ties go to `V1`. At least half the edges cross the cut.
pub fn approx_max_cut(g: &Graph) -> Partition {
    let order: Vec<usize> = (0..g.n()).collect();
    approx_max_cut_in_order(g, &order).expect("identity order is a permutation")
}

/// Greedy max-cut with the nodes visited in a shuffled order drawn from `rng`.
pub fn approx_max_cut_shuffled<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Partition {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(rng);
    approx_max_cut_in_order(g, &order).expect("shuffle is a permutation")
}

/// Greedy max-cut visiting nodes in `order`, which must be a permutation of `0..n`.
pub fn approx_max_cut_in_order(g: &Graph, order: &[usize]) -> Result<Partition> {
    let n = g.n();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::InvalidPartition("visit order is not a permutation of the nodes".into()));
    }
    let mut placed: Vec<Option<Side>> = vec![None; n];
    for &i in order {
        let (mut n1, mut n2) = (0usize, 0usize);
        for &j in g.neighbors(i) {
            match placed[j] {
                Some(Side::V1) => n1 += 1,
                Some(Side::V2) => n2 += 1,
                None => {}
            }
        }
        placed[i] = Some(if n1 > n2 { Side::V2 } else { Side::V1 });
    }
    let sides = placed.into_iter().map(|s| s.expect("every node visited")).collect();
    Partition::from_sides(g, sides)
}

/// Counts `(m12, m21, m1, m2)` for an explicit node split. `v1` and `v2`
/// must be disjoint and cover every node.
pub fn partition_counts(g: &Graph, v1: &[usize], v2: &[usize]) -> Result<CutCounts> {
    let n = g.n();
    let mut sides: Vec<Option<Side>> = vec![None; n];
    for (set, side) in [(v1, Side::V1), (v2, Side::V2)] {
        for &i in set {
            if i >= n {
                return Err(Error::InvalidPartition(format!("node {i} out of range")));
            }
            if sides[i].replace(side).is_some() {
                return Err(Error::InvalidPartition(format!("node {i} listed twice")));
            }
        }
    }
    let sides: Vec<Side> = sides
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| Error::InvalidPartition(format!("node {i} not covered"))))
        .collect::<Result<_>>()?;
    Ok(count_edges(g, &sides))
}
