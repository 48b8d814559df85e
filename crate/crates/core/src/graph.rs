//! Base graphs with stable edge indices, plus vertex and edge bit-sets.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Membership bit-vector over the vertex ids `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    bits: FixedBitSet,
}

impl VertexSet {
    pub fn new(n: usize) -> Self {
        VertexSet {
            bits: FixedBitSet::with_capacity(n),
        }
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        VertexSet { bits }
    }

    pub fn from_vertices(n: usize, vertices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = VertexSet::new(n);
        for v in vertices {
            set.insert(v);
        }
        set
    }

    /// Builds a set from the low `n` bits of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        VertexSet::from_vertices(n, (0..n.min(64)).filter(|&v| mask >> v & 1 == 1))
    }

    /// The low 64 vertices as a bit mask.
    pub fn to_mask(&self) -> u64 {
        self.iter()
            .take_while(|&v| v < 64)
            .fold(0u64, |m, v| m | 1 << v)
    }

    /// Size of the universe `0..n`.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, v: usize) {
        self.bits.insert(v);
    }

    pub fn remove(&mut self, v: usize) {
        self.bits.set(v, false);
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        VertexSet { bits }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        VertexSet { bits }
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        VertexSet { bits }
    }

    pub fn complement(&self) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        VertexSet { bits }
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    /// Orders sets by their sorted vertex lists, compared lexicographically.
    ///
    /// This is the canonical order used for tie-breaking among equal-cost
    /// covers and commit sets: `{0,1} < {0,2} < {1,2}` and `{} < {0}`.
    pub fn lex_cmp(&self, other: &VertexSet) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl core::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Membership bit-vector over the edge indices `0..m`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    bits: FixedBitSet,
}

impl EdgeSet {
    pub fn new(m: usize) -> Self {
        EdgeSet {
            bits: FixedBitSet::with_capacity(m),
        }
    }

    pub fn full(m: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(m);
        bits.insert_range(..);
        EdgeSet { bits }
    }

    pub fn from_edges(m: usize, edges: impl IntoIterator<Item = usize>) -> Self {
        let mut set = EdgeSet::new(m);
        for e in edges {
            set.insert(e);
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, e: usize) {
        self.bits.insert(e);
    }

    pub fn remove(&mut self, e: usize) {
        self.bits.set(e, false);
    }

    pub fn contains(&self, e: usize) -> bool {
        self.bits.contains(e)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }
}

impl core::fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The known base graph `G = (V, E)`.
///
/// Vertices are `0..n`. Edges are stored once as `(u, v)` with `u < v`; the
/// position in [`BaseGraph::edges`] is the edge index referenced by
/// realizations and edge sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl BaseGraph {
    /// Validates and builds a graph. Endpoint order within a pair is free;
    /// self-loops, duplicates and out-of-range ids are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adjacency: Vec<Vec<(usize, usize)>> = (0..n).map(|_| Vec::new()).collect();
        let mut stored = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) references a vertex outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if adjacency[u].iter().any(|&(w, _)| w == v) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            let idx = stored.len();
            stored.push((u, v));
            adjacency[u].push((v, idx));
            adjacency[v].push((u, idx));
        }
        Ok(BaseGraph {
            n,
            edges: stored,
            adjacency,
        })
    }

    pub fn empty(n: usize) -> Self {
        BaseGraph {
            n,
            edges: Vec::new(),
            adjacency: (0..n).map(|_| Vec::new()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> (usize, usize) {
        self.edges[idx]
    }

    /// `(neighbor, edge index)` pairs of `v`, in insertion order.
    pub fn adjacency(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].iter().map(|&(w, _)| w)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n || v >= self.n {
            return None;
        }
        self.adjacency[u]
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, e)| e)
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    /// Number of edges with both endpoints in `keep`.
    pub fn edges_within(&self, keep: &VertexSet) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| keep.contains(u) && keep.contains(v))
            .count()
    }

    /// Edges of `G[V \ removed]`.
    pub fn residual_edges(&self, removed: &VertexSet) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| !removed.contains(u) && !removed.contains(v))
            .count()
    }

    /// Edges with at least one endpoint in `set`.
    pub fn incident_edges(&self, set: &VertexSet) -> EdgeSet {
        EdgeSet::from_edges(
            self.m(),
            self.edges
                .iter()
                .enumerate()
                .filter(|(_, &(u, v))| set.contains(u) || set.contains(v))
                .map(|(i, _)| i),
        )
    }

    /// Per-vertex neighbor masks over the full edge set. Requires `n <= 64`.
    pub(crate) fn adjacency_masks(&self) -> Vec<u64> {
        debug_assert!(self.n <= 64);
        let mut adj = alloc::vec![0u64; self.n];
        for &(u, v) in &self.edges {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        adj
    }
}

/// Result of [`induced_subgraph`]: the subgraph plus index maps back into
/// the parent graph.
#[derive(Clone, Debug)]
pub struct InducedSubgraph {
    pub graph: BaseGraph,
    /// New vertex id to original vertex id.
    pub vertex_map: Vec<usize>,
    /// New edge index to original edge index.
    pub edge_map: Vec<usize>,
}

/// `G[keep]`, with vertices relabelled `0..|keep|` in increasing order of
/// their original id. Edge order follows the parent's edge order.
pub fn induced_subgraph(g: &BaseGraph, keep: &VertexSet) -> InducedSubgraph {
    let vertex_map: Vec<usize> = keep.iter().filter(|&v| v < g.n()).collect();
    let mut relabel = alloc::vec![usize::MAX; g.n()];
    for (new, &old) in vertex_map.iter().enumerate() {
        relabel[old] = new;
    }
    let mut edges = Vec::new();
    let mut edge_map = Vec::new();
    for (idx, &(u, v)) in g.edges().iter().enumerate() {
        if relabel[u] != usize::MAX && relabel[v] != usize::MAX {
            edges.push((relabel[u], relabel[v]));
            edge_map.push(idx);
        }
    }
    let graph = BaseGraph::from_edges(vertex_map.len(), edges)
        .expect("induced subgraph of a valid graph is valid");
    InducedSubgraph {
        graph,
        vertex_map,
        edge_map,
    }
}

/// `N_G(v) ∩ restrict`.
pub fn neighbors_within(g: &BaseGraph, v: usize, restrict: &VertexSet) -> VertexSet {
    VertexSet::from_vertices(
        g.n(),
        g.neighbors(v).filter(|&w| w != v && restrict.contains(w)),
    )
}
