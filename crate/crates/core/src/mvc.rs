//! Exact minimum vertex cover with a canonical choice among optimal covers.
//!
//! The canonical cover of a realization is the minimum cover whose sorted
//! vertex list is lexicographically smallest. It is found in two passes over
//! bit-mask graphs:
//!
//! 1. a branch-and-bound with degree-0/degree-1 reductions and a greedy
//!    matching lower bound computes the optimum size `k`;
//! 2. a depth-first search that always branches on the lowest vertex with an
//!    uncovered edge, trying "include" before "exclude", returns the first
//!    cover of size `k` it meets. Among equal-size covers this visits them in
//!    lexicographic order of their sorted vertex lists.
//!
//! Both passes run per connected component, so the size limit applies to
//! the largest component rather than to the whole graph.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{BaseGraph, EdgeSet, VertexSet};
use crate::realization::Realization;
use crate::MVC_VERTEX_CAP;

/// The canonical minimum vertex cover of one realization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalCover {
    pub cover: VertexSet,
    pub size: usize,
}

#[inline]
fn bit(v: usize) -> u64 {
    1u64 << v
}

#[inline]
fn lowest(mask: u64) -> usize {
    mask.trailing_zeros() as usize
}

/// Greedy maximal matching size on the live subgraph; a lower bound on the
/// cover size of that subgraph.
fn matching_bound(adj: &[u64], mut alive: u64) -> u32 {
    let mut size = 0;
    while alive != 0 {
        let v = lowest(alive);
        alive &= !bit(v);
        let nb = adj[v] & alive;
        if nb != 0 {
            alive &= !bit(lowest(nb));
            size += 1;
        }
    }
    size
}

fn size_search(adj: &[u64], mut alive: u64, mut count: u32, best: &mut u32) {
    // Degree-0 vertices drop out; a degree-1 vertex's neighbor is taken.
    loop {
        let mut changed = false;
        let mut rest = alive;
        while rest != 0 {
            let v = lowest(rest);
            rest &= !bit(v);
            if alive & bit(v) == 0 {
                continue;
            }
            let nb = adj[v] & alive;
            match nb.count_ones() {
                0 => alive &= !bit(v),
                1 => {
                    alive &= !(bit(v) | nb);
                    count += 1;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    if count >= *best {
        return;
    }
    if alive == 0 {
        *best = count;
        return;
    }
    if count + matching_bound(adj, alive) >= *best {
        return;
    }

    let mut pivot = lowest(alive);
    let mut pivot_deg = 0;
    let mut rest = alive;
    while rest != 0 {
        let v = lowest(rest);
        rest &= !bit(v);
        let d = (adj[v] & alive).count_ones();
        if d > pivot_deg {
            pivot = v;
            pivot_deg = d;
        }
    }
    let nb = adj[pivot] & alive;
    size_search(adj, alive & !bit(pivot), count + 1, best);
    size_search(adj, alive & !(bit(pivot) | nb), count + nb.count_ones(), best);
}

/// Size of a minimum vertex cover of the graph given by `adj` on `alive`.
pub(crate) fn min_cover_size(adj: &[u64], alive: u64) -> u32 {
    let mut best = alive.count_ones();
    size_search(adj, alive, 0, &mut best);
    best
}

fn lex_search(adj: &[u64], alive: u64, chosen: u64, count: u32, target: u32) -> Option<u64> {
    let mut pivot = None;
    let mut rest = alive;
    while rest != 0 {
        let v = lowest(rest);
        rest &= !bit(v);
        if adj[v] & alive != 0 {
            pivot = Some(v);
            break;
        }
    }
    let Some(v) = pivot else {
        return (count == target).then_some(chosen);
    };
    if count + matching_bound(adj, alive) > target {
        return None;
    }
    if let Some(found) = lex_search(adj, alive & !bit(v), chosen | bit(v), count + 1, target) {
        return Some(found);
    }
    let nb = adj[v] & alive;
    let next = count + nb.count_ones();
    if next > target {
        return None;
    }
    lex_search(adj, alive & !(bit(v) | nb), chosen | nb, next, target)
}

/// Canonical minimum cover as a bit mask over the graph given by `adj`.
pub(crate) fn canonical_cover_mask(adj: &[u64], alive: u64) -> u64 {
    let k = min_cover_size(adj, alive);
    lex_search(adj, alive, 0, 0, k).expect("a cover of the optimum size exists")
}

/// Connected components of a base graph (isolated vertices dropped), with
/// each component's edges in local ids. Local ids follow the order of the
/// original ids, so a canonical cover computed per component and mapped
/// back is the canonical cover of the whole graph: covers split over
/// components, and the smallest element of the symmetric difference of two
/// optimal covers lies in a single component.
#[derive(Clone, Debug)]
pub(crate) struct Components {
    n: usize,
    parts: Vec<Component>,
}

#[derive(Clone, Debug)]
struct Component {
    vertices: Vec<usize>,
    /// `(edge index, local u, local v)`.
    edges: Vec<(usize, u32, u32)>,
}

impl Components {
    /// Fails if a component has more than [`MVC_VERTEX_CAP`] vertices.
    pub(crate) fn new(g: &BaseGraph) -> Result<Self> {
        let n = g.n();
        let mut comp = alloc::vec![usize::MAX; n];
        let mut parts: Vec<Component> = Vec::new();
        let mut stack = Vec::new();
        for root in 0..n {
            if comp[root] != usize::MAX || g.degree(root) == 0 {
                continue;
            }
            let id = parts.len();
            let mut vertices = alloc::vec![root];
            comp[root] = id;
            stack.push(root);
            while let Some(v) = stack.pop() {
                for w in g.neighbors(v) {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        vertices.push(w);
                        stack.push(w);
                    }
                }
            }
            if vertices.len() > MVC_VERTEX_CAP {
                return Err(Error::capacity(
                    "connected component size for exact cover",
                    vertices.len(),
                    MVC_VERTEX_CAP,
                ));
            }
            vertices.sort_unstable();
            parts.push(Component {
                vertices,
                edges: Vec::new(),
            });
        }
        let mut local = alloc::vec![0u32; n];
        for part in &parts {
            for (i, &v) in part.vertices.iter().enumerate() {
                local[v] = i as u32;
            }
        }
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            parts[comp[u]].edges.push((e, local[u], local[v]));
        }
        Ok(Components { n, parts })
    }

    fn local_graph(part: &Component, present: &EdgeSet, removed: Option<&VertexSet>) -> (Vec<u64>, u64) {
        let mut alive = full_mask(part.vertices.len());
        if let Some(removed) = removed {
            for (i, &v) in part.vertices.iter().enumerate() {
                if removed.contains(v) {
                    alive &= !bit(i);
                }
            }
        }
        let mut adj = alloc::vec![0u64; part.vertices.len()];
        for &(e, u, v) in &part.edges {
            if present.contains(e) {
                adj[u as usize] |= bit(v as usize);
                adj[v as usize] |= bit(u as usize);
            }
        }
        (adj, alive)
    }

    /// `|MVC|` of the realized graph on the vertices outside `removed`.
    pub(crate) fn cover_size(&self, present: &EdgeSet, removed: Option<&VertexSet>) -> usize {
        self.parts
            .iter()
            .map(|part| {
                let (adj, alive) = Self::local_graph(part, present, removed);
                min_cover_size(&adj, alive) as usize
            })
            .sum()
    }

    /// Canonical cover of the realized graph on the vertices outside
    /// `removed`.
    pub(crate) fn canonical_cover(&self, present: &EdgeSet, removed: Option<&VertexSet>) -> VertexSet {
        let mut cover = VertexSet::new(self.n);
        for part in &self.parts {
            let (adj, alive) = Self::local_graph(part, present, removed);
            let mut mask = canonical_cover_mask(&adj, alive);
            while mask != 0 {
                cover.insert(part.vertices[mask.trailing_zeros() as usize]);
                mask &= mask - 1;
            }
        }
        cover
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// The canonical minimum vertex cover of a realization. The cap applies to
/// the largest connected component of the base graph.
pub fn mvc_exact(r: &Realization<'_>) -> Result<CanonicalCover> {
    let cover = Components::new(r.base())?.canonical_cover(r.present(), None);
    let size = cover.len();
    Ok(CanonicalCover { cover, size })
}

/// Minimum vertex cover size of a realization.
pub fn mvc_size(r: &Realization<'_>) -> Result<usize> {
    Ok(Components::new(r.base())?.cover_size(r.present(), None))
}

/// Minimum cover size of `r` restricted to the vertices outside `removed`.
pub(crate) fn residual_cover_size(r: &Realization<'_>, removed: &VertexSet) -> Result<usize> {
    Ok(Components::new(r.base())?.cover_size(r.present(), Some(removed)))
}

#[cfg(test)]
fn adjacency_from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<u64> {
    let mut adj = alloc::vec![0u64; n];
    for &(u, v) in edges {
        adj[u] |= bit(v);
        adj[v] |= bit(u);
    }
    adj
}
