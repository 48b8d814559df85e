//! Realized graphs `G* ~ G_p`, conditional sampling and the query oracle.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{BaseGraph, EdgeSet, InducedSubgraph, VertexSet};
use crate::rng::SeedSpec;
use crate::EXACT_EDGE_CAP;

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("p must lie in (0, 1], got {p}")))
    }
}

/// One realization of the base graph: bit `i` of `present` says whether edge
/// `i` exists in `G*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization<'g> {
    base: &'g BaseGraph,
    present: EdgeSet,
}

impl<'g> Realization<'g> {
    pub fn new(base: &'g BaseGraph, present: EdgeSet) -> Result<Self> {
        if present.universe() != base.m() {
            return Err(Error::Contract(format!(
                "realization has {} bits for a graph with {} edges",
                present.universe(),
                base.m()
            )));
        }
        Ok(Realization { base, present })
    }

    /// Every edge present (the `p = 1` realization).
    pub fn full(base: &'g BaseGraph) -> Self {
        Realization {
            base,
            present: EdgeSet::full(base.m()),
        }
    }

    pub fn from_mask(base: &'g BaseGraph, mask: u64) -> Self {
        Realization {
            base,
            present: EdgeSet::from_edges(base.m(), (0..base.m()).filter(|&e| mask >> e & 1 == 1)),
        }
    }

    pub fn base(&self) -> &'g BaseGraph {
        self.base
    }

    pub fn present(&self) -> &EdgeSet {
        &self.present
    }

    pub fn is_present(&self, e: usize) -> bool {
        self.present.contains(e)
    }

    pub fn realized_count(&self) -> usize {
        self.present.len()
    }

    /// Realized edges as endpoint pairs.
    pub fn realized_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.present.iter().map(|e| self.base.edge(e))
    }

    /// `N_{G*}(v)`.
    pub fn realized_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.base
            .adjacency(v)
            .iter()
            .filter(|&&(_, e)| self.present.contains(e))
            .map(|&(w, _)| w)
    }

    /// The same realization seen through an induced subgraph of its base.
    pub fn restrict<'s>(&self, sub: &'s InducedSubgraph) -> Realization<'s> {
        let present = EdgeSet::from_edges(
            sub.graph.m(),
            sub.edge_map
                .iter()
                .enumerate()
                .filter(|&(_, &orig)| self.present.contains(orig))
                .map(|(new, _)| new),
        );
        Realization {
            base: &sub.graph,
            present,
        }
    }

    /// The outcomes of the edges in `fixed`, as a partial realization.
    pub fn restrict_edges(&self, fixed: &EdgeSet) -> PartialRealization {
        let outcomes =
            EdgeSet::from_edges(fixed.universe(), fixed.iter().filter(|&e| self.present.contains(e)));
        PartialRealization {
            fixed_edges: fixed.clone(),
            fixed_outcomes: outcomes,
        }
    }

    /// Realized edges with neither endpoint in `cover`.
    pub fn uncovered_by(&self, cover: &VertexSet) -> usize {
        self.realized_edges()
            .filter(|&(u, v)| !cover.contains(u) && !cover.contains(v))
            .count()
    }

    /// Realized neighbor masks. Requires `n <= 64`.
    pub(crate) fn adjacency_masks(&self) -> Vec<u64> {
        let mut adj = alloc::vec![0u64; self.base.n()];
        for (u, v) in self.realized_edges() {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        adj
    }
}

/// Outcomes fixed on an edge subset `F`; everything outside `F` is left to
/// be sampled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialRealization {
    fixed_edges: EdgeSet,
    fixed_outcomes: EdgeSet,
}

impl PartialRealization {
    /// `fixed_outcomes` holds the edges of `fixed_edges` that are present.
    pub fn new(fixed_edges: EdgeSet, fixed_outcomes: EdgeSet) -> Result<Self> {
        if fixed_edges.universe() != fixed_outcomes.universe() {
            return Err(Error::Contract("fixed edges and outcomes differ in length".into()));
        }
        if let Some(e) = fixed_outcomes.iter().find(|&e| !fixed_edges.contains(e)) {
            return Err(Error::Contract(format!("outcome given for unfixed edge {e}")));
        }
        Ok(PartialRealization {
            fixed_edges,
            fixed_outcomes,
        })
    }

    /// Nothing fixed.
    pub fn none(m: usize) -> Self {
        PartialRealization {
            fixed_edges: EdgeSet::new(m),
            fixed_outcomes: EdgeSet::new(m),
        }
    }

    pub fn fixed_edges(&self) -> &EdgeSet {
        &self.fixed_edges
    }

    pub fn fixed_outcomes(&self) -> &EdgeSet {
        &self.fixed_outcomes
    }

    pub fn outcome(&self, e: usize) -> Option<bool> {
        self.fixed_edges
            .contains(e)
            .then(|| self.fixed_outcomes.contains(e))
    }
}

fn draw_present(g: &BaseGraph, p: f64, seed: &SeedSpec, trial: u64) -> EdgeSet {
    let mut rng = seed.trial_rng(trial);
    let mut present = EdgeSet::new(g.m());
    for e in 0..g.m() {
        if rng.bernoulli(p) {
            present.insert(e);
        }
    }
    present
}

/// Samples trial `trial` of `G_p`. Edge `e` is decided by draw `e` of the
/// trial's stream, so the result does not depend on evaluation order.
pub fn sample_realization<'g>(
    g: &'g BaseGraph,
    p: f64,
    seed: &SeedSpec,
    trial: u64,
) -> Result<Realization<'g>> {
    check_probability(p)?;
    Ok(Realization {
        base: g,
        present: draw_present(g, p, seed, trial),
    })
}

/// Samples trial `trial` with the edges of `partial` forced to their fixed
/// outcomes. Unfixed edges use the same draws as [`sample_realization`].
pub fn sample_conditional<'g>(
    g: &'g BaseGraph,
    p: f64,
    partial: &PartialRealization,
    seed: &SeedSpec,
    trial: u64,
) -> Result<Realization<'g>> {
    check_probability(p)?;
    if partial.fixed_edges.universe() != g.m() {
        return Err(Error::Contract(format!(
            "partial realization over {} edges for a graph with {}",
            partial.fixed_edges.universe(),
            g.m()
        )));
    }
    let mut present = draw_present(g, p, seed, trial);
    for e in partial.fixed_edges.iter() {
        if partial.fixed_outcomes.contains(e) {
            present.insert(e);
        } else {
            present.remove(e);
        }
    }
    Ok(Realization { base: g, present })
}

/// Probability weight `p^k (1-p)^(m-k)` of a realization with `k` edges.
pub fn realization_weight(p: f64, present: usize, m: usize) -> f64 {
    crate::math::powi(p, present as i32) * crate::math::powi(1.0 - p, (m - present) as i32)
}

/// All `2^m` realizations with their probability weights, in increasing
/// order of the presence bit mask.
pub fn enumerate_realizations(
    g: &BaseGraph,
    p: f64,
) -> Result<impl Iterator<Item = (Realization<'_>, f64)> + '_> {
    check_probability(p)?;
    let m = g.m();
    if m > EXACT_EDGE_CAP {
        return Err(Error::capacity("edge count for exact enumeration", m, EXACT_EDGE_CAP));
    }
    Ok((0u64..1 << m).map(move |mask| {
        let weight = realization_weight(p, mask.count_ones() as usize, m);
        (Realization::from_mask(g, mask), weight)
    }))
}

/// Answers edge queries against a hidden realization, restricted to a query
/// set fixed in advance and to a budget of distinct queried edges.
#[derive(Debug)]
pub struct QueryOracle<'g> {
    realization: Realization<'g>,
    allowed: EdgeSet,
    answered: EdgeSet,
    queries_used: u64,
    budget: u64,
}

impl<'g> QueryOracle<'g> {
    pub fn new(realization: Realization<'g>, allowed: EdgeSet, budget: u64) -> Result<Self> {
        if allowed.universe() != realization.base.m() {
            return Err(Error::Contract("query set does not match the base graph".into()));
        }
        let m = allowed.universe();
        Ok(QueryOracle {
            realization,
            allowed,
            answered: EdgeSet::new(m),
            queries_used: 0,
            budget,
        })
    }

    /// Reveals whether edge `e` is realized. Repeat queries are free.
    pub fn query(&mut self, e: usize) -> Result<bool> {
        if e >= self.allowed.universe() || !self.allowed.contains(e) {
            return Err(Error::ModelViolation(e));
        }
        if !self.answered.contains(e) {
            if self.queries_used >= self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            self.queries_used += 1;
            self.answered.insert(e);
        }
        Ok(self.realization.is_present(e))
    }

    pub fn base(&self) -> &'g BaseGraph {
        self.realization.base
    }

    pub fn allowed(&self) -> &EdgeSet {
        &self.allowed
    }

    pub fn queries_used(&self) -> u64 {
        self.queries_used
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Realized edges left uncovered by `cover`, checked against the hidden
    /// realization. Used only to audit outputs, never to choose them.
    pub fn audit_uncovered(&self, cover: &VertexSet) -> usize {
        self.realization.uncovered_by(cover)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> BaseGraph {
        BaseGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn full_probability_keeps_every_edge() {
        let g = triangle();
        let r = sample_realization(&g, 1.0, &SeedSpec::new(99), 5).unwrap();
        assert_eq!(r.realized_count(), 3);
    }

    #[test]
    fn rejects_bad_probability() {
        let g = triangle();
        for p in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                sample_realization(&g, p, &SeedSpec::new(1), 0),
                Err(Error::Parameter(_))
            ));
        }
    }

    #[test]
    fn conditional_with_everything_fixed_is_the_fixed_outcome() {
        let g = triangle();
        let partial =
            PartialRealization::new(EdgeSet::full(3), EdgeSet::from_edges(3, [1])).unwrap();
        for t in 0..20 {
            let r = sample_conditional(&g, 0.5, &partial, &SeedSpec::new(3), t).unwrap();
            assert_eq!(r.present(), &EdgeSet::from_edges(3, [1]));
        }
    }

    #[test]
    fn conditional_with_nothing_fixed_matches_unconditional() {
        let g = triangle();
        let seed = SeedSpec::new(4);
        for t in 0..20 {
            let a = sample_realization(&g, 0.5, &seed, t).unwrap();
            let b = sample_conditional(&g, 0.5, &PartialRealization::none(3), &seed, t).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn enumeration_examples() {
        let edge = BaseGraph::from_edges(2, [(0, 1)]).unwrap();
        let items: Vec<_> = enumerate_realizations(&edge, 0.3).unwrap().collect();
        assert_eq!(items.len(), 2);
        assert!((items[0].1 - 0.7).abs() < 1e-15);
        assert!((items[1].1 - 0.3).abs() < 1e-15);

        let total: f64 = enumerate_realizations(&triangle(), 0.37)
            .unwrap()
            .map(|(_, w)| w)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);

        let empty = BaseGraph::empty(4);
        let items: Vec<_> = enumerate_realizations(&empty, 0.5).unwrap().collect();
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].1, 1.0);
    }

    #[test]
    fn enumeration_capacity() {
        let n = 8;
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        let g = BaseGraph::from_edges(n, edges).unwrap();
        assert!(matches!(
            enumerate_realizations(&g, 0.5).err(),
            Some(Error::Capacity { .. })
        ));
    }

    #[test]
    fn oracle_memoizes_and_enforces_the_model() {
        let g = triangle();
        let r = Realization::full(&g);
        let mut oracle = QueryOracle::new(r, EdgeSet::from_edges(3, [0]), 1).unwrap();
        assert!(oracle.query(0).unwrap());
        assert_eq!(oracle.queries_used(), 1);
        assert!(oracle.query(0).unwrap());
        assert_eq!(oracle.queries_used(), 1);
        assert_eq!(oracle.query(1), Err(Error::ModelViolation(1)));
    }

    #[test]
    fn oracle_budget() {
        let g = triangle();
        let mut oracle = QueryOracle::new(Realization::full(&g), EdgeSet::full(3), 2).unwrap();
        oracle.query(0).unwrap();
        oracle.query(1).unwrap();
        assert_eq!(oracle.query(2), Err(Error::BudgetExceeded(2)));
    }
}
