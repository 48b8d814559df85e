//! The L/M/S partition, DECIDED/UNDECIDED/PROBLEMATIC, the vertex-seed loop
//! and the seed sets built from it.
//!
//! All set-valued functions take the full base graph together with the set
//! `M`; "restricted to `M`" means only edges with both endpoints in `M` are
//! looked at.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimate::{low_bits, sweep, Estimator, ProbEstimate};
use crate::graph::{BaseGraph, EdgeSet, VertexSet};
use crate::math;
use crate::mvc;
use crate::realization::{check_probability, PartialRealization, Realization};
use crate::rng::tags;
use crate::MVC_VERTEX_CAP;

/// Monte-Carlo trials per probability test in the vertex-seed loop.
pub const DELTA_TRIALS: usize = 4000;

/// Parameters derived from `ε` and `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedParams {
    pub epsilon: f64,
    pub p: f64,
    /// `δ = ε²`.
    pub delta: f64,
    /// `γ = ε⁵/10³` unless built with [`SeedParams::scaled`].
    pub gamma: f64,
    /// `1/(p·γ)`.
    pub degree_threshold: f64,
    /// Edge budget for `G[V \ S]`: `⌈2n/(p·γ)⌉`, i.e. `⌈2·10³·n/(ε⁵p)⌉`.
    pub query_budget: u64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 && epsilon < 0.25 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("epsilon must lie in (0, 1/4), got {epsilon}")))
    }
}

fn budget_for(n: usize, p: f64, gamma: f64) -> u64 {
    let b = math::ceil(2.0 * n as f64 / (p * gamma));
    if b >= u64::MAX as f64 {
        u64::MAX
    } else {
        b as u64
    }
}

impl SeedParams {
    pub fn new(epsilon: f64, p: f64, n: usize) -> Result<Self> {
        SeedParams::scaled(epsilon, p, n, math::powi(epsilon, 5) / 1e3)
    }

    /// Same construction with `γ` supplied by the caller. The analysis
    /// constants make `1/(p·γ)` astronomically large for small graphs, so
    /// experiments that want the seed machinery to do anything at desk scale
    /// pick a larger `γ`. `δ` stays `ε²`.
    pub fn scaled(epsilon: f64, p: f64, n: usize, gamma: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        check_probability(p)?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Parameter(format!("gamma must be positive, got {gamma}")));
        }
        Ok(SeedParams {
            epsilon,
            p,
            delta: epsilon * epsilon,
            gamma,
            degree_threshold: 1.0 / (p * gamma),
            query_budget: budget_for(n, p, gamma),
        })
    }

    pub fn with_query_budget(mut self, budget: u64) -> Self {
        self.query_budget = budget;
        self
    }

    /// Bound `(10γ/δ)·n` on the length of the vertex-seed sequence.
    pub fn q_length_bound(&self, n: usize) -> f64 {
        10.0 * self.gamma / self.delta * n as f64
    }

    /// Whether `n ≥ 4·ln(2/δ)`, the size condition under which the length
    /// bound is guaranteed.
    pub fn q_bound_applies(&self, n: usize) -> bool {
        n as f64 >= 4.0 * math::ln(2.0 / self.delta)
    }

    /// `count ≥ 1/(p·γ)`, with a relative tolerance so that thresholds that
    /// are integers in exact arithmetic are not lost to rounding.
    pub fn reaches_threshold(&self, count: usize) -> bool {
        count as f64 >= self.degree_threshold * (1.0 - 1e-12)
    }
}

/// `L = {c_v ≥ 1−2ε}`, `S = {c_v ≤ ε}`, `M` the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct LmsPartition {
    pub l: VertexSet,
    pub m: VertexSet,
    pub s: VertexSet,
    pub epsilon: f64,
}

pub fn partition_lms(c: &[f64], epsilon: f64) -> Result<LmsPartition> {
    check_epsilon(epsilon)?;
    let n = c.len();
    let mut part = LmsPartition {
        l: VertexSet::new(n),
        m: VertexSet::new(n),
        s: VertexSet::new(n),
        epsilon,
    };
    for (v, &cv) in c.iter().enumerate() {
        if !(-1e-9..=1.0 + 1e-9).contains(&cv) {
            return Err(Error::Parameter(format!("c_{v} = {cv} is not a probability")));
        }
        if cv >= 1.0 - 2.0 * epsilon {
            part.l.insert(v);
        } else if cv <= epsilon {
            part.s.insert(v);
        } else {
            part.m.insert(v);
        }
    }
    Ok(part)
}

fn check_cover_within(g: &BaseGraph, m_set: &VertexSet, r: &Realization<'_>, vc: &VertexSet) -> Result<()> {
    let within = |u: usize, v: usize| m_set.contains(u) && m_set.contains(v);
    match r
        .realized_edges()
        .find(|&(u, v)| within(u, v) && !vc.contains(u) && !vc.contains(v))
    {
        Some((u, v)) => Err(Error::Contract(format!(
            "vc leaves the realized edge ({u}, {v}) inside M uncovered"
        ))),
        None => {
            debug_assert_eq!(r.base().n(), g.n());
            Ok(())
        }
    }
}

fn check_q(m_set: &VertexSet, q: &[usize]) -> Result<()> {
    match q.iter().find(|&&v| !m_set.contains(v)) {
        Some(v) => Err(Error::Contract(format!("vertex {v} of Q is not in M"))),
        None => Ok(()),
    }
}

/// `{v ∈ M∖Q : v has a realized neighbor in Q∖vc}`.
pub fn decided(
    g: &BaseGraph,
    m_set: &VertexSet,
    q: &[usize],
    r: &Realization<'_>,
    vc: &VertexSet,
) -> Result<VertexSet> {
    check_q(m_set, q)?;
    check_cover_within(g, m_set, r, vc)?;
    let q_set = VertexSet::from_vertices(g.n(), q.iter().copied());
    let free_q = q_set.difference(vc);
    Ok(VertexSet::from_vertices(
        g.n(),
        m_set
            .difference(&q_set)
            .iter()
            .filter(|&v| r.realized_neighbors(v).any(|w| free_q.contains(w))),
    ))
}

/// `(M∖Q) ∖ DECIDED`.
pub fn undecided(
    g: &BaseGraph,
    m_set: &VertexSet,
    q: &[usize],
    r: &Realization<'_>,
    vc: &VertexSet,
) -> Result<VertexSet> {
    let dec = decided(g, m_set, q, r, vc)?;
    let q_set = VertexSet::from_vertices(g.n(), q.iter().copied());
    Ok(m_set.difference(&q_set).difference(&dec))
}

fn threshold_set(
    g: &BaseGraph,
    m_set: &VertexSet,
    q: &[usize],
    und: &VertexSet,
    params: &SeedParams,
    exclude: Option<&VertexSet>,
) -> VertexSet {
    let q_set = VertexSet::from_vertices(g.n(), q.iter().copied());
    VertexSet::from_vertices(
        g.n(),
        m_set.difference(&q_set).iter().filter(|&v| {
            exclude.is_none_or(|vc| !vc.contains(v))
                && params.reaches_threshold(g.neighbors(v).filter(|&w| und.contains(w)).count())
        }),
    )
}

/// `{v ∈ M∖Q : v ∉ vc and |N_{G[M]}(v) ∩ UNDECIDED| ≥ 1/(p·γ)}`.
pub fn problematic(
    g: &BaseGraph,
    m_set: &VertexSet,
    q: &[usize],
    r: &Realization<'_>,
    vc: &VertexSet,
    params: &SeedParams,
) -> Result<VertexSet> {
    let und = undecided(g, m_set, q, r, vc)?;
    Ok(threshold_set(g, m_set, q, &und, params, Some(vc)))
}

/// `{v ∈ M∖Q : |N_{G[M]}(v) ∩ UNDECIDED| ≥ 1/(p·γ)}`.
pub fn set_a(
    g: &BaseGraph,
    m_set: &VertexSet,
    q: &[usize],
    r: &Realization<'_>,
    vc: &VertexSet,
    params: &SeedParams,
) -> Result<VertexSet> {
    let und = undecided(g, m_set, q, r, vc)?;
    Ok(threshold_set(g, m_set, q, &und, params, None))
}

/// One iteration of the vertex-seed loop.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedStep {
    pub iteration: usize,
    /// Vertex appended in this iteration; `None` on the terminating one.
    pub chosen: Option<usize>,
    /// Largest estimated `Pr[v ∈ PROBLEMATIC]` among candidates (0 if none).
    pub best: ProbEstimate,
    pub candidates: usize,
    pub undecided_mean: f64,
    pub undecided_min: u32,
    pub undecided_max: u32,
}

/// The sequence `Q` with the estimate that admitted each vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSequence {
    pub order: Vec<usize>,
    pub estimates: Vec<ProbEstimate>,
    pub trace: Vec<SeedStep>,
}

impl SeedSequence {
    pub fn as_set(&self, n: usize) -> VertexSet {
        VertexSet::from_vertices(n, self.order.iter().copied())
    }
}

/// Mask version of PROBLEMATIC for one realization, with `|UNDECIDED|`.
/// `base_m[v]` is `v`'s neighbor mask in `G[M]`.
fn problematic_mask(
    realized: &[u64],
    base_m: &[u64],
    m_mask: u64,
    q_mask: u64,
    params: &SeedParams,
) -> (u64, u32) {
    let n = realized.len();
    let cover = mvc::canonical_cover_mask(realized, low_bits(n));
    let vc = cover & m_mask;
    let free_q = q_mask & !vc;
    let rest = m_mask & !q_mask;
    let mut und = 0u64;
    for v in bits(rest) {
        if realized[v] & free_q == 0 {
            und |= 1 << v;
        }
    }
    let mut prob = 0u64;
    for v in bits(rest & !vc) {
        if params.reaches_threshold((base_m[v] & und).count_ones() as usize) {
            prob |= 1 << v;
        }
    }
    (prob, und.count_ones())
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    core::iter::from_fn(move || {
        (mask != 0).then(|| {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            v
        })
    })
}

/// Greedy vertex-seed loop over `M`.
///
/// Each iteration estimates `q_v = Pr[v ∈ PROBLEMATIC(Q, G*)]` for every
/// `v ∈ M∖Q` (with `VC = MVC(G*) ∩ M`) and appends the largest, lowest id
/// first on ties, while it is at least `δ`. Monte-Carlo iterations use fresh
/// realizations: iteration `i` samples from substream `i` of `est.seed`.
pub fn vertex_seed(
    g: &BaseGraph,
    m_set: &VertexSet,
    params: &SeedParams,
    est: &Estimator,
) -> Result<SeedSequence> {
    let n = g.n();
    let mut seq = SeedSequence {
        order: Vec::new(),
        estimates: Vec::new(),
        trace: Vec::new(),
    };
    // Only vertices whose degree in G[M] reaches the threshold can ever be
    // PROBLEMATIC.
    let eligible: Vec<usize> = m_set
        .iter()
        .filter(|&v| params.reaches_threshold(g.neighbors(v).filter(|&w| m_set.contains(w)).count()))
        .collect();
    if eligible.is_empty() {
        seq.trace.push(SeedStep {
            iteration: 0,
            chosen: None,
            best: ProbEstimate::exact(0.0),
            candidates: m_set.len(),
            undecided_mean: m_set.len() as f64,
            undecided_min: m_set.len() as u32,
            undecided_max: m_set.len() as u32,
        });
        return Ok(seq);
    }
    if n > MVC_VERTEX_CAP {
        return Err(Error::capacity("vertex count for exact cover", n, MVC_VERTEX_CAP));
    }

    let m_mask = m_set.to_mask();
    let base_adj = g.adjacency_masks();
    let base_m: Vec<u64> = base_adj.iter().map(|&a| a & m_mask).collect();
    let stream = est.seed.substream(tags::VERTEX_SEED);
    let mut q_mask = 0u64;

    for iteration in 0.. {
        let iter_est = Estimator {
            seed: stream.substream(iteration as u64),
            ..*est
        };
        let q_now = q_mask;
        let samples = sweep(g, params.p, &iter_est, |r| {
            problematic_mask(&r.adjacency_masks(), &base_m, m_mask, q_now, params)
        })?;

        let mut best: Option<(usize, ProbEstimate)> = None;
        for &v in eligible.iter().filter(|&&v| q_mask >> v & 1 == 0) {
            let e = samples.estimate(|&(prob, _)| (prob >> v & 1) as f64);
            if best.is_none_or(|(_, b)| e.mean > b.mean) {
                best = Some((v, e));
            }
        }
        let und = samples.estimate(|&(_, u)| u as f64);
        let candidates = (m_mask & !q_mask).count_ones() as usize;
        let (und_min, und_max) = samples
            .items
            .iter()
            .fold((u32::MAX, 0), |(lo, hi), &(_, u)| (lo.min(u), hi.max(u)));
        let chosen = best.filter(|(_, e)| e.mean >= params.delta);
        seq.trace.push(SeedStep {
            iteration,
            chosen: chosen.map(|(v, _)| v),
            best: best.map_or(ProbEstimate::exact(0.0), |(_, e)| e),
            candidates,
            undecided_mean: und.mean,
            undecided_min: und_min,
            undecided_max: und_max,
        });
        match chosen {
            Some((v, e)) => {
                q_mask |= 1 << v;
                seq.order.push(v);
                seq.estimates.push(e);
            }
            None => break,
        }
    }
    Ok(seq)
}

/// `SEED(Q_VC, F★) = L ∪ Q ∪ DECIDED(Q_VC, F★) ∪ A(Q_VC, F★)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedSet {
    pub l_part: VertexSet,
    pub q_part: VertexSet,
    pub decided_part: VertexSet,
    pub a_part: VertexSet,
    pub union: VertexSet,
    /// Edge count of `G[V ∖ union]`.
    pub residual_edges: usize,
}

/// Builds the seed set from the cover/non-cover split of `Q` and the
/// outcomes `F★` of the edges `F` incident to `Q`.
pub fn seed_set(
    g: &BaseGraph,
    partition: &LmsPartition,
    q: &[usize],
    q_vc: &VertexSet,
    f_star: &PartialRealization,
    params: &SeedParams,
) -> Result<SeedSet> {
    let n = g.n();
    check_q(&partition.m, q)?;
    let q_set = VertexSet::from_vertices(n, q.iter().copied());
    if !q_vc.is_subset(&q_set) {
        return Err(Error::Contract("Q_VC is not a subset of Q".into()));
    }
    let f = g.incident_edges(&q_set);
    if f_star.fixed_edges() != &f {
        return Err(Error::Contract(
            "F★ must fix exactly the edges incident to Q".into(),
        ));
    }
    let free_q = q_set.difference(q_vc);
    let rest = partition.m.difference(&q_set);
    let mut dec = VertexSet::new(n);
    for e in f_star.fixed_outcomes().iter() {
        let (u, v) = g.edge(e);
        if rest.contains(u) && free_q.contains(v) {
            dec.insert(u);
        }
        if rest.contains(v) && free_q.contains(u) {
            dec.insert(v);
        }
    }
    let und = rest.difference(&dec);
    let a = threshold_set(g, &partition.m, q, &und, params, None);
    let union = partition.l.union(&q_set).union(&dec).union(&a);
    let residual_edges = g.residual_edges(&union);
    Ok(SeedSet {
        l_part: partition.l.clone(),
        q_part: q_set,
        decided_part: dec,
        a_part: a,
        union,
        residual_edges,
    })
}

/// `SEED(G*)`: the seed set indexed by `Q ∩ MVC(G*)` and the outcomes of
/// the edges incident to `Q` in `G*`.
pub fn seed_of_realization(
    r: &Realization<'_>,
    partition: &LmsPartition,
    q: &[usize],
    params: &SeedParams,
) -> Result<SeedSet> {
    let g = r.base();
    let cover = mvc::mvc_exact(r)?.cover;
    let q_set = VertexSet::from_vertices(g.n(), q.iter().copied());
    let q_vc = q_set.intersection(&cover);
    let f_star = r.restrict_edges(&g.incident_edges(&q_set));
    seed_set(g, partition, q, &q_vc, &f_star, params)
}

/// The edge set `F` (edges with an endpoint in `Q`).
pub fn incident_to_q(g: &BaseGraph, q: &[usize]) -> EdgeSet {
    g.incident_edges(&VertexSet::from_vertices(g.n(), q.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realization::sample_realization;
    use crate::rng::SeedSpec;

    fn star(d: usize) -> BaseGraph {
        BaseGraph::from_edges(d + 1, (1..=d).map(|v| (0, v))).unwrap()
    }

    /// Parameters with an exact small threshold `1/(p·γ) = k`.
    fn params_with_threshold(p: f64, n: usize, k: f64) -> SeedParams {
        SeedParams::scaled(0.2, p, n, 1.0 / (p * k)).unwrap()
    }

    #[test]
    fn derived_parameters() {
        let sp = SeedParams::new(0.1, 0.5, 10).unwrap();
        assert!((sp.delta - 0.01).abs() < 1e-15);
        assert!((sp.gamma - 1e-8).abs() < 1e-20);
        assert!((sp.degree_threshold - 2e8).abs() < 1.0);
        assert_eq!(sp.query_budget, 4_000_000_000);
        assert!(SeedParams::new(0.25, 0.5, 10).is_err());
        assert!(SeedParams::new(0.0, 0.5, 10).is_err());
    }

    #[test]
    fn partition_examples() {
        let part = partition_lms(&[1.0, 0.0, 0.5], 0.1).unwrap();
        assert_eq!(part.l.to_vec(), [0]);
        assert_eq!(part.s.to_vec(), [1]);
        assert_eq!(part.m.to_vec(), [2]);
        let part = partition_lms(&[0.0; 4], 0.1).unwrap();
        assert_eq!(part.s.len(), 4);
        let part = partition_lms(&[0.1, 0.8], 0.1).unwrap();
        assert!(part.s.contains(0));
        assert!(part.l.contains(1));
        assert!(partition_lms(&[0.5], 0.3).is_err());
    }

    #[test]
    fn decided_examples() {
        let g = star(3);
        let all = VertexSet::full(4);
        let r = Realization::full(&g);
        let leaves = VertexSet::from_vertices(4, [1, 2, 3]);
        assert!(decided(&g, &all, &[], &r, &VertexSet::from_vertices(4, [0]))
            .unwrap()
            .is_empty());
        assert!(decided(&g, &all, &[0], &r, &VertexSet::from_vertices(4, [0]))
            .unwrap()
            .is_empty());
        assert_eq!(decided(&g, &all, &[0], &r, &leaves).unwrap(), leaves);
        assert!(matches!(
            decided(&g, &all, &[0], &r, &VertexSet::new(4)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn problematic_and_a_on_a_star() {
        let g = star(4);
        let all = VertexSet::full(5);
        let r = Realization::full(&g);
        let sp = params_with_threshold(1.0, 5, 4.0);
        let leaves = VertexSet::from_vertices(5, 1..5);
        let center = VertexSet::from_vertices(5, [0]);
        assert_eq!(problematic(&g, &all, &[], &r, &leaves, &sp).unwrap(), center);
        assert!(problematic(&g, &all, &[], &r, &center, &sp).unwrap().is_empty());
        assert_eq!(set_a(&g, &all, &[], &r, &center, &sp).unwrap(), center);
        let high = params_with_threshold(1.0, 5, 6.0);
        assert!(set_a(&g, &all, &[], &r, &center, &high).unwrap().is_empty());
    }

    #[test]
    fn empty_m_gives_empty_q() {
        let g = star(3);
        let sp = params_with_threshold(0.5, 4, 2.0);
        let seq = vertex_seed(&g, &VertexSet::new(4), &sp, &Estimator::exact()).unwrap();
        assert!(seq.order.is_empty());
        let sp = SeedParams::new(0.2, 0.5, 4).unwrap();
        let seq = vertex_seed(&g, &VertexSet::full(4), &sp, &Estimator::exact()).unwrap();
        assert!(seq.order.is_empty());
    }

    #[test]
    fn mask_path_matches_set_path() {
        let g = BaseGraph::from_edges(
            7,
            [(0, 1), (0, 2), (0, 3), (1, 2), (3, 4), (4, 5), (5, 6), (2, 6), (1, 5)],
        )
        .unwrap();
        let m_set = VertexSet::from_vertices(7, [0, 1, 2, 4, 5, 6]);
        let sp = params_with_threshold(0.5, 7, 2.0);
        let base_m: Vec<u64> = g.adjacency_masks().iter().map(|a| a & m_set.to_mask()).collect();
        let q = [1usize, 5];
        let q_mask = VertexSet::from_vertices(7, q).to_mask();
        for t in 0..64 {
            let r = sample_realization(&g, 0.5, &SeedSpec::new(8), t).unwrap();
            let vc = mvc::mvc_exact(&r).unwrap().cover.intersection(&m_set);
            let expect = problematic(&g, &m_set, &q, &r, &vc, &sp).unwrap();
            let und = undecided(&g, &m_set, &q, &r, &vc).unwrap();
            let (mask, und_count) =
                problematic_mask(&r.adjacency_masks(), &base_m, m_set.to_mask(), q_mask, &sp);
            assert_eq!(mask, expect.to_mask());
            assert_eq!(und_count as usize, und.len());
        }
    }

    #[test]
    fn seed_set_contracts() {
        let g = star(3);
        let part = partition_lms(&[0.5, 0.5, 0.5, 0.5], 0.2).unwrap();
        let sp = params_with_threshold(0.5, 4, 2.0);
        let f = incident_to_q(&g, &[0]);
        let f_star = PartialRealization::new(f.clone(), EdgeSet::new(3)).unwrap();
        assert!(seed_set(&g, &part, &[0], &VertexSet::from_vertices(4, [1]), &f_star, &sp).is_err());
        let wrong = PartialRealization::none(3);
        assert!(seed_set(&g, &part, &[0], &VertexSet::new(4), &wrong, &sp).is_err());
        // Q_VC = Q: nothing decided.
        let all_present = PartialRealization::new(f.clone(), f.clone()).unwrap();
        let s = seed_set(&g, &part, &[0], &VertexSet::from_vertices(4, [0]), &all_present, &sp).unwrap();
        assert!(s.decided_part.is_empty());
        // Q_VC = ∅ with every edge present: all leaves decided.
        let s = seed_set(&g, &part, &[0], &VertexSet::new(4), &all_present, &sp).unwrap();
        assert_eq!(s.decided_part.to_vec(), [1, 2, 3]);
        assert_eq!(s.residual_edges, 0);
    }

    #[test]
    fn seed_of_realization_examples() {
        let tri = BaseGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let part = partition_lms(&[1.0, 1.0, 1.0], 0.1).unwrap();
        let sp = SeedParams::new(0.1, 1.0, 3).unwrap();
        let s = seed_of_realization(&Realization::full(&tri), &part, &[], &sp).unwrap();
        assert_eq!(s.union, VertexSet::full(3));
    }
}
