//! Greedy matching order, forward degrees, and the concentration harness for
//! `Z = |MVC(G*)|`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimate::{sweep, Estimator, ProbEstimate};
use crate::graph::{BaseGraph, VertexSet};
use crate::math;
use crate::mvc;
use crate::par;
use crate::realization::{check_probability, sample_realization};
use crate::rng::{tags, SeedSpec};

/// `c = C = 2(e/(e−1) + 2)`.
pub const STRUCTURAL_CONSTANT: f64 =
    2.0 * (core::f64::consts::E / (core::f64::consts::E - 1.0) + 2.0);

/// Default simulations per step of [`greedy_ordering`].
pub const ORDERING_TRIALS: usize = 2000;

/// Default number of points in the `t` grid of [`empirical_tail`].
pub const TAIL_GRID_POINTS: usize = 20;

/// Vertex order built by repeatedly appending the vertex most likely to be
/// matched into the current prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyOrdering {
    pub pi: Vec<usize>,
    /// Estimate of `p(pi[i] | pi[..i])` at the time `pi[i]` was chosen.
    pub matched_prob: Vec<ProbEstimate>,
}

/// One simulation of the prefix matching: returns the mask of vertices
/// matched during the process.
///
/// Each unmatched `prefix[i]` in turn picks uniformly among its realized
/// neighbors that are still unmatched and not among `prefix[..i]`.
fn simulate_prefix(adj: &[u64], prefix: &[usize], choice: &mut crate::rng::TrialRng) -> u64 {
    let mut matched = 0u64;
    let mut earlier = 0u64;
    for &v in prefix {
        if matched >> v & 1 == 0 {
            let options = adj[v] & !matched & !earlier;
            let k = options.count_ones() as usize;
            if k > 0 {
                let mut rest = options;
                for _ in 0..choice.index(k) {
                    rest &= rest - 1;
                }
                let w = rest.trailing_zeros() as usize;
                matched |= 1 << v | 1 << w;
            }
        }
        earlier |= 1 << v;
    }
    matched
}

/// Greedy ordering with `p(v|P)` estimated from `trials_per_step`
/// simulations per step. Realizations come from the `MATCHING_GRAPH`
/// substream and matching choices from `MATCHING_CHOICE`, so the result is
/// a function of the seed alone. Ties go to the lowest id.
pub fn greedy_ordering(
    g: &BaseGraph,
    p: f64,
    trials_per_step: usize,
    seed: &SeedSpec,
) -> Result<GreedyOrdering> {
    check_probability(p)?;
    if trials_per_step == 0 {
        return Err(Error::Parameter("trials_per_step must be at least 1".into()));
    }
    let n = g.n();
    if n > 64 {
        return Err(Error::capacity("vertex count for greedy ordering", n, 64));
    }
    let graphs = seed.substream(tags::MATCHING_GRAPH);
    let choices = seed.substream(tags::MATCHING_CHOICE);
    let realized: Vec<Vec<u64>> = par::map_indexed(trials_per_step, |t| {
        sample_realization(g, p, &graphs, t as u64)
            .expect("p checked above")
            .adjacency_masks()
    });

    let mut pi = Vec::with_capacity(n);
    let mut matched_prob = Vec::with_capacity(n);
    let mut placed = 0u64;
    for step in 0..n {
        let step_choices = choices.substream(step as u64);
        let outcomes: Vec<u64> = if pi.is_empty() {
            Vec::new()
        } else {
            par::map_indexed(trials_per_step, |t| {
                let mut rng = step_choices.trial_rng(t as u64);
                simulate_prefix(&realized[t], &pi, &mut rng)
            })
        };
        let mut best: Option<(usize, ProbEstimate)> = None;
        for v in (0..n).filter(|&v| placed >> v & 1 == 0) {
            let e = if outcomes.is_empty() {
                ProbEstimate {
                    mean: 0.0,
                    half_width: 0.0,
                    trials: trials_per_step,
                    exact: false,
                }
            } else {
                let (mean, half_width, trials) =
                    math::mean_half_width(outcomes.iter().map(|&m| (m >> v & 1) as f64));
                ProbEstimate {
                    mean,
                    half_width,
                    trials,
                    exact: false,
                }
            };
            if best.is_none_or(|(_, b)| e.mean > b.mean) {
                best = Some((v, e));
            }
        }
        let (v, e) = best.expect("an unplaced vertex remains");
        placed |= 1 << v;
        pi.push(v);
        matched_prob.push(e);
        debug_assert!(step + 1 == pi.len());
    }
    Ok(GreedyOrdering { pi, matched_prob })
}

/// `S = {u : p·δ⁺(u) ≥ 1}` with the forward degrees it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralSet {
    pub set: VertexSet,
    pub forward_degrees: Vec<usize>,
    pub constant: f64,
}

/// Forward degrees against `pi` (each edge counted at its earlier endpoint)
/// and the threshold set.
pub fn structural_set(g: &BaseGraph, p: f64, pi: &[usize]) -> Result<StructuralSet> {
    check_probability(p)?;
    let n = g.n();
    let mut pos = alloc::vec![usize::MAX; n];
    if pi.len() != n {
        return Err(Error::Contract(format!("ordering has {} entries for {n} vertices", pi.len())));
    }
    for (i, &v) in pi.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(Error::Contract("ordering is not a permutation".into()));
        }
        pos[v] = i;
    }
    let forward_degrees: Vec<usize> = (0..n)
        .map(|u| g.neighbors(u).filter(|&w| pos[w] > pos[u]).count())
        .collect();
    let set = VertexSet::from_vertices(
        n,
        (0..n).filter(|&u| p * forward_degrees[u] as f64 >= 1.0 - 1e-12),
    );
    Ok(StructuralSet {
        set,
        forward_degrees,
        constant: STRUCTURAL_CONSTANT,
    })
}

/// `|S| ≤ C·opt` and `|E(G[V∖S])| ≤ C·opt/p`, checked against the upper
/// end of the opt estimate's interval.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralReport {
    pub set_size: usize,
    pub set_bound: f64,
    pub residual_edges: usize,
    pub edge_bound: f64,
    pub set_ok: bool,
    pub edges_ok: bool,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.set_ok && self.edges_ok
    }
}

pub fn verify_structural(g: &BaseGraph, p: f64, set: &StructuralSet, opt: &ProbEstimate) -> StructuralReport {
    let opt_hi = opt.upper();
    let set_size = set.set.len();
    let residual_edges = g.residual_edges(&set.set);
    let set_bound = set.constant * opt_hi;
    let edge_bound = set.constant * opt_hi / p;
    StructuralReport {
        set_size,
        set_bound,
        residual_edges,
        edge_bound,
        set_ok: set_size as f64 <= set_bound + 1e-9,
        edges_ok: residual_edges as f64 <= edge_bound + 1e-9,
    }
}

fn check_tail_args(t: f64, opt: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0 && opt.is_finite() && opt >= 0.0) {
        return Err(Error::Parameter(format!("need t ≥ 0 and opt ≥ 0, got t = {t}, opt = {opt}")));
    }
    Ok(())
}

/// `2·exp(−t²/(4C·opt + 2t/3))`.
pub fn freedman_bound(t: f64, opt: f64, c: f64) -> Result<f64> {
    check_tail_args(t, opt)?;
    if t == 0.0 {
        return Ok(2.0);
    }
    Ok(2.0 * math::exp(-t * t / (4.0 * c * opt + 2.0 * t / 3.0)))
}

/// `2·exp(−t²/(33·opt))`, defined for `t ≤ opt`.
pub fn corollary_bound(t: f64, opt: f64) -> Result<f64> {
    check_tail_args(t, opt)?;
    if t > opt {
        return Err(Error::Parameter(format!("corollary bound needs t ≤ opt, got t = {t} > {opt}")));
    }
    if t == 0.0 {
        return Ok(2.0);
    }
    Ok(2.0 * math::exp(-(t * t / 33.0) / opt))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailRow {
    pub t: f64,
    /// Frequency (or exact probability) of `|Z − opt| ≥ t`.
    pub empirical: f64,
    /// Binomial standard error of `empirical` (0 when exact).
    pub std_error: f64,
    pub freedman: f64,
    /// Present for `t ≤ opt`.
    pub corollary: Option<f64>,
}

impl TailRow {
    /// Whether each bound dominates the empirical tail up to `k` standard
    /// errors.
    pub fn dominated(&self, k: f64) -> bool {
        let lhs = self.empirical - k * self.std_error;
        lhs <= self.freedman + 1e-12 && self.corollary.is_none_or(|b| lhs <= b + 1e-12)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub opt: f64,
    pub sample_size: usize,
    pub exact: bool,
    pub constant: f64,
    pub rows: Vec<TailRow>,
}

/// `count` evenly spaced points in `[0, 2·opt]`.
pub fn default_grid(opt: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => (0..count).map(|i| 2.0 * opt * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Tail of a distribution of `Z` given as values with optional weights
/// (equal weights when `None`).
pub fn tail_from_distribution(
    values: &[f64],
    weights: Option<&[f64]>,
    opt: f64,
    grid: &[f64],
) -> Result<TailReport> {
    let mut grid = grid.to_vec();
    grid.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    let rows = grid
        .iter()
        .map(|&t| {
            let hit = |z: f64| (z - opt).abs() >= t - 1e-9;
            let (empirical, std_error) = match weights {
                Some(w) => (
                    values.iter().zip(w).filter(|(&z, _)| hit(z)).map(|(_, &w)| w).sum(),
                    0.0,
                ),
                None => {
                    let f = values.iter().filter(|&&z| hit(z)).count() as f64 / n.max(1) as f64;
                    (f, math::bernoulli_se(f, n))
                }
            };
            Ok(TailRow {
                t,
                empirical,
                std_error,
                freedman: freedman_bound(t, opt, STRUCTURAL_CONSTANT)?,
                corollary: if t <= opt { Some(corollary_bound(t, opt)?) } else { None },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TailReport {
        opt,
        sample_size: if weights.is_some() { 0 } else { n },
        exact: weights.is_some(),
        constant: STRUCTURAL_CONSTANT,
        rows,
    })
}

/// Samples `Z = |MVC(G*)|` with `est` and tabulates `Pr[|Z − opt| ≥ t]`
/// against both bounds. `opt` defaults to the estimate from the same
/// samples and `grid` to [`TAIL_GRID_POINTS`] points in `[0, 2·opt]`.
pub fn empirical_tail(
    g: &BaseGraph,
    p: f64,
    est: &Estimator,
    grid: Option<&[f64]>,
    opt: Option<f64>,
) -> Result<TailReport> {
    let comps = mvc::Components::new(g)?;
    let est = Estimator {
        seed: est.seed.substream(tags::TAIL),
        ..*est
    };
    let sizes = sweep(g, p, &est, |r| comps.cover_size(r.present(), None) as f64)?;
    let opt = opt.unwrap_or_else(|| sizes.estimate(|&z| z).mean);
    let grid = match grid {
        Some(grid) => grid.to_vec(),
        None => default_grid(opt, TAIL_GRID_POINTS),
    };
    tail_from_distribution(&sizes.items, sizes.weights.as_deref(), opt, &grid)
}

/// Empirical check of `Pr[|g(S) − E g(S)| > ε·E g(S)] ≤ 2·exp(−ε²·opt/66)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GTailReport {
    pub expected_g: ProbEstimate,
    pub threshold: f64,
    pub frequency: f64,
    pub std_error: f64,
    pub bound: f64,
    pub trials: usize,
}

impl GTailReport {
    pub fn holds(&self, k: f64) -> bool {
        self.frequency - k * self.std_error <= self.bound + 1e-12
    }
}

/// Samples `g(S)` and measures how often it leaves `(1 ± ε)·E[g(S)]`.
/// `opt` enters only the bound.
pub fn g_tail_check(
    g: &BaseGraph,
    p: f64,
    s: &VertexSet,
    epsilon: f64,
    opt: f64,
    est: &Estimator,
) -> Result<GTailReport> {
    let comps = mvc::Components::new(g)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let size = s.len() as f64;
    let est = Estimator {
        seed: est.seed.substream(tags::TAIL),
        ..*est
    };
    let values = sweep(g, p, &est, |r| size + comps.cover_size(r.present(), Some(s)) as f64)?;
    let expected_g = values.estimate(|&x| x);
    let threshold = epsilon * expected_g.mean;
    let dev = values.estimate(|&x| ((x - expected_g.mean).abs() > threshold + 1e-9) as u8 as f64);
    let trials = values.items.len();
    let std_error = if dev.exact {
        0.0
    } else {
        math::bernoulli_se(dev.mean, trials)
    };
    Ok(GTailReport {
        expected_g,
        threshold,
        frequency: dev.mean,
        std_error,
        bound: 2.0 * math::exp(-epsilon * epsilon * opt / 66.0),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BaseGraph;

    #[test]
    fn constant_value() {
        assert!((STRUCTURAL_CONSTANT - 7.163_953_413_738_653).abs() < 1e-12);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(freedman_bound(0.0, 5.0, STRUCTURAL_CONSTANT).unwrap(), 2.0);
        let opt = 40.0;
        let b = corollary_bound(opt, opt).unwrap();
        assert!((b - 2.0 * (-opt / 33.0f64).exp()).abs() < 1e-15);
        assert!(corollary_bound(41.0, 40.0).is_err());
        assert!(freedman_bound(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn edgeless_ordering_is_identity() {
        let g = BaseGraph::empty(5);
        let o = greedy_ordering(&g, 0.5, 10, &SeedSpec::new(1)).unwrap();
        assert_eq!(o.pi, [0, 1, 2, 3, 4]);
        assert!(o.matched_prob.iter().all(|e| e.mean == 0.0));
    }

    #[test]
    fn single_edge_ordering_and_set() {
        let g = BaseGraph::from_edges(2, [(0, 1)]).unwrap();
        let o = greedy_ordering(&g, 1.0, 10, &SeedSpec::new(1)).unwrap();
        assert_eq!(o.pi, [0, 1]);
        let s = structural_set(&g, 1.0, &o.pi).unwrap();
        assert_eq!(s.forward_degrees, [1, 0]);
        assert_eq!(s.set.to_vec(), [0]);
    }

    #[test]
    fn clique_forward_degrees() {
        let n = 5;
        let g = BaseGraph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap();
        let pi = [3, 1, 4, 0, 2];
        let s = structural_set(&g, 1.0, &pi).unwrap();
        for (i, &v) in pi.iter().enumerate() {
            assert_eq!(s.forward_degrees[v], n - 1 - i);
        }
        assert_eq!(s.set.len(), n - 1);
        assert!(!s.set.contains(2));
        assert!(structural_set(&g, 1.0, &[0, 0, 1, 2, 3]).is_err());
    }

    #[test]
    fn low_probability_empties_the_set() {
        let g = BaseGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = structural_set(&g, 0.3, &[0, 1, 2, 3]).unwrap();
        assert!(s.set.is_empty());
    }

    #[test]
    fn tail_edge_cases() {
        let g = BaseGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let est = Estimator::monte_carlo(500, SeedSpec::new(3));
        let rep = empirical_tail(&g, 1.0, &est, Some(&[0.0, 0.5, 1.0]), None).unwrap();
        assert_eq!(rep.opt, 2.0);
        assert_eq!(rep.rows[0].empirical, 1.0);
        assert_eq!(rep.rows[0].freedman, 2.0);
        assert!(rep.rows[1..].iter().all(|r| r.empirical == 0.0));
    }

    #[test]
    fn g_tail_is_zero_when_g_is_constant() {
        let g = BaseGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let est = Estimator::monte_carlo(200, SeedSpec::new(3));
        let rep = g_tail_check(&g, 0.5, &VertexSet::full(3), 0.2, 1.0, &est).unwrap();
        assert_eq!(rep.frequency, 0.0);
        let rep = g_tail_check(&g, 1.0, &VertexSet::new(3), 0.2, 2.0, &est).unwrap();
        assert_eq!(rep.frequency, 0.0);
    }
}
