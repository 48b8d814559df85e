//! Estimators for `opt = E[|MVC(G*)|]`, `c_v = Pr[v ∈ MVC(G*)]` and
//! `c_e = Pr[e has an endpoint in MVC(G*)]`.
//!
//! Exact mode enumerates all `2^m` realizations. Monte-Carlo mode draws
//! trial `t` from the realization substream of the estimator's seed, so
//! every statistic computed with the same estimator sees the same graphs.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{BaseGraph, VertexSet};
use crate::math;
use crate::mvc;
use crate::realization::{check_probability, realization_weight, sample_realization, Realization};
use crate::rng::{tags, SeedSpec};
use crate::{par, EXACT_EDGE_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMode {
    Exact,
    MonteCarlo,
    /// Exact when `m` is within the enumeration cap, Monte-Carlo otherwise.
    Auto,
}

/// How expectations over `G_p` are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Estimator {
    pub mode: EstimateMode,
    pub trials: usize,
    pub seed: SeedSpec,
}

pub const DEFAULT_TRIALS: usize = 10_000;

impl Estimator {
    pub fn exact() -> Self {
        Estimator {
            mode: EstimateMode::Exact,
            trials: 0,
            seed: SeedSpec::new(0),
        }
    }

    pub fn monte_carlo(trials: usize, seed: SeedSpec) -> Self {
        Estimator {
            mode: EstimateMode::MonteCarlo,
            trials,
            seed,
        }
    }

    pub fn auto(trials: usize, seed: SeedSpec) -> Self {
        Estimator {
            mode: EstimateMode::Auto,
            trials,
            seed,
        }
    }

    /// Whether a graph with `m` edges is handled by enumeration.
    pub fn is_exact_for(&self, m: usize) -> bool {
        match self.mode {
            EstimateMode::Exact => true,
            EstimateMode::MonteCarlo => false,
            EstimateMode::Auto => m <= EXACT_EDGE_CAP,
        }
    }
}

/// Point estimate with a 95% half-width (zero when computed exactly).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub trials: usize,
    pub exact: bool,
}

impl ProbEstimate {
    pub fn exact(mean: f64) -> Self {
        ProbEstimate {
            mean,
            half_width: 0.0,
            trials: 0,
            exact: true,
        }
    }

    /// Standard error implied by the half-width.
    pub fn std_error(&self) -> f64 {
        self.half_width / math::Z95
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }
}

/// Outcomes of a statistic over the realizations selected by an estimator.
pub(crate) struct Sweep<T> {
    pub items: Vec<T>,
    /// Probability weights in exact mode; `None` means equal weights.
    pub weights: Option<Vec<f64>>,
}

impl<T> Sweep<T> {
    pub fn estimate(&self, f: impl Fn(&T) -> f64) -> ProbEstimate {
        match &self.weights {
            Some(w) => ProbEstimate::exact(self.items.iter().zip(w).map(|(x, w)| w * f(x)).sum()),
            None => {
                let (mean, half_width, trials) = math::mean_half_width(self.items.iter().map(f));
                ProbEstimate {
                    mean,
                    half_width,
                    trials,
                    exact: false,
                }
            }
        }
    }
}

/// Evaluates `f` on every realization the estimator selects, in a fixed
/// order (mask order for enumeration, trial order for sampling).
pub(crate) fn sweep<'g, T, F>(g: &'g BaseGraph, p: f64, est: &Estimator, f: F) -> Result<Sweep<T>>
where
    T: Send,
    F: Fn(&Realization<'g>) -> T + Sync + Send,
{
    check_probability(p)?;
    let m = g.m();
    if est.is_exact_for(m) {
        if m > EXACT_EDGE_CAP {
            return Err(Error::capacity("edge count for exact enumeration", m, EXACT_EDGE_CAP));
        }
        let items = par::map_indexed(1usize << m, |mask| f(&Realization::from_mask(g, mask as u64)));
        let weights = (0u64..1 << m)
            .map(|mask| realization_weight(p, mask.count_ones() as usize, m))
            .collect();
        Ok(Sweep {
            items,
            weights: Some(weights),
        })
    } else {
        if est.trials == 0 {
            return Err(Error::Parameter("Monte-Carlo estimation needs trials > 0".into()));
        }
        let stream = est.seed.substream(tags::REALIZATION);
        let items = par::map_indexed(est.trials, |t| {
            let r = sample_realization(g, p, &stream, t as u64).expect("p checked above");
            f(&r)
        });
        Ok(Sweep {
            items,
            weights: None,
        })
    }
}

/// Canonical covers over the estimator's realizations.
pub(crate) fn cover_sweep(g: &BaseGraph, p: f64, est: &Estimator) -> Result<Sweep<VertexSet>> {
    let comps = mvc::Components::new(g)?;
    sweep(g, p, est, |r| comps.canonical_cover(r.present(), None))
}

pub(crate) fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `opt`, `c_v` and `c_e` from a single sweep of canonical covers.
#[derive(Clone, Debug)]
pub struct CoverStatistics {
    pub opt: ProbEstimate,
    pub membership: Vec<ProbEstimate>,
    pub edge_cover: Vec<ProbEstimate>,
}

pub fn cover_statistics(g: &BaseGraph, p: f64, est: &Estimator) -> Result<CoverStatistics> {
    let covers = cover_sweep(g, p, est)?;
    let opt = covers.estimate(|c| c.len() as f64);
    let membership = (0..g.n())
        .map(|v| covers.estimate(|c| c.contains(v) as u8 as f64))
        .collect();
    let edge_cover = g
        .edges()
        .iter()
        .map(|&(u, v)| covers.estimate(|c| (c.contains(u) || c.contains(v)) as u8 as f64))
        .collect();
    Ok(CoverStatistics {
        opt,
        membership,
        edge_cover,
    })
}

/// `opt = E[|MVC(G*)|]`.
pub fn expected_mvc(g: &BaseGraph, p: f64, est: &Estimator) -> Result<ProbEstimate> {
    let comps = mvc::Components::new(g)?;
    let sizes = sweep(g, p, est, |r| comps.cover_size(r.present(), None))?;
    Ok(sizes.estimate(|&k| k as f64))
}

/// Per-vertex probability of membership in the canonical cover.
pub fn membership_probs(g: &BaseGraph, p: f64, est: &Estimator) -> Result<Vec<ProbEstimate>> {
    Ok(cover_statistics(g, p, est)?.membership)
}

/// Per-edge probability that the canonical cover touches the edge.
pub fn edge_cover_probs(g: &BaseGraph, p: f64, est: &Estimator) -> Result<Vec<ProbEstimate>> {
    Ok(cover_statistics(g, p, est)?.edge_cover)
}
