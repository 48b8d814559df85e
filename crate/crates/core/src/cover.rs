//! Choosing the commit set `Ŝ`, the non-adaptive query phase and the
//! end-to-end driver.
//!
//! `Ŝ` minimises `E[g(S)]`, `g(S) = |S| + |MVC(G*[V∖S])|`, over sets whose
//! residual graph `G[V∖S]` fits in the query budget (optionally with the
//! extra constraint `Q ⊆ S`). The output of a run is `Ŝ ∪ H`, where `H` is
//! the canonical cover of the queried residual realization.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::estimate::{cover_statistics, expected_mvc, low_bits, Estimator, ProbEstimate};
use crate::graph::{induced_subgraph, BaseGraph, EdgeSet, VertexSet};
use crate::math;
use crate::mvc;
use crate::par;
use crate::realization::{realization_weight, sample_realization, QueryOracle, Realization};
use crate::rng::{tags, SeedSpec};
use crate::seed::{partition_lms, seed_set, vertex_seed, LmsPartition, SeedParams, SeedSequence};
use crate::{EXACT_EDGE_CAP, MVC_VERTEX_CAP, SUBSET_ENUMERATION_CAP};

/// Two objective values closer than this are treated as equal, and the
/// lexicographically smaller set wins.
pub const OBJECTIVE_TIE: f64 = 1e-9;

/// Above this many residual edges the exact expectation is split into
/// chunks evaluated in parallel.
const CHUNK_BITS: usize = 12;

/// `g(S) = |S| + |MVC(G*[V∖S])|` on one realization.
pub fn objective_g(s: &VertexSet, r: &Realization<'_>) -> Result<usize> {
    Ok(s.len() + mvc::residual_cover_size(r, s)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMode {
    /// Scan every subset of `V` (requires `n ≤ subset_cap`).
    ExactEnumeration,
    /// Scan a structured family of candidates.
    CandidateFamily,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// How `E[g(S)]` is computed for each candidate. Monte-Carlo evaluation
    /// uses the same trials for every candidate.
    pub estimator: Estimator,
    pub subset_cap: usize,
    /// Number of sampled `F★` outcomes used to build seed-set candidates.
    pub f_star_samples: usize,
}

impl SolverConfig {
    /// Subset enumeration with exact expectations.
    pub fn exact() -> Self {
        SolverConfig {
            mode: SolverMode::ExactEnumeration,
            estimator: Estimator::exact(),
            subset_cap: SUBSET_ENUMERATION_CAP,
            f_star_samples: 8,
        }
    }

    pub fn candidates(trials: usize, seed: SeedSpec) -> Self {
        SolverConfig {
            mode: SolverMode::CandidateFamily,
            estimator: Estimator::auto(trials, seed),
            subset_cap: SUBSET_ENUMERATION_CAP,
            f_star_samples: 8,
        }
    }

    /// Subset enumeration when `n` allows it, candidates otherwise; exact
    /// expectations whenever the residual graph is small enough.
    pub fn auto(n: usize, trials: usize, seed: SeedSpec) -> Self {
        let mode = if n <= SUBSET_ENUMERATION_CAP {
            SolverMode::ExactEnumeration
        } else {
            SolverMode::CandidateFamily
        };
        SolverConfig {
            mode,
            ..SolverConfig::candidates(trials, seed)
        }
    }
}

/// A commit set with its estimated objective.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub s_hat: VertexSet,
    pub objective: ProbEstimate,
    pub feasible: bool,
    /// Edge count of `G[V ∖ Ŝ]`, which is the number of queries a run makes.
    pub residual_edges: usize,
    pub candidates_evaluated: usize,
}

/// Extra structure used to build the candidate family.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateContext {
    pub partition: LmsPartition,
    pub q: Vec<usize>,
}

fn mask_of(s: &VertexSet) -> u64 {
    s.to_mask()
}

fn lex_cmp_masks(mut a: u64, mut b: u64) -> Ordering {
    loop {
        match (a == 0, b == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
        if la != lb {
            return la.cmp(&lb);
        }
        a &= a - 1;
        b &= b - 1;
    }
}

fn residual_count(g: &BaseGraph, alive: u64) -> u64 {
    g.edges()
        .iter()
        .filter(|&&(u, v)| alive >> u & 1 == 1 && alive >> v & 1 == 1)
        .count() as u64
}

fn residual_edge_list(g: &BaseGraph, alive: u64) -> Vec<(usize, usize)> {
    g.edges()
        .iter()
        .copied()
        .filter(|&(u, v)| alive >> u & 1 == 1 && alive >> v & 1 == 1)
        .collect()
}

/// `E[g(S)]` for many `S`, sharing Monte-Carlo trials between candidates.
struct ObjectiveEvaluator<'g> {
    g: &'g BaseGraph,
    p: f64,
    est: Estimator,
    full: u64,
    samples: Vec<Vec<u64>>,
}

impl<'g> ObjectiveEvaluator<'g> {
    fn new(g: &'g BaseGraph, p: f64, est: Estimator) -> Result<Self> {
        if g.n() > MVC_VERTEX_CAP {
            return Err(Error::capacity("vertex count for exact cover", g.n(), MVC_VERTEX_CAP));
        }
        let mut samples = Vec::new();
        if !est.is_exact_for(g.m()) {
            if est.trials == 0 {
                return Err(Error::Parameter("Monte-Carlo estimation needs trials > 0".into()));
            }
            let stream = est.seed.substream(tags::REALIZATION);
            samples = par::map_indexed(est.trials, |t| {
                sample_realization(g, p, &stream, t as u64)
                    .expect("probability validated by the caller")
                    .adjacency_masks()
            });
        }
        Ok(ObjectiveEvaluator {
            g,
            p,
            est,
            full: low_bits(g.n()),
            samples,
        })
    }

    fn evaluate(&self, s: u64) -> Result<ProbEstimate> {
        let alive = self.full & !s;
        let size = s.count_ones() as f64;
        let edges = residual_edge_list(self.g, alive);
        let k = edges.len();
        if self.est.is_exact_for(k) {
            if k > EXACT_EDGE_CAP {
                return Err(Error::capacity("edge count for exact enumeration", k, EXACT_EDGE_CAP));
            }
            return Ok(ProbEstimate::exact(size + self.exact_residual(&edges, alive)));
        }
        let (mean, half_width, trials) = math::mean_half_width(
            self.samples
                .iter()
                .map(|adj| size + mvc::min_cover_size(adj, alive) as f64),
        );
        Ok(ProbEstimate {
            mean,
            half_width,
            trials,
            exact: false,
        })
    }

    /// `E[|MVC|]` of the residual graph by enumerating its own edges.
    fn exact_residual(&self, edges: &[(usize, usize)], alive: u64) -> f64 {
        let k = edges.len();
        let n = self.g.n();
        let block = |lo: u64, hi: u64| {
            let mut adj = alloc::vec![0u64; n];
            let mut sum = 0.0;
            for mask in lo..hi {
                adj.iter_mut().for_each(|a| *a = 0);
                let mut rest = mask;
                while rest != 0 {
                    let (u, v) = edges[rest.trailing_zeros() as usize];
                    adj[u] |= 1 << v;
                    adj[v] |= 1 << u;
                    rest &= rest - 1;
                }
                let w = realization_weight(self.p, mask.count_ones() as usize, k);
                sum += w * mvc::min_cover_size(&adj, alive) as f64;
            }
            sum
        };
        if k <= CHUNK_BITS {
            block(0, 1 << k)
        } else {
            let chunk = 1u64 << CHUNK_BITS;
            par::map_indexed(1 << (k - CHUNK_BITS), |c| {
                block(c as u64 * chunk, (c as u64 + 1) * chunk)
            })
            .into_iter()
            .sum()
        }
    }

    /// Lower bound on `E[g(S)]` valid for every `S` when all evaluations are
    /// exact: `g(S) ≥ |MVC(G*)|` pointwise.
    fn opt_lower_bound(&self) -> Result<f64> {
        if self.est.is_exact_for(self.g.m()) && self.g.m() <= EXACT_EDGE_CAP {
            Ok(self.evaluate(0)?.mean)
        } else {
            Ok(0.0)
        }
    }
}

fn check_q(n: usize, q: &[usize]) -> Result<u64> {
    if n > MVC_VERTEX_CAP {
        return Err(Error::capacity("vertex count for exact cover", n, MVC_VERTEX_CAP));
    }
    q.iter().try_fold(0u64, |acc, &v| {
        if v < n {
            Ok(acc | 1 << v)
        } else {
            Err(Error::Contract(format!("Q contains vertex {v} outside 0..{n}")))
        }
    })
}

fn solution(g: &BaseGraph, s: u64, objective: ProbEstimate, budget: u64, evaluated: usize) -> Solution {
    let s_hat = VertexSet::from_mask(g.n(), s);
    let residual_edges = g.residual_edges(&s_hat);
    Solution {
        s_hat,
        objective,
        feasible: residual_edges as u64 <= budget,
        residual_edges,
        candidates_evaluated: evaluated,
    }
}

fn solve_exact(g: &BaseGraph, params: &SeedParams, q_mask: u64, config: &SolverConfig) -> Result<Solution> {
    let n = g.n();
    if n > config.subset_cap || n > SUBSET_ENUMERATION_CAP {
        return Err(Error::capacity(
            "vertex count for subset enumeration",
            n,
            config.subset_cap.min(SUBSET_ENUMERATION_CAP),
        ));
    }
    let eval = ObjectiveEvaluator::new(g, params.p, config.estimator)?;
    let budget = params.query_budget;
    let mut feasible: Vec<u64> = (0u64..1 << n)
        .filter(|&s| s & q_mask == q_mask)
        .filter(|&s| residual_count(g, low_bits(n) & !s) <= budget)
        .collect();
    feasible.sort_unstable_by(|&a, &b| lex_cmp_masks(a, b));
    let opt_lb = eval.opt_lower_bound()?;

    let mut best: Option<(u64, ProbEstimate)> = None;
    let mut evaluated = 0;
    for s in feasible {
        if let Some((_, b)) = best {
            let lb = (s.count_ones() as f64).max(opt_lb);
            if lb >= b.mean - OBJECTIVE_TIE {
                continue;
            }
        }
        let e = eval.evaluate(s)?;
        evaluated += 1;
        if best.is_none_or(|(_, b)| e.mean < b.mean - OBJECTIVE_TIE) {
            best = Some((s, e));
        }
    }
    let (s, objective) = best.expect("V itself is always feasible");
    Ok(solution(g, s, objective, budget, evaluated))
}

/// Peels maximum-degree vertices (lowest id on ties) off the residual graph
/// and records every prefix.
fn peeling_sets(g: &BaseGraph, start: u64) -> Vec<u64> {
    let n = g.n();
    let adj = g.adjacency_masks();
    let mut s = start;
    let mut out = Vec::new();
    loop {
        let alive = low_bits(n) & !s;
        let pick = (0..n)
            .filter(|&v| alive >> v & 1 == 1)
            .map(|v| (v, (adj[v] & alive).count_ones()))
            .filter(|&(_, d)| d > 0)
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        match pick {
            Some((v, _)) => {
                s |= 1 << v;
                out.push(s);
            }
            None => return out,
        }
    }
}

/// Seed sets `SEED(Q_VC, F★)`: every `Q_VC ⊆ Q` when `|Q| ≤ 12`, otherwise
/// `Q_VC = Q ∩ MVC(G*)` from the sampled realizations. `F★` comes from
/// `samples` realizations drawn from the `F_STAR` substream.
fn seed_candidates(
    g: &BaseGraph,
    params: &SeedParams,
    ctx: &CandidateContext,
    samples: usize,
    seed: &SeedSpec,
) -> Result<Vec<u64>> {
    let n = g.n();
    let q_set = VertexSet::from_vertices(n, ctx.q.iter().copied());
    let f = g.incident_edges(&q_set);
    let stream = seed.substream(tags::F_STAR);
    let mut out = Vec::new();
    for j in 0..samples {
        let r = sample_realization(g, params.p, &stream, j as u64)?;
        let f_star = r.restrict_edges(&f);
        if ctx.q.len() <= 12 {
            for sub in 0u64..1 << ctx.q.len() {
                let q_vc = VertexSet::from_vertices(
                    n,
                    ctx.q.iter().enumerate().filter(|(i, _)| sub >> i & 1 == 1).map(|(_, &v)| v),
                );
                let s = seed_set(g, &ctx.partition, &ctx.q, &q_vc, &f_star, params)?;
                out.push(mask_of(&s.union));
            }
        } else {
            let cover = mvc::mvc_exact(&r)?.cover;
            let q_vc = q_set.intersection(&cover);
            let s = seed_set(g, &ctx.partition, &ctx.q, &q_vc, &f_star, params)?;
            out.push(mask_of(&s.union));
        }
    }
    Ok(out)
}

/// The candidate family (before the feasibility filter), with `q_mask`
/// added to every member.
pub fn candidate_family(
    g: &BaseGraph,
    params: &SeedParams,
    q: &[usize],
    config: &SolverConfig,
    hint: Option<&CandidateContext>,
) -> Result<Vec<VertexSet>> {
    let q_mask = check_q(g.n(), q)?;
    Ok(family_masks(g, params, q_mask, config, hint)?
        .into_iter()
        .map(|s| VertexSet::from_mask(g.n(), s))
        .collect())
}

fn family_masks(
    g: &BaseGraph,
    params: &SeedParams,
    q_mask: u64,
    config: &SolverConfig,
    hint: Option<&CandidateContext>,
) -> Result<Vec<u64>> {
    let n = g.n();
    let mut family = alloc::vec![0, low_bits(n)];
    if let Some(ctx) = hint {
        let l = mask_of(&ctx.partition.l);
        let q_hint = check_q(n, &ctx.q)?;
        family.push(l);
        family.push(l | q_hint);
        family.extend(seed_candidates(
            g,
            params,
            ctx,
            config.f_star_samples,
            &config.estimator.seed,
        )?);
        family.extend(peeling_sets(g, l));
    }
    family.extend(peeling_sets(g, 0));
    let mut family: Vec<u64> = family.into_iter().map(|s| s | q_mask).collect();
    family.sort_unstable_by(|&a, &b| lex_cmp_masks(a, b));
    family.dedup();
    Ok(family)
}

fn solve_candidates(
    g: &BaseGraph,
    params: &SeedParams,
    q_mask: u64,
    config: &SolverConfig,
    hint: Option<&CandidateContext>,
) -> Result<Solution> {
    let n = g.n();
    let budget = params.query_budget;
    let family: Vec<u64> = family_masks(g, params, q_mask, config, hint)?
        .into_iter()
        .filter(|&s| residual_count(g, low_bits(n) & !s) <= budget)
        .collect();
    let eval = ObjectiveEvaluator::new(g, params.p, config.estimator)?;
    let values = par::map_indexed(family.len(), |i| eval.evaluate(family[i]));
    let mut best: Option<(u64, ProbEstimate)> = None;
    for (&s, e) in family.iter().zip(values) {
        let e = e?;
        if best.is_none_or(|(_, b)| e.mean < b.mean - OBJECTIVE_TIE) {
            best = Some((s, e));
        }
    }
    let (s, mut objective) = best.expect("V itself is always feasible");
    if !objective.exact {
        // Re-estimate the winner on fresh trials to remove selection bias.
        let fresh = Estimator {
            trials: config.estimator.trials * 4,
            seed: config.estimator.seed.substream(tags::CANDIDATES),
            ..config.estimator
        };
        objective = ObjectiveEvaluator::new(g, params.p, fresh)?.evaluate(s)?;
    }
    Ok(solution(g, s, objective, budget, family.len()))
}

fn solve(
    g: &BaseGraph,
    params: &SeedParams,
    q: &[usize],
    config: &SolverConfig,
    hint: Option<&CandidateContext>,
) -> Result<Solution> {
    let q_mask = check_q(g.n(), q)?;
    match config.mode {
        SolverMode::ExactEnumeration => solve_exact(g, params, q_mask, config),
        SolverMode::CandidateFamily => solve_candidates(g, params, q_mask, config, hint),
    }
}

/// Minimises `E[g(S)]` subject to `|E(G[V∖S])| ≤ query_budget`. Ties
/// (within [`OBJECTIVE_TIE`]) go to the lexicographically smallest set.
pub fn solve_problem_1(
    g: &BaseGraph,
    params: &SeedParams,
    config: &SolverConfig,
    hint: Option<&CandidateContext>,
) -> Result<Solution> {
    solve(g, params, &[], config, hint)
}

/// [`solve_problem_1`] with the extra constraint `Q ⊆ S`.
pub fn solve_problem_3(
    g: &BaseGraph,
    params: &SeedParams,
    q: &[usize],
    config: &SolverConfig,
    hint: Option<&CandidateContext>,
) -> Result<Solution> {
    solve(g, params, q, config, hint)
}

/// Edges of `G[V ∖ s_hat]`: the non-adaptive query set.
pub fn query_set(g: &BaseGraph, s_hat: &VertexSet) -> EdgeSet {
    EdgeSet::from_edges(
        g.m(),
        g.edges()
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| !s_hat.contains(u) && !s_hat.contains(v))
            .map(|(i, _)| i),
    )
}

/// Outcome of one query phase.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub cover: VertexSet,
    pub queries_used: u64,
    pub budget: u64,
    /// Realized edges the cover misses, audited against the hidden
    /// realization. Always zero for a correct run.
    pub realized_edge_violations: usize,
}

/// Queries every edge of `G[V∖Ŝ]` and returns `Ŝ ∪ H`, where `H` is the
/// canonical cover of what the queries revealed.
pub fn run_vertex_cover(
    g: &BaseGraph,
    params: &SeedParams,
    s_hat: &VertexSet,
    oracle: &mut QueryOracle<'_>,
) -> Result<RunResult> {
    let allowed = query_set(g, s_hat);
    if oracle.allowed() != &allowed {
        return Err(Error::Contract("oracle query set is not E(G[V∖Ŝ])".into()));
    }
    if oracle.budget() != params.query_budget {
        return Err(Error::Contract("oracle budget differs from the query budget".into()));
    }
    if allowed.len() as u64 > params.query_budget {
        return Err(Error::BudgetExceeded(params.query_budget));
    }
    let sub = induced_subgraph(g, &s_hat.complement());
    let mut present = EdgeSet::new(sub.graph.m());
    for (new, &orig) in sub.edge_map.iter().enumerate() {
        if oracle.query(orig)? {
            present.insert(new);
        }
    }
    let revealed = Realization::new(&sub.graph, present)?;
    let h = mvc::mvc_exact(&revealed)?;
    let mut cover = s_hat.clone();
    for v in h.cover.iter() {
        cover.insert(sub.vertex_map[v]);
    }
    Ok(RunResult {
        realized_edge_violations: oracle.audit_uncovered(&cover),
        cover,
        queries_used: oracle.queries_used(),
        budget: oracle.budget(),
    })
}

/// Whether the whole graph fits in the query budget (`m ≤ budget`), in
/// which case the driver commits nothing and queries everything.
pub fn dense_fallback_check(g: &BaseGraph, params: &SeedParams) -> bool {
    g.m() as u64 <= params.query_budget
}

/// Everything decided before any query is made.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub fallback: bool,
    pub opt: ProbEstimate,
    pub partition: Option<LmsPartition>,
    pub seed: Option<SeedSequence>,
    pub solution: Solution,
    pub query_set: EdgeSet,
}

/// Full pre-query pipeline: fallback check, then `c_v` estimates, the L/M/S
/// partition, the vertex-seed sequence `Q` and the commit set (with
/// `Q ⊆ Ŝ`).
pub fn plan(g: &BaseGraph, params: &SeedParams, config: &SolverConfig, seed_est: &Estimator) -> Result<Plan> {
    if dense_fallback_check(g, params) {
        let opt = expected_mvc(g, params.p, &config.estimator)?;
        let s_hat = VertexSet::new(g.n());
        return Ok(Plan {
            fallback: true,
            opt,
            partition: None,
            seed: None,
            query_set: query_set(g, &s_hat),
            solution: Solution {
                s_hat,
                objective: opt,
                feasible: true,
                residual_edges: g.m(),
                candidates_evaluated: 0,
            },
        });
    }
    let stats = cover_statistics(g, params.p, &config.estimator)?;
    let c: Vec<f64> = stats.membership.iter().map(|e| e.mean).collect();
    let partition = partition_lms(&c, params.epsilon)?;
    let seq = vertex_seed(g, &partition.m, params, seed_est)?;
    let ctx = CandidateContext {
        partition: partition.clone(),
        q: seq.order.clone(),
    };
    let solution = solve_problem_3(g, params, &seq.order, config, Some(&ctx))?;
    Ok(Plan {
        fallback: false,
        opt: stats.opt,
        partition: Some(partition),
        seed: Some(seq),
        query_set: query_set(g, &solution.s_hat),
        solution,
    })
}

/// One query phase of a plan against trial `trial` of the hidden
/// realization stream.
pub fn run_trial(
    g: &BaseGraph,
    params: &SeedParams,
    plan: &Plan,
    seed: &SeedSpec,
    trial: u64,
) -> Result<RunResult> {
    let hidden = sample_realization(g, params.p, &seed.substream(tags::QUERY_PHASE), trial)?;
    let mut oracle = QueryOracle::new(hidden, plan.query_set.clone(), params.query_budget)?;
    run_vertex_cover(g, params, &plan.solution.s_hat, &mut oracle)
}
