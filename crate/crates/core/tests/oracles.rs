//! Values checked against oracles that share no code with the library:
//! brute-force covers, closed-form probabilities and frozen high-precision
//! constants.

use approx::assert_abs_diff_eq;
use stochvc_core::estimate::DEFAULT_TRIALS;
use stochvc_core::rng::tags;
use stochvc_core::seed::DELTA_TRIALS;
use stochvc_core::structural::default_grid;
use stochvc_core::*;

/// Canonical cover by brute force: smallest size, then lexicographically
/// smallest sorted vertex list.
fn brute_canonical(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut best: Option<Vec<usize>> = None;
    for s in 0u32..1 << n {
        if !edges.iter().all(|&(u, v)| s >> u & 1 == 1 || s >> v & 1 == 1) {
            continue;
        }
        let list: Vec<usize> = (0..n).filter(|&v| s >> v & 1 == 1).collect();
        let better = match &best {
            None => true,
            Some(b) => list.len() < b.len() || (list.len() == b.len() && list < *b),
        };
        if better {
            best = Some(list);
        }
    }
    best.unwrap()
}

fn petersen() -> BaseGraph {
    let outer = (0..5).map(|i| (i, (i + 1) % 5));
    let spokes = (0..5).map(|i| (i, i + 5));
    let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
    BaseGraph::from_edges(10, outer.chain(spokes).chain(inner)).unwrap()
}

#[test]
fn petersen_cover_has_size_six() {
    let g = petersen();
    let c = mvc_exact(&Realization::full(&g)).unwrap();
    let brute = brute_canonical(10, g.edges());
    assert_eq!(brute.len(), 6);
    assert_eq!(c.size, 6);
    assert_eq!(c.cover.to_vec(), brute);
}

#[test]
fn triangle_edge_cover_probabilities_by_enumeration() {
    let edges = [(0, 1), (1, 2), (0, 2)];
    let g = BaseGraph::from_edges(3, edges).unwrap();
    let p: f64 = 0.5;
    let mut ce = [0.0; 3];
    let mut cv = [0.0; 3];
    let mut opt = 0.0;
    for mask in 0u32..8 {
        let present: Vec<_> = (0..3).filter(|&i| mask >> i & 1 == 1).map(|i| edges[i]).collect();
        let w = p.powi(present.len() as i32) * (1.0 - p).powi(3 - present.len() as i32);
        let cover = brute_canonical(3, &present);
        opt += w * cover.len() as f64;
        for &v in &cover {
            cv[v] += w;
        }
        for (i, &(u, v)) in edges.iter().enumerate() {
            if cover.contains(&u) || cover.contains(&v) {
                ce[i] += w;
            }
        }
    }
    let stats = cover_statistics(&g, p, &Estimator::exact()).unwrap();
    assert_abs_diff_eq!(stats.opt.mean, opt, epsilon = 1e-12);
    assert_abs_diff_eq!(opt, 1.0, epsilon = 1e-12);
    for i in 0..3 {
        assert_abs_diff_eq!(stats.edge_cover[i].mean, ce[i], epsilon = 1e-12);
        assert_abs_diff_eq!(stats.membership[i].mean, cv[i], epsilon = 1e-12);
    }
}

#[test]
fn star_membership_closed_form() {
    // K_{1,4}: the center is in the canonical cover iff any edge is present
    // (a lone edge is a tie that the lower id wins).
    let g = generate(&GeneratorSpec::Star { d: 4 }, &SeedSpec::new(0)).unwrap();
    let stats = cover_statistics(&g, 0.9, &Estimator::exact()).unwrap();
    assert_abs_diff_eq!(stats.membership[0].mean, 1.0 - 0.1f64.powi(4), epsilon = 1e-12);
    for leaf in 1..5 {
        assert_eq!(stats.membership[leaf].mean, 0.0);
    }
    let sum: f64 = stats.membership.iter().map(|e| e.mean).sum();
    assert_abs_diff_eq!(sum, stats.opt.mean, epsilon = 1e-9);
}

#[test]
fn freedman_bound_matches_high_precision_value() {
    // 2·exp(−2500/(400·C + 100/3)) with C = 2(e/(e−1)+2), evaluated with
    // 40-digit arithmetic.
    let b = freedman_bound(50.0, 100.0, STRUCTURAL_CONSTANT).unwrap();
    assert_abs_diff_eq!(b, 0.844_302_422_586_049_2, epsilon = 1e-14);
    assert_abs_diff_eq!(STRUCTURAL_CONSTANT, 7.163_953_413_738_653, epsilon = 1e-14);
    assert_abs_diff_eq!(corollary_bound(40.0, 40.0).unwrap(), 0.595_130_820_295_130_7, epsilon = 1e-14);
}

#[test]
fn per_edge_frequency_is_p() {
    let g = BaseGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let seed = SeedSpec::new(2024);
    let trials = 100_000u64;
    let mut counts = [0u32; 3];
    for t in 0..trials {
        let r = sample_realization(&g, 0.5, &seed, t).unwrap();
        for (e, c) in counts.iter_mut().enumerate() {
            *c += r.is_present(e) as u32;
        }
    }
    for c in counts {
        assert!((c as f64 / trials as f64 - 0.5).abs() < 0.01);
    }
}

#[test]
fn conditional_frequencies() {
    let g = BaseGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let e01 = g.edge_index(0, 1).unwrap();
    let partial = PartialRealization::new(EdgeSet::from_edges(3, [e01]), EdgeSet::new(3)).unwrap();
    let seed = SeedSpec::new(77);
    let trials = 100_000u64;
    let mut counts = [0u32; 3];
    for t in 0..trials {
        let r = sample_conditional(&g, 0.5, &partial, &seed, t).unwrap();
        for (e, c) in counts.iter_mut().enumerate() {
            *c += r.is_present(e) as u32;
        }
    }
    assert_eq!(counts[e01], 0);
    for e in (0..3).filter(|&e| e != e01) {
        assert!((counts[e] as f64 / trials as f64 - 0.5).abs() < 0.01);
    }
}

#[test]
fn conditional_sampling_marginalizes_to_unconditional() {
    // Fix edge 0 to an outcome drawn at rate p, then sample the rest; the
    // joint law over all 8 patterns must be Bernoulli(p)^3.
    let g = BaseGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let p: f64 = 0.3;
    let fixed = EdgeSet::from_edges(3, [0]);
    let outer = SeedSpec::new(5).substream(99);
    let inner = SeedSpec::new(5);
    let trials = 40_000u64;
    let mut counts = [0f64; 8];
    for t in 0..trials {
        let present = outer.trial_rng(t).bernoulli(p);
        let outcome = if present { fixed.clone() } else { EdgeSet::new(3) };
        let partial = PartialRealization::new(fixed.clone(), outcome).unwrap();
        let r = sample_conditional(&g, p, &partial, &inner, t).unwrap();
        let pattern = (0..3).filter(|&e| r.is_present(e)).fold(0, |m, e| m | 1 << e);
        counts[pattern] += 1.0;
    }
    let chi2: f64 = (0..8)
        .map(|pat: u32| {
            let k = pat.count_ones() as i32;
            let expected = trials as f64 * p.powi(k) * (1.0 - p).powi(3 - k);
            (counts[pat as usize] - expected).powi(2) / expected
        })
        .sum();
    // 0.1% critical value of chi-square with 7 degrees of freedom.
    assert!(chi2 < 24.32, "chi2 = {chi2}");
}

#[test]
fn enumeration_and_sampling_agree() {
    let g = generate(&GeneratorSpec::ErdosRenyi { n: 8, density: 0.4 }, &SeedSpec::new(3)).unwrap();
    assert!(g.m() <= 20);
    let exact = expected_mvc(&g, 0.4, &Estimator::exact()).unwrap();
    let mc = expected_mvc(&g, 0.4, &Estimator::monte_carlo(DEFAULT_TRIALS, SeedSpec::new(9))).unwrap();
    assert!((exact.mean - mc.mean).abs() <= 4.0 * mc.std_error());
}

/// `p(v|P)` exactly, by enumerating realizations and every matching choice.
fn exact_matched_probs(g: &BaseGraph, p: f64, prefix: &[usize]) -> Vec<f64> {
    fn walk(adj: &[u64], prefix: &[usize], i: usize, matched: u64, earlier: u64, w: f64, out: &mut [f64]) {
        if i == prefix.len() {
            for (v, o) in out.iter_mut().enumerate() {
                if matched >> v & 1 == 1 {
                    *o += w;
                }
            }
            return;
        }
        let v = prefix[i];
        let next_earlier = earlier | 1 << v;
        let options = if matched >> v & 1 == 1 { 0 } else { adj[v] & !matched & !earlier };
        if options == 0 {
            walk(adj, prefix, i + 1, matched, next_earlier, w, out);
            return;
        }
        let k = options.count_ones() as f64;
        for u in (0..adj.len()).filter(|&u| options >> u & 1 == 1) {
            walk(adj, prefix, i + 1, matched | 1 << v | 1 << u, next_earlier, w / k, out);
        }
    }
    let n = g.n();
    let m = g.m();
    let mut out = vec![0.0; n];
    for mask in 0u32..1 << m {
        let mut adj = vec![0u64; n];
        let mut k = 0;
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if mask >> e & 1 == 1 {
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
                k += 1;
            }
        }
        let w = p.powi(k) * (1.0 - p).powi(m as i32 - k);
        walk(&adj, prefix, 0, 0, 0, w, &mut out);
    }
    for &v in prefix {
        out[v] = f64::NAN;
    }
    out
}

#[test]
fn greedy_ordering_estimates_match_exact_star_probabilities() {
    let g = generate(&GeneratorSpec::Star { d: 5 }, &SeedSpec::new(0)).unwrap();
    for p in [1.0, 0.6] {
        let o = greedy_ordering(&g, p, 4000, &SeedSpec::new(31)).unwrap();
        assert_eq!(o.pi[0], 0);
        for i in 1..o.pi.len() {
            let exact = exact_matched_probs(&g, p, &o.pi[..i]);
            let est = o.matched_prob[i];
            let se = (exact[o.pi[i]] * (1.0 - exact[o.pi[i]]) / est.trials as f64).sqrt();
            assert!(
                (est.mean - exact[o.pi[i]]).abs() <= 4.0 * se + 1e-12,
                "step {i}: estimate {} vs exact {}",
                est.mean,
                exact[o.pi[i]]
            );
        }
    }
    // With the center placed first, every leaf is matched with chance 1/5 at p = 1.
    let exact = exact_matched_probs(&g, 1.0, &[0]);
    for leaf in 1..6 {
        assert_abs_diff_eq!(exact[leaf], 0.2, epsilon = 1e-12);
    }
}

#[test]
fn disjoint_edges_tail_matches_binomial() {
    let k = 30;
    let g = generate(&GeneratorSpec::DisjointEdges { k }, &SeedSpec::new(0)).unwrap();
    let est = Estimator::monte_carlo(DEFAULT_TRIALS, SeedSpec::new(11));
    let grid = default_grid(15.0, 20);
    let report = empirical_tail(&g, 0.5, &est, Some(&grid), Some(15.0)).unwrap();
    let pmf: Vec<f64> = (0..=k)
        .map(|j| binomial(k, j) * 0.5f64.powi(k as i32))
        .collect();
    for row in &report.rows {
        let exact: f64 = (0..=k)
            .filter(|&j| (j as f64 - 15.0).abs() >= row.t - 1e-9)
            .map(|j| pmf[j])
            .sum();
        let se = (exact * (1.0 - exact) / DEFAULT_TRIALS as f64).sqrt();
        assert!((row.empirical - exact).abs() <= 4.0 * se + 1e-12, "t = {}", row.t);
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn planted_instance_seeds_its_hub() {
    let spec = PlantedSpec::default();
    let g = generate(&GeneratorSpec::Planted(spec), &SeedSpec::new(0)).unwrap();
    let p: f64 = 0.5;
    // The hub is out of the cover iff no hub edge lands on a spoke without a
    // realized leaf: (1 − p(1−p)^ℓ)^d.
    let hub_out = (1.0 - p * (1.0 - p).powi(spec.leaves_per_spoke as i32)).powi(spec.spokes as i32);
    let spoke_in = 1.0 - (1.0 - p).powi(spec.leaves_per_spoke as i32);
    let stats = cover_statistics(&g, p, &Estimator::exact()).unwrap();
    assert_abs_diff_eq!(stats.membership[0].mean, 1.0 - hub_out, epsilon = 1e-12);
    for s in 1..=spec.spokes {
        assert_abs_diff_eq!(stats.membership[s].mean, spoke_in, epsilon = 1e-12);
    }

    let c: Vec<f64> = stats.membership.iter().map(|e| e.mean).collect();
    let part = partition_lms(&c, 0.1).unwrap();
    assert_eq!(part.m.to_vec(), (0..=spec.spokes).collect::<Vec<_>>());
    // γ chosen so that 1/(p·γ) equals the hub's degree.
    let params = SeedParams::scaled(0.1, p, g.n(), 1.0 / (p * spec.spokes as f64)).unwrap();

    let exact = vertex_seed(&g, &part.m, &params, &Estimator::exact()).unwrap();
    assert_eq!(exact.order, [0]);
    assert_abs_diff_eq!(exact.estimates[0].mean, hub_out, epsilon = 1e-12);

    let mc = vertex_seed(&g, &part.m, &params, &Estimator::monte_carlo(DELTA_TRIALS, SeedSpec::new(4))).unwrap();
    assert_eq!(mc.order, [0]);
    assert!((mc.estimates[0].mean - hub_out).abs() < 4.0 * mc.estimates[0].std_error());
    assert_eq!(mc.trace.len(), 2);
    assert_eq!(mc.trace[1].chosen, None);
}

#[test]
fn planted_hub_is_in_a_but_not_problematic_when_covered() {
    let spec = PlantedSpec::default();
    let g = generate(&GeneratorSpec::Planted(spec), &SeedSpec::new(0)).unwrap();
    let m_set = VertexSet::from_vertices(g.n(), 0..=spec.spokes);
    let params = SeedParams::scaled(0.1, 0.5, g.n(), 1.0 / (0.5 * spec.spokes as f64)).unwrap();
    let r = Realization::full(&g);
    let hub_covered = VertexSet::from_vertices(g.n(), [0]);
    let a = set_a(&g, &m_set, &[], &r, &hub_covered, &params).unwrap();
    let prob = problematic(&g, &m_set, &[], &r, &hub_covered, &params).unwrap();
    assert!(a.contains(0));
    assert!(!prob.contains(0));
}

#[test]
fn substream_tags_are_distinct() {
    let all = [
        tags::REALIZATION,
        tags::VERTEX_SEED,
        tags::CANDIDATES,
        tags::MATCHING_GRAPH,
        tags::MATCHING_CHOICE,
        tags::GENERATOR,
        tags::TAIL,
        tags::QUERY_PHASE,
        tags::F_STAR,
    ];
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            assert_ne!(a, b);
        }
    }
}
