//! Deterministic instance generators.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::BaseGraph;
use crate::rng::{tags, SeedSpec};

/// A hub (vertex 0) joined to `spokes` spoke vertices, each carrying
/// `leaves_per_spoke` pendant leaves.
///
/// A spoke with a realized leaf edge is always in the canonical cover, so
/// the hub is needed only when some hub edge lands on a spoke with no
/// realized leaf. With `p = 1/2`, five spokes and two leaves each, the hub
/// stays out of the cover with probability `(7/8)^5 ≈ 0.51` and the spokes
/// sit in the cover with probability `3/4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlantedSpec {
    pub spokes: usize,
    pub leaves_per_spoke: usize,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            spokes: 5,
            leaves_per_spoke: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeneratorSpec {
    ErdosRenyi { n: usize, density: f64 },
    RandomBipartite { a: usize, b: usize, density: f64 },
    Star { d: usize },
    Clique { n: usize },
    DisjointEdges { k: usize },
    Planted(PlantedSpec),
}

fn check_density(density: f64) -> Result<()> {
    if (0.0..=1.0).contains(&density) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("density must lie in [0, 1], got {density}")))
    }
}

/// Builds the graph described by `spec`. Random kinds draw from the
/// `GENERATOR` substream of `seed`, one draw per candidate pair in
/// lexicographic pair order.
pub fn generate(spec: &GeneratorSpec, seed: &SeedSpec) -> Result<BaseGraph> {
    let mut rng = seed.substream(tags::GENERATOR).trial_rng(0);
    match *spec {
        GeneratorSpec::ErdosRenyi { n, density } => {
            check_density(density)?;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.bernoulli(density) {
                        edges.push((u, v));
                    }
                }
            }
            BaseGraph::from_edges(n, edges)
        }
        GeneratorSpec::RandomBipartite { a, b, density } => {
            check_density(density)?;
            let mut edges = Vec::new();
            for u in 0..a {
                for v in a..a + b {
                    if rng.bernoulli(density) {
                        edges.push((u, v));
                    }
                }
            }
            BaseGraph::from_edges(a + b, edges)
        }
        GeneratorSpec::Star { d } => BaseGraph::from_edges(d + 1, (1..=d).map(|v| (0, v))),
        GeneratorSpec::Clique { n } => {
            BaseGraph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
        }
        GeneratorSpec::DisjointEdges { k } => {
            BaseGraph::from_edges(2 * k, (0..k).map(|i| (2 * i, 2 * i + 1)))
        }
        GeneratorSpec::Planted(PlantedSpec {
            spokes,
            leaves_per_spoke,
        }) => {
            let n = 1 + spokes * (1 + leaves_per_spoke);
            let mut edges: Vec<(usize, usize)> = (1..=spokes).map(|s| (0, s)).collect();
            let mut next = spokes + 1;
            for s in 1..=spokes {
                for _ in 0..leaves_per_spoke {
                    edges.push((s, next));
                    next += 1;
                }
            }
            BaseGraph::from_edges(n, edges)
        }
    }
}
