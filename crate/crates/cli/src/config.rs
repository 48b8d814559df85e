//! Experiment configuration and generator specs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use stochvc_core::{generate, BaseGraph, GeneratorSpec, PlantedSpec, SeedParams, SeedSpec};

use crate::edgelist::parse_edge_list;

/// Generator written as `name(arg, ...)`, e.g. `erdos_renyi(12, 0.4)` or
/// `disjoint_edges(30)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Generator(pub GeneratorSpec);

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            GeneratorSpec::ErdosRenyi { n, density } => write!(f, "erdos_renyi({n}, {density})"),
            GeneratorSpec::RandomBipartite { a, b, density } => {
                write!(f, "random_bipartite({a}, {b}, {density})")
            }
            GeneratorSpec::Star { d } => write!(f, "star({d})"),
            GeneratorSpec::Clique { n } => write!(f, "clique({n})"),
            GeneratorSpec::DisjointEdges { k } => write!(f, "disjoint_edges({k})"),
            GeneratorSpec::Planted(PlantedSpec {
                spokes,
                leaves_per_spoke,
            }) => write!(f, "planted_seed_instance({spokes}, {leaves_per_spoke})"),
        }
    }
}

impl FromStr for Generator {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) => {
                ensure!(s.ends_with(')'), "unbalanced parentheses in {s:?}");
                (&s[..i], &s[i + 1..s.len() - 1])
            }
            None => (s, ""),
        };
        let args: Vec<&str> = args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
        let int = |i: usize| -> Result<usize> {
            args.get(i)
                .with_context(|| format!("{name} needs argument {}", i + 1))?
                .parse()
                .with_context(|| format!("argument {} of {name}", i + 1))
        };
        let real = |i: usize| -> Result<f64> {
            args.get(i)
                .with_context(|| format!("{name} needs argument {}", i + 1))?
                .parse()
                .with_context(|| format!("argument {} of {name}", i + 1))
        };
        let (spec, arity) = match name.trim() {
            "erdos_renyi" => (GeneratorSpec::ErdosRenyi { n: int(0)?, density: real(1)? }, 2..=2),
            "random_bipartite" => (
                GeneratorSpec::RandomBipartite {
                    a: int(0)?,
                    b: int(1)?,
                    density: real(2)?,
                },
                3..=3,
            ),
            "star" => (GeneratorSpec::Star { d: int(0)? }, 1..=1),
            "clique" => (GeneratorSpec::Clique { n: int(0)? }, 1..=1),
            "disjoint_edges" => (GeneratorSpec::DisjointEdges { k: int(0)? }, 1..=1),
            "planted_seed_instance" => {
                let d = PlantedSpec::default();
                let spec = PlantedSpec {
                    spokes: if args.is_empty() { d.spokes } else { int(0)? },
                    leaves_per_spoke: if args.len() < 2 { d.leaves_per_spoke } else { int(1)? },
                };
                (GeneratorSpec::Planted(spec), 0..=2)
            }
            other => bail!("unknown generator {other:?}"),
        };
        ensure!(arity.contains(&args.len()), "wrong number of arguments for {name}");
        Ok(Generator(spec))
    }
}

impl Serialize for Generator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Generator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    File(PathBuf),
    Generator(Generator),
}

impl GraphSource {
    /// Reads or generates the graph. Generated graphs draw from `seed`.
    pub fn load(&self, seed: &SeedSpec) -> Result<BaseGraph> {
        match self {
            GraphSource::File(path) => load_graph_file(path),
            GraphSource::Generator(g) => Ok(generate(&g.0, seed)?),
        }
    }
}

pub fn load_graph_file(path: &Path) -> Result<BaseGraph> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_edge_list(std::io::BufReader::new(file)).with_context(|| format!("in {}", path.display()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Subset enumeration when n allows, candidate family otherwise.
    Auto,
    Exact,
    Candidates,
}

/// Everything that determines the numeric output of a run. Serialized into
/// every output file. The worker count is deliberately absent: it never
/// changes results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub graphs: Vec<GraphSource>,
    pub p: f64,
    pub epsilon: Option<f64>,
    /// Overrides `ε⁵/10³` for desk-scale runs.
    pub gamma: Option<f64>,
    pub budget: Option<u64>,
    pub seed: u64,
    pub trials: usize,
    pub runs: Option<usize>,
    pub mode: Option<Mode>,
    pub t_grid: Option<Vec<f64>>,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.graphs.is_empty(), "no graph given (use --graph or --gen)");
        ensure!(self.p > 0.0 && self.p <= 1.0, "p must lie in (0, 1], got {}", self.p);
        if let Some(e) = self.epsilon {
            ensure!(e > 0.0 && e < 0.25, "epsilon must lie in (0, 1/4), got {e}");
        }
        if let Some(g) = self.gamma {
            ensure!(g > 0.0 && g.is_finite(), "gamma must be positive, got {g}");
        }
        ensure!(self.trials > 0, "trials must be positive");
        ensure!(self.runs != Some(0), "runs must be positive");
        if let Some(grid) = &self.t_grid {
            ensure!(grid.iter().all(|t| t.is_finite() && *t >= 0.0), "t-grid values must be ≥ 0");
        }
        Ok(())
    }

    pub fn seed_spec(&self) -> SeedSpec {
        SeedSpec::new(self.seed)
    }

    /// Seed for instance `i` of the graph list: instance 0 uses the master
    /// stream, later instances their own streams.
    pub fn instance_seed(&self, i: usize) -> SeedSpec {
        SeedSpec::with_stream(self.seed, i as u64)
    }

    pub fn seed_params(&self, n: usize) -> Result<SeedParams> {
        let eps = self.epsilon.context("--epsilon is required")?;
        let params = match self.gamma {
            Some(g) => SeedParams::scaled(eps, self.p, n, g)?,
            None => SeedParams::new(eps, self.p, n)?,
        };
        Ok(match self.budget {
            Some(b) => params.with_query_budget(b),
            None => params,
        })
    }

    pub fn header_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// The `# config: {...}` line placed at the top of text outputs.
    pub fn header_line(&self) -> String {
        format!("# config: {}", self.header_json())
    }
}
