//! Subcommand implementations. Each writes its artifacts under the
//! configured output directory and reports whether its invariant checks
//! passed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use stochvc_core::rng::tags;
use stochvc_core::seed::DELTA_TRIALS;
use stochvc_core::*;

use crate::config::{ExperimentConfig, GraphSource, Mode};
use crate::edgelist::write_edge_list;

/// Default number of query-phase runs for `run-vc` and `compare`.
pub const DEFAULT_RUNS: usize = 100;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// One loaded instance: its position in the graph list, source and graph.
pub struct Instance {
    pub index: usize,
    pub source: String,
    pub graph: BaseGraph,
}

pub fn load_instances(cfg: &ExperimentConfig) -> Result<Vec<Instance>> {
    cfg.graphs
        .iter()
        .enumerate()
        .map(|(index, src)| {
            let graph = src.load(&cfg.instance_seed(index))?;
            let source = match src {
                GraphSource::File(p) => p.display().to_string(),
                GraphSource::Generator(g) => g.to_string(),
            };
            Ok(Instance { index, source, graph })
        })
        .collect()
}

fn output_path(cfg: &ExperimentConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create {}", cfg.out_dir.display()))?;
    Ok(cfg.out_dir.join(name))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
    ))
}

/// CSV file whose first line is the config header.
fn write_csv<R: Serialize>(cfg: &ExperimentConfig, name: &str, rows: &[R]) -> Result<PathBuf> {
    let path = output_path(cfg, name)?;
    let mut w = create(&path)?;
    writeln!(w, "{}", cfg.header_line())?;
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(path)
}

fn write_json<T: Serialize>(cfg: &ExperimentConfig, name: &str, body: &T) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        config: &'a ExperimentConfig,
        result: &'a T,
    }
    let path = output_path(cfg, name)?;
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &Doc { config: cfg, result: body })?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}

fn estimator(cfg: &ExperimentConfig) -> Estimator {
    match cfg.mode {
        Some(Mode::Candidates) => Estimator::monte_carlo(cfg.trials, cfg.seed_spec()),
        _ => Estimator::auto(cfg.trials, cfg.seed_spec()),
    }
}

fn solver_config(cfg: &ExperimentConfig, n: usize) -> SolverConfig {
    let seed = cfg.seed_spec();
    match cfg.mode.unwrap_or(Mode::Auto) {
        Mode::Auto => SolverConfig::auto(n, cfg.trials, seed),
        Mode::Exact => SolverConfig {
            estimator: Estimator::auto(cfg.trials, seed),
            ..SolverConfig::exact()
        },
        Mode::Candidates => SolverConfig::candidates(cfg.trials, seed),
    }
}

fn seed_estimator(cfg: &ExperimentConfig) -> Estimator {
    Estimator::auto(cfg.trials.clamp(1, DELTA_TRIALS), cfg.seed_spec())
}

#[derive(Serialize)]
struct Estimate {
    mean: f64,
    half_width: f64,
    exact: bool,
}

impl From<ProbEstimate> for Estimate {
    fn from(e: ProbEstimate) -> Self {
        Estimate {
            mean: e.mean,
            half_width: e.half_width,
            exact: e.exact,
        }
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let (mean, hw, _) = math::mean_half_width(xs.iter().copied());
    (mean, hw / math::Z95)
}

pub fn generate_cmd(cfg: &ExperimentConfig, output: Option<&Path>) -> Result<Outcome> {
    let mut files = Vec::new();
    let instances = load_instances(cfg)?;
    for inst in &instances {
        let path = match output {
            Some(p) if instances.len() == 1 => p.to_path_buf(),
            _ => output_path(cfg, &format!("graph_{}.txt", inst.index))?,
        };
        let mut w = create(&path)?;
        write_edge_list(&mut w, &inst.graph, &[format!("config: {}", cfg.header_json())])?;
        w.flush()?;
        files.push(path);
    }
    Ok(Outcome {
        passed: true,
        summary: format!("wrote {} graph file(s)", files.len()),
        files,
    })
}

#[derive(Serialize)]
struct VertexRow {
    vertex: String,
    c_v: f64,
    half_width: f64,
}

pub fn estimate_opt(cfg: &ExperimentConfig) -> Result<Outcome> {
    let inst = first_instance(cfg)?;
    let g = &inst.graph;
    let stats = cover_statistics(g, cfg.p, &estimator(cfg))?;
    let mut rows: Vec<VertexRow> = stats
        .membership
        .iter()
        .enumerate()
        .map(|(v, e)| VertexRow {
            vertex: v.to_string(),
            c_v: e.mean,
            half_width: e.half_width,
        })
        .collect();
    rows.push(VertexRow {
        vertex: "opt".into(),
        c_v: stats.opt.mean,
        half_width: stats.opt.half_width,
    });
    let total: f64 = stats.membership.iter().map(|e| e.mean).sum();
    let passed = (total - stats.opt.mean).abs() <= 1e-9 * (1.0 + stats.opt.mean);
    let path = write_csv(cfg, "estimate_opt.csv", &rows)?;
    Ok(Outcome {
        passed,
        files: vec![path],
        summary: format!("opt = {} ± {}", stats.opt.mean, stats.opt.half_width),
    })
}

fn first_instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let mut all = load_instances(cfg)?;
    anyhow::ensure!(all.len() == 1, "{} takes exactly one graph", cfg.command);
    Ok(all.remove(0))
}

#[derive(Serialize)]
struct TraceLine {
    iteration: usize,
    chosen: Option<usize>,
    q_estimate: f64,
    q_half_width: f64,
    candidates: usize,
    undecided_mean: f64,
    undecided_min: u32,
    undecided_max: u32,
}

pub fn seed_trace(cfg: &ExperimentConfig) -> Result<Outcome> {
    let inst = first_instance(cfg)?;
    let g = &inst.graph;
    let params = cfg.seed_params(g.n())?;
    let stats = cover_statistics(g, cfg.p, &estimator(cfg))?;
    let c: Vec<f64> = stats.membership.iter().map(|e| e.mean).collect();
    let partition = partition_lms(&c, params.epsilon)?;
    let seq = vertex_seed(g, &partition.m, &params, &seed_estimator(cfg))?;

    let path = output_path(cfg, "seed_trace.jsonl")?;
    let mut w = create(&path)?;
    #[derive(Serialize)]
    struct Header<'a> {
        config: &'a ExperimentConfig,
    }
    serde_json::to_writer(&mut w, &Header { config: cfg })?;
    writeln!(w)?;
    for s in &seq.trace {
        let line = TraceLine {
            iteration: s.iteration,
            chosen: s.chosen,
            q_estimate: s.best.mean,
            q_half_width: s.best.half_width,
            candidates: s.candidates,
            undecided_mean: s.undecided_mean,
            undecided_min: s.undecided_min,
            undecided_max: s.undecided_max,
        };
        serde_json::to_writer(&mut w, &line)?;
        writeln!(w)?;
    }
    w.flush()?;
    let passed = !params.q_bound_applies(g.n()) || seq.order.len() as f64 <= params.q_length_bound(g.n());
    Ok(Outcome {
        passed,
        files: vec![path],
        summary: format!("|L| = {}, |M| = {}, Q = {:?}", partition.l.len(), partition.m.len(), seq.order),
    })
}

#[derive(Serialize)]
struct TrialRow {
    trial: u64,
    queries: u64,
    cover_size: usize,
    violations: usize,
}

#[derive(Serialize)]
struct RunSummary {
    n: usize,
    m: usize,
    budget: u64,
    fallback: bool,
    opt: Estimate,
    partition: Option<[usize; 3]>,
    q: Vec<usize>,
    s_hat: Vec<usize>,
    objective: Estimate,
    feasible: bool,
    query_set_size: usize,
    mean_cover: f64,
    cover_std_error: f64,
    ratio: f64,
    queries: Vec<u64>,
    cover_sizes: Vec<usize>,
    violations: usize,
    passed: bool,
}

pub fn run_vc(cfg: &ExperimentConfig) -> Result<Outcome> {
    let inst = first_instance(cfg)?;
    let g = &inst.graph;
    let params = cfg.seed_params(g.n())?;
    let plan = plan(g, &params, &solver_config(cfg, g.n()), &seed_estimator(cfg))?;
    let runs = cfg.runs.unwrap_or(DEFAULT_RUNS) as u64;
    let seed = cfg.seed_spec();
    let results: Vec<RunResult> = (0..runs)
        .into_par_iter()
        .map(|t| run_trial(g, &params, &plan, &seed, t))
        .collect::<stochvc_core::Result<_>>()?;

    let rows: Vec<TrialRow> = results
        .iter()
        .enumerate()
        .map(|(t, r)| TrialRow {
            trial: t as u64,
            queries: r.queries_used,
            cover_size: r.cover.len(),
            violations: r.realized_edge_violations,
        })
        .collect();
    let sizes: Vec<f64> = rows.iter().map(|r| r.cover_size as f64).collect();
    let (mean_cover, cover_std_error) = mean_se(&sizes);
    let violations: usize = rows.iter().map(|r| r.violations).sum();
    let passed = plan.solution.feasible
        && violations == 0
        && rows.iter().all(|r| r.queries <= params.query_budget);
    let summary = RunSummary {
        n: g.n(),
        m: g.m(),
        budget: params.query_budget,
        fallback: plan.fallback,
        opt: plan.opt.into(),
        partition: plan.partition.as_ref().map(|p| [p.l.len(), p.m.len(), p.s.len()]),
        q: plan.seed.as_ref().map_or_else(Vec::new, |s| s.order.clone()),
        s_hat: plan.solution.s_hat.to_vec(),
        objective: plan.solution.objective.into(),
        feasible: plan.solution.feasible,
        query_set_size: plan.query_set.len(),
        mean_cover,
        cover_std_error,
        ratio: ratio(mean_cover, plan.opt.mean),
        queries: rows.iter().map(|r| r.queries).collect(),
        cover_sizes: rows.iter().map(|r| r.cover_size).collect(),
        violations,
        passed,
    };
    let json = write_json(cfg, "run_vc.json", &summary)?;
    let csv = write_csv(cfg, "run_vc.csv", &rows)?;
    Ok(Outcome {
        passed,
        files: vec![json, csv],
        summary: format!(
            "|Ŝ| = {}, mean cover {mean_cover} vs opt {}, {violations} violations",
            summary.s_hat.len(),
            plan.opt.mean
        ),
    })
}

fn ratio(x: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        x / opt
    } else if x == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

#[derive(Serialize)]
struct StructuralRow {
    instance: usize,
    source: String,
    n: usize,
    m: usize,
    opt: f64,
    opt_half_width: f64,
    set_size: usize,
    set_bound: f64,
    residual_edges: usize,
    edge_bound: f64,
    passed: bool,
}

pub fn structural_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let instances = load_instances(cfg)?;
    let rows = instances
        .iter()
        .map(|inst| {
            let g = &inst.graph;
            let seed = cfg.instance_seed(inst.index);
            let opt = expected_mvc(g, cfg.p, &Estimator::auto(cfg.trials, seed))?;
            let order = greedy_ordering(g, cfg.p, cfg.trials, &seed)?;
            let set = structural_set(g, cfg.p, &order.pi)?;
            let rep = verify_structural(g, cfg.p, &set, &opt);
            Ok(StructuralRow {
                instance: inst.index,
                source: inst.source.clone(),
                n: g.n(),
                m: g.m(),
                opt: opt.mean,
                opt_half_width: opt.half_width,
                set_size: rep.set_size,
                set_bound: rep.set_bound,
                residual_edges: rep.residual_edges,
                edge_bound: rep.edge_bound,
                passed: rep.passed(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.passed);
    let path = write_csv(cfg, "structural_check.csv", &rows)?;
    Ok(Outcome {
        passed,
        files: vec![path],
        summary: format!(
            "{}/{} instances within both bounds",
            rows.iter().filter(|r| r.passed).count(),
            rows.len()
        ),
    })
}

#[derive(Serialize)]
struct TailCsvRow {
    instance: usize,
    t: f64,
    empirical: f64,
    std_error: f64,
    freedman: f64,
    corollary: Option<f64>,
    opt: f64,
    dominated: bool,
}

/// Slack, in standard errors, allowed on empirical tail frequencies.
pub const TAIL_SLACK: f64 = 3.0;

pub fn concentration(cfg: &ExperimentConfig) -> Result<Outcome> {
    let instances = load_instances(cfg)?;
    let mut rows = Vec::new();
    for inst in &instances {
        let est = Estimator::auto(cfg.trials, cfg.instance_seed(inst.index));
        let rep = empirical_tail(&inst.graph, cfg.p, &est, cfg.t_grid.as_deref(), None)?;
        rows.extend(rep.rows.iter().map(|r| TailCsvRow {
            instance: inst.index,
            t: r.t,
            empirical: r.empirical,
            std_error: r.std_error,
            freedman: r.freedman,
            corollary: r.corollary,
            opt: rep.opt,
            dominated: r.dominated(TAIL_SLACK),
        }));
    }
    let passed = rows.iter().all(|r| r.dominated);
    let path = write_csv(cfg, "concentration.csv", &rows)?;
    Ok(Outcome {
        passed,
        files: vec![path],
        summary: format!(
            "{}/{} grid points dominated",
            rows.iter().filter(|r| r.dominated).count(),
            rows.len()
        ),
    })
}

#[derive(Serialize)]
struct CompareRow {
    strategy: &'static str,
    commit_size: usize,
    feasible: bool,
    mean_cover: f64,
    cover_std_error: f64,
    mean_queries: f64,
    ratio: f64,
    violations: usize,
}

/// Runs the query phase for a fixed commit set on the shared hidden
/// realizations. Strategies over budget are still simulated, with the
/// budget raised to their query count, and reported as infeasible.
fn simulate_strategy(
    g: &BaseGraph,
    params: &SeedParams,
    s: &VertexSet,
    seed: &SeedSpec,
    runs: u64,
) -> Result<(bool, Vec<RunResult>)> {
    let queries = query_set(g, s);
    let feasible = queries.len() as u64 <= params.query_budget;
    let run_params = params.with_query_budget(params.query_budget.max(queries.len() as u64));
    let stream = seed.substream(tags::QUERY_PHASE);
    let results = (0..runs)
        .into_par_iter()
        .map(|t| {
            let hidden = sample_realization(g, params.p, &stream, t)?;
            let mut oracle = QueryOracle::new(hidden, queries.clone(), run_params.query_budget)?;
            run_vertex_cover(g, &run_params, s, &mut oracle)
        })
        .collect::<stochvc_core::Result<Vec<_>>>()?;
    Ok((feasible, results))
}

pub fn compare(cfg: &ExperimentConfig) -> Result<Outcome> {
    let inst = first_instance(cfg)?;
    let g = &inst.graph;
    let params = cfg.seed_params(g.n())?;
    let plan = plan(g, &params, &solver_config(cfg, g.n()), &seed_estimator(cfg))?;
    let l = match &plan.partition {
        Some(p) => p.l.clone(),
        None => {
            let c: Vec<f64> = membership_probs(g, cfg.p, &estimator(cfg))?.iter().map(|e| e.mean).collect();
            partition_lms(&c, params.epsilon)?.l
        }
    };
    let strategies: [(&'static str, VertexSet); 4] = [
        ("query-all", VertexSet::new(g.n())),
        ("commit-V", VertexSet::full(g.n())),
        ("commit-L", l),
        ("main", plan.solution.s_hat.clone()),
    ];
    let runs = cfg.runs.unwrap_or(DEFAULT_RUNS) as u64;
    let seed = cfg.seed_spec();
    let mut rows = Vec::new();
    for (name, s) in &strategies {
        let (feasible, results) = simulate_strategy(g, &params, s, &seed, runs)?;
        let sizes: Vec<f64> = results.iter().map(|r| r.cover.len() as f64).collect();
        let (mean_cover, cover_std_error) = mean_se(&sizes);
        let mean_queries = results.iter().map(|r| r.queries_used as f64).sum::<f64>() / runs as f64;
        rows.push(CompareRow {
            strategy: name,
            commit_size: s.len(),
            feasible,
            mean_cover,
            cover_std_error,
            mean_queries,
            ratio: ratio(mean_cover, plan.opt.mean),
            violations: results.iter().map(|r| r.realized_edge_violations).sum(),
        });
    }
    let passed = rows.iter().all(|r| r.violations == 0) && rows[3].feasible;
    let path = write_csv(cfg, "compare.csv", &rows)?;
    Ok(Outcome {
        passed,
        files: vec![path],
        summary: rows
            .iter()
            .map(|r| format!("{} {:.4}", r.strategy, r.ratio))
            .collect::<Vec<_>>()
            .join(", "),
    })
}
