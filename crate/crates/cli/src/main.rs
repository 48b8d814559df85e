use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use stochvc::commands::{self, Outcome};
use stochvc::{ExperimentConfig, Generator, GraphSource, Mode};
use stochvc_core::estimate::DEFAULT_TRIALS;

/// Experiments for stochastic minimum vertex cover in the edge-query model.
#[derive(Parser)]
#[command(name = "stochvc", version)]
struct Cli {
    /// Master seed; every random draw derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo trials per estimate (exact enumeration ignores it).
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Edge-list file (repeatable).
    #[arg(long = "graph")]
    graphs: Vec<PathBuf>,
    /// Generator such as `erdos_renyi(12, 0.4)` (repeatable).
    #[arg(long = "gen")]
    generators: Vec<Generator>,
    /// Repeat every source this many times; random generators draw a fresh
    /// instance each time.
    #[arg(long, default_value_t = 1)]
    repeat: usize,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Replace ε⁵/10³ by this value.
    #[arg(long)]
    gamma: Option<f64>,
    /// Override the query budget.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Plan, then run the query phase on hidden realizations.
    RunVc {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        /// Query-phase runs.
        #[arg(long, default_value_t = commands::DEFAULT_RUNS)]
        runs: usize,
    },
    /// Per-vertex cover probabilities and the expected cover size.
    EstimateOpt {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
    },
    /// Iteration log of the vertex-seed loop.
    SeedTrace {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Greedy ordering and forward-degree set against their bounds.
    StructuralCheck {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        p: f64,
    },
    /// Tail of the realized cover size against the concentration bounds.
    Concentration {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        p: f64,
        /// Comma-separated deviations t.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
    /// Query-all, commit-V, commit-L and the main strategy side by side.
    Compare {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[arg(long, default_value_t = commands::DEFAULT_RUNS)]
        runs: usize,
    },
    /// Write generated graphs as edge lists.
    Generate {
        #[command(flatten)]
        graph: GraphArgs,
        /// Output file (single graph only); defaults to graph_<i>.txt in the
        /// output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

impl GraphArgs {
    fn sources(&self) -> Vec<GraphSource> {
        let once: Vec<GraphSource> = self
            .graphs
            .iter()
            .cloned()
            .map(GraphSource::File)
            .chain(self.generators.iter().copied().map(GraphSource::Generator))
            .collect();
        (0..self.repeat).flat_map(|_| once.iter().cloned()).collect()
    }
}

fn config(cli: &Cli) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        command: String::new(),
        graphs: Vec::new(),
        p: 0.0,
        epsilon: None,
        gamma: None,
        budget: None,
        seed: cli.seed,
        trials: cli.trials,
        runs: None,
        mode: None,
        t_grid: None,
        out_dir: cli.out_dir.clone(),
    };
    let model = |cfg: &mut ExperimentConfig, m: &ModelArgs| {
        cfg.p = m.p;
        cfg.epsilon = m.epsilon;
        cfg.gamma = m.gamma;
        cfg.budget = m.budget;
    };
    let (name, graph) = match &cli.command {
        Command::RunVc { graph, model: m, mode, runs } => {
            model(&mut cfg, m);
            cfg.mode = Some(*mode);
            cfg.runs = Some(*runs);
            ("run-vc", graph)
        }
        Command::EstimateOpt { graph, p, mode } => {
            cfg.p = *p;
            cfg.mode = Some(*mode);
            ("estimate-opt", graph)
        }
        Command::SeedTrace { graph, model: m } => {
            model(&mut cfg, m);
            ("seed-trace", graph)
        }
        Command::StructuralCheck { graph, p } => {
            cfg.p = *p;
            ("structural-check", graph)
        }
        Command::Concentration { graph, p, t_grid } => {
            cfg.p = *p;
            cfg.t_grid = t_grid.clone();
            ("concentration", graph)
        }
        Command::Compare { graph, model: m, mode, runs } => {
            model(&mut cfg, m);
            cfg.mode = Some(*mode);
            cfg.runs = Some(*runs);
            ("compare", graph)
        }
        Command::Generate { graph, .. } => {
            cfg.p = 1.0;
            ("generate", graph)
        }
    };
    cfg.command = name.into();
    cfg.graphs = graph.sources();
    cfg
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = config(cli);
    cfg.validate().with_context(|| cfg.command.clone())?;
    let outcome = match &cli.command {
        Command::RunVc { .. } => commands::run_vc(&cfg),
        Command::EstimateOpt { .. } => commands::estimate_opt(&cfg),
        Command::SeedTrace { .. } => commands::seed_trace(&cfg),
        Command::StructuralCheck { .. } => commands::structural_check(&cfg),
        Command::Concentration { .. } => commands::concentration(&cfg),
        Command::Compare { .. } => commands::compare(&cfg),
        Command::Generate { output, .. } => commands::generate_cmd(&cfg, output.as_deref()),
    };
    outcome.with_context(|| cfg.command.clone())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start {t} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("invariant checks failed");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
