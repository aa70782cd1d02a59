use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use distbap::experiments::{
    generate_instance, parse_range, run_experiment, run_experiment_to, Distribution,
    ExperimentConfig, ExperimentName,
};
use distbap::graph::check_mcm;
use distbap::instance::{
    instance_to_json, matching_to_json, read_instance, read_matching, write_instance,
};
use distbap::merge::{check_merge_conditions, merge_or_warmstart, Partition};
use distbap::pruner::default_initial_matching;
use distbap::sim::{run_distributed_prune_bap, CommGraph};
use distbap::{brute_force_bottleneck, BapError, Strategy};

/// Bottleneck assignment by iterative pruning, with a distributed simulator.
#[derive(Parser)]
#[command(name = "distbap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random Euclidean instance.
    Gen(GenArgs),
    /// Solve an instance on a simulated network and write the iteration trace.
    Solve(SolveArgs),
    /// Exhaustive bottleneck for small instances.
    Oracle(OracleArgs),
    /// Run an experiment sweep and write its CSV.
    Experiment(ExperimentArgs),
    /// Split an instance in two, solve both parts and merge them.
    Merge(MergeArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of tasks.
    #[arg(long)]
    n: usize,
    /// Number of agents, defaults to the number of tasks.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value = "uniform_square")]
    dist: Distribution,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file, stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// dfs, dfs-index or bfs.
    #[arg(long, default_value = "dfs")]
    strategy: Strategy,
    /// complete, path, ring, random:<seed> or file:<adjacency.json>.
    #[arg(long, default_value = "complete")]
    topology: String,
    /// Initial matching as {"matched_task": [...]}.
    #[arg(long)]
    warm_start: Option<PathBuf>,
    /// Check the result against the exhaustive oracle when the instance is small enough.
    #[arg(long)]
    verify: bool,
    /// Iteration trace CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-tick network metrics CSV.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    name: ExperimentName,
    /// Task counts as a:b, a:b:step or a,b,c.
    #[arg(long)]
    n: Option<String>,
    /// Number of agents for every n, defaults to n.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "complete")]
    topology: String,
    /// Strategies to run, repeatable or comma separated.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<Strategy>,
    #[arg(long)]
    dist: Option<Distribution>,
    /// Output CSV, stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MergeArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Agents of the first part (0-based, comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    split_agents: Vec<usize>,
    /// Tasks of the first part (0-based, comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    split_tasks: Vec<usize>,
    #[arg(long, default_value = "dfs")]
    strategy: Strategy,
    /// Fail unless both parts are bottleneck clusters around critical edges.
    #[arg(long)]
    verify: bool,
    /// Report JSON, stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_text(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => match io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn gen(args: GenArgs) -> anyhow::Result<()> {
    let g = generate_instance(args.n, args.m.unwrap_or(args.n), args.dist, args.seed)?;
    match args.out {
        Some(path) => write_instance(&g, &path)?,
        None => write_text(None, &(instance_to_json(&g) + "\n"))?,
    }
    Ok(())
}

fn solve(args: SolveArgs) -> anyhow::Result<()> {
    let g = read_instance(&args.instance)?;
    let comm = CommGraph::parse(&args.topology, g.agent_count())?;
    let m0 = match &args.warm_start {
        Some(path) => read_matching(path)?,
        None => default_initial_matching(&g),
    };
    if m0.agent_count() != g.agent_count() {
        return Err(BapError::InvalidInput(format!(
            "warm start has {} agents, instance has {}",
            m0.agent_count(),
            g.agent_count()
        ))
        .into());
    }
    check_mcm(&g, &m0)?;
    let (matching, trace, metrics) = run_distributed_prune_bap(&g, &comm, &m0, args.strategy)?;
    let weight = trace.bottleneck_weight();
    if args.verify {
        check_mcm(&g, &matching)?;
        match brute_force_bottleneck(&g) {
            Ok((_, best)) if best != weight => {
                bail!("verification failed: solver returned {weight}, oracle {best}")
            }
            Ok(_) => eprintln!("verified against the exhaustive oracle"),
            Err(BapError::TooLarge { .. }) => eprintln!("note: instance too large for the oracle"),
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(path) = &args.out {
        let file = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        trace.write_csv(file)?;
    }
    if let Some(path) = &args.metrics {
        let file = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        metrics.write_csv(file)?;
    }
    println!("bottleneck {weight}");
    println!("iterations {}", trace.iterations());
    println!("time_steps {}", trace.time_steps(comm.diameter()));
    println!("messages {}", metrics.messages_sent);
    println!("matching {}", matching_to_json(&matching));
    Ok(())
}

fn oracle(args: OracleArgs) -> anyhow::Result<()> {
    let g = read_instance(&args.instance)?;
    let (m, w) = brute_force_bottleneck(&g)?;
    println!("bottleneck {w}");
    println!("matching {}", matching_to_json(&m));
    Ok(())
}

fn experiment(args: ExperimentArgs) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::new(args.name);
    if let Some(n) = &args.n {
        cfg.n_values = parse_range(n)?;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if !args.strategy.is_empty() {
        cfg.strategies = args.strategy;
    }
    if let Some(dist) = args.dist {
        cfg.dist = dist;
    }
    cfg.agents = args.m;
    cfg.seed = args.seed;
    cfg.topology = args.topology;
    let rows = match &args.out {
        Some(path) => run_experiment(&cfg, path)?,
        None => run_experiment_to(&cfg, io::stdout().lock())?,
    };
    eprintln!("{} rows", rows);
    Ok(())
}

fn merge(args: MergeArgs) -> anyhow::Result<()> {
    let g = read_instance(&args.instance)?;
    let p = Partition::solve(g, &args.split_agents, &args.split_tasks, args.strategy)?;
    check_merge_conditions(&p, args.verify)?;
    let (m, report, trace) = merge_or_warmstart(&p, args.strategy)?;
    write_text(args.out.as_deref(), &(report.to_json() + "\n"))?;
    eprintln!("decision {}", serde_json::to_string(&report.decision)?);
    if let Some(trace) = trace {
        eprintln!("warm-start iterations {}", trace.iterations());
    }
    eprintln!(
        "bottleneck {}",
        m.max_weight(&p.graph)
            .map_or("none".into(), |w| w.to_string())
    );
    eprintln!("matching {}", matching_to_json(&m));
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<BapError>() {
        Some(e) if e.is_input_error() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Oracle(a) => oracle(a),
        Command::Experiment(a) => experiment(a),
        Command::Merge(a) => merge(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // Library errors already embed their cause, so print each
            // link of the chain only when it adds something.
            let mut message = String::new();
            for cause in err.chain().map(ToString::to_string) {
                if !message.ends_with(&cause) {
                    if !message.is_empty() {
                        message.push_str(": ");
                    }
                    message.push_str(&cause);
                }
            }
            eprintln!("error: {message}");
            ExitCode::from(exit_code(&err))
        }
    }
}
