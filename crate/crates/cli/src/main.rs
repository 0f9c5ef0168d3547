use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ganq_core::env::EnvKind;
use ganq_core::harness::{self, AgentKind, Overrides, RunConfig};
use ganq_core::{Error, Result};

/// Distributional RL lab: GAN Q-learning, tabular and deep baselines.
#[derive(Parser)]
#[command(name = "ganq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent on one environment over a list of seeds.
    Train(TrainArgs),
    /// Print the exact optimal values and policy of a tabular environment.
    Solve {
        #[arg(long)]
        env: EnvKind,
    },
    /// Dirac generator vs quadratic critic on a two-armed bandit.
    BanditDemo {
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
    },
    /// Q, dQ and GAN Q-learning on the three tabular environments.
    Table1(SweepArgs),
    /// W1 between generator samples and Monte-Carlo returns on two-state.
    Fig1(SweepArgs),
    /// Compare analytic and finite-difference gradients on random networks.
    Gradcheck {
        #[arg(long, default_value_t = 100)]
        networks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Run configuration file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<EnvKind>,
    #[arg(long)]
    agent: Option<AgentKind>,
    /// Comma list with optional ranges, e.g. `0..5,9`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Extra `key=value` setting; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    no_plot: bool,
    /// Exit 0 even if some seed stopped on a non-finite loss.
    #[arg(long)]
    allow_divergence: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "0..10")]
    seeds: String,
    #[arg(long, default_value = "runs")]
    output_dir: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    allow_divergence: bool,
}

fn settings_text(set: &[String]) -> Result<String> {
    let mut text = String::new();
    for kv in set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        text += &format!("{} = {}\n", k.trim(), v.trim());
    }
    Ok(text)
}

fn overrides(set: &[String]) -> Result<Overrides> {
    let cfg = RunConfig::parse(&settings_text(set)?)?;
    if cfg != (RunConfig { overrides: cfg.overrides.clone(), ..RunConfig::default() }) {
        return Err(Error::Config("--set accepts agent settings only".into()));
    }
    Ok(cfg.overrides)
}

fn seeds(text: &str) -> Result<Vec<u64>> {
    Ok(RunConfig::parse(&format!("seeds = {text}"))?.seeds)
}

fn divergence_exit(diverged: &[String], allow: bool) -> ExitCode {
    if diverged.is_empty() {
        return ExitCode::SUCCESS;
    }
    for d in diverged {
        eprintln!("diverged: {d}");
    }
    if allow {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: {} run(s) diverged; pass --allow-divergence to accept", diverged.len());
        ExitCode::from(3)
    }
}

fn train(args: TrainArgs) -> Result<ExitCode> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(env) = args.env {
        cfg.env = env;
    }
    if let Some(agent) = args.agent {
        cfg.agent = agent;
    }
    if let Some(s) = &args.seeds {
        cfg.seeds = seeds(s)?;
    }
    if let Some(dir) = args.output_dir {
        cfg.output_dir = dir;
    }
    if args.no_plot {
        cfg.plot = false;
    }
    cfg.overrides = cfg.overrides.merged(&overrides(&args.set)?);
    let art = harness::run(&cfg)?;
    println!("config {} ({:.1}s)", art.config_hash, art.wall_clock_secs);
    for log in &art.logs {
        println!(
            "seed {}: mean reward {:.3}, trailing-100 {:.3}{}",
            log.seed,
            log.mean_reward(),
            log.trailing_mean(100),
            if log.diverged.is_some() { " (diverged)" } else { "" }
        );
    }
    for f in &art.files {
        println!("wrote {}", f.display());
    }
    let diverged: Vec<String> = art.logs.iter().filter_map(|l| l.diverged.clone().map(|d| format!("seed {}: {d}", l.seed))).collect();
    Ok(divergence_exit(&diverged, args.allow_divergence))
}

fn table1(args: SweepArgs) -> Result<ExitCode> {
    let table = harness::table1(&seeds(&args.seeds)?, &overrides(&args.set)?)?;
    fs::create_dir_all(&args.output_dir)?;
    let path = args.output_dir.join("table1.csv");
    table.write_csv(&path)?;
    print!("{}", table.render());
    println!("wrote {}", path.display());
    let diverged: Vec<String> = table
        .cells
        .iter()
        .flat_map(|c| c.diverged.iter().map(move |s| format!("{} on {} seed {s}", c.agent, c.env)))
        .collect();
    Ok(divergence_exit(&diverged, args.allow_divergence))
}

fn fig1(args: SweepArgs) -> Result<ExitCode> {
    let logs = harness::fig1(&seeds(&args.seeds)?, &overrides(&args.set)?)?;
    harness::write_fig1(&logs, &args.output_dir)?;
    for log in &logs {
        let first = log.diagnostics.first().map(|d| d.mean());
        let last = log.diagnostics.last().map(|d| d.mean());
        println!("seed {}: mean W1 {:?} -> {:?}", log.seed, first, last);
    }
    println!("wrote {}", args.output_dir.join("fig1-w1.csv").display());
    let diverged: Vec<String> = logs.iter().filter_map(|l| l.diverged.clone().map(|d| format!("seed {}: {d}", l.seed))).collect();
    Ok(divergence_exit(&diverged, args.allow_divergence))
}

fn gradcheck(networks: usize, seed: u64) -> ExitCode {
    let lines = harness::gradcheck_sweep(networks, seed);
    let mut worst_first: f64 = 0.0;
    let mut worst_penalty: f64 = 0.0;
    for l in &lines {
        worst_first = worst_first.max(l.param).max(l.input.unwrap_or(0.0));
        worst_penalty = worst_penalty.max(l.penalty.unwrap_or(0.0));
    }
    println!("{} networks; worst first-order relative error {worst_first:.3e}; worst penalty {worst_penalty:.3e}", lines.len());
    if worst_first <= 1e-6 && worst_penalty <= 1e-4 {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: gradient check exceeded tolerance");
        ExitCode::FAILURE
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train(args) => train(args),
        Command::Solve { env } => {
            print!("{}", harness::solve(env)?.render());
            Ok(ExitCode::SUCCESS)
        }
        Command::BanditDemo { epsilon } => {
            print!("{}", harness::bandit_demo(epsilon)?.1);
            Ok(ExitCode::SUCCESS)
        }
        Command::Table1(args) => table1(args),
        Command::Fig1(args) => fig1(args),
        Command::Gradcheck { networks, seed } => Ok(gradcheck(networks, seed)),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
