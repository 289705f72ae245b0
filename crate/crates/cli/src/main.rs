mod commands;
mod config;
mod error;
mod workspace;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::workspace::DirLock;

#[derive(Parser, Debug)]
#[command(name = "scarystats", version, about = "Scary vs. baseline story corpus analytics")]
struct Cli {
    /// `key = value` config file with dotted keys (e.g. `corpus.scary`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `run.out_dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides `run.threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides any config key, e.g. `--set lexicon.min_occurrence=50`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean and length-filter the corpora into the story cache.
    Ingest,
    /// Stories per year and per GMT hour.
    Stats,
    /// Build the SSToP lexicon.
    Sstop,
    /// SSToP of nouns binned by embedding distance to the human vector.
    Similarity,
    /// Train the logistic fear classifier.
    FearTrain(TrainArgs),
    /// Evaluate the fear classifier and the majority baseline on the test split.
    FearEval,
    /// Fear and SSToP decile profiles and their story modes.
    Modes,
    /// LDA topics and their yearly trend.
    Topics(TopicArgs),
    /// Monthly share of disease-related stories.
    Disease,
}

#[derive(clap::Args, Debug)]
struct TrainArgs {
    #[arg(long, value_parser = ["l1", "l2"])]
    reg: Option<String>,
    /// Fixed penalty weight; without it the built-in grid is searched.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, value_parser = ["up", "down"])]
    balance: Option<String>,
}

#[derive(clap::Args, Debug)]
struct TopicArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::defaults(),
    };
    for o in &cli.overrides {
        cfg.apply(o)?;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.set("run.out_dir", dir.display().to_string())?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("run.seed", seed.to_string())?;
    }
    if let Some(n) = cli.threads {
        cfg.set("run.threads", n.to_string())?;
    }
    let mut set_opt = |key: &str, v: Option<String>| match v {
        Some(v) => cfg.set(key, v),
        None => Ok(()),
    };
    match &cli.command {
        Command::FearTrain(a) => {
            set_opt("fear.reg", a.reg.clone())?;
            set_opt("fear.lambda", a.lambda.map(|x| x.to_string()))?;
            set_opt("fear.epochs", a.epochs.map(|x| x.to_string()))?;
            set_opt("fear.lr", a.lr.map(|x| x.to_string()))?;
            set_opt("fear.balance", a.balance.clone())?;
        }
        Command::Topics(a) => {
            set_opt("topics.k", a.k.map(|x| x.to_string()))?;
            set_opt("topics.alpha", a.alpha.map(|x| x.to_string()))?;
            set_opt("topics.beta", a.beta.map(|x| x.to_string()))?;
            set_opt("topics.iterations", a.iterations.map(|x| x.to_string()))?;
        }
        _ => {}
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = build_config(&cli)?;
    cfg.seed()?;
    if let Some(n) = cfg.parse::<usize>("run.threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }
    let _lock = DirLock::acquire(&cfg.out_dir())?;
    match cli.command {
        Command::Ingest => commands::ingest(&cfg),
        Command::Stats => commands::stats(&cfg),
        Command::Sstop => commands::sstop(&cfg),
        Command::Similarity => commands::similarity(&cfg),
        Command::FearTrain(_) => commands::fear_train(&cfg),
        Command::FearEval => commands::fear_eval(&cfg),
        Command::Modes => commands::modes(&cfg),
        Command::Topics(_) => commands::topics(&cfg),
        Command::Disease => commands::disease(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
