use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ncmemo_cli::{
    cmd_generate, cmd_mia, cmd_partition, cmd_report, cmd_rewire_sweep, cmd_run, cmd_sweep_homophily,
    ExperimentConfig, RunOptions, SEED_ENV,
};

#[derive(Parser)]
#[command(name = "ncmemo", version, about = "Label memorization experiments for GNN node classification")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Global seed; overrides the config, which overrides NCMEMO_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Run the whole pipeline in double precision.
    #[arg(long)]
    float64: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured graph as a bundle.
    Generate(Common),
    /// Write the train/val/test and shared/candidate/independent split.
    Partition(Common),
    /// Run every module listed in the config.
    Run(Common),
    /// Regenerate the synthetic graph over a list of homophily levels.
    SweepHomophily {
        #[command(flatten)]
        common: Common,
        /// Comma-separated levels; defaults to `sweep.homophily`.
        #[arg(long, value_delimiter = ',')]
        h: Option<Vec<f64>>,
    },
    /// Rewire at every configured mode and budget and retrain.
    RewireSweep(Common),
    /// Membership inference against the f models.
    Mia(Common),
    /// Consolidate an output directory into summary.json.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn setup(common: &Common) -> Result<(ExperimentConfig, RunOptions)> {
    let cfg = ExperimentConfig::load(&common.config)?;
    let opts = RunOptions::resolve(
        &cfg,
        common.out.clone(),
        common.seed,
        common.float64,
        std::env::var(SEED_ENV).ok(),
    )?;
    Ok((cfg, opts))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Generate(c) => {
            let (cfg, opts) = setup(&c)?;
            let dir = cmd_generate(&cfg, &opts)?;
            println!("{}", dir.display());
        }
        Command::Partition(c) => {
            let (cfg, opts) = setup(&c)?;
            cmd_partition(&cfg, &opts)?;
        }
        Command::Run(c) => {
            let (cfg, opts) = setup(&c)?;
            let s = cmd_run(&cfg, &opts)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
        Command::SweepHomophily { common, h } => {
            let (cfg, opts) = setup(&common)?;
            let h = h.unwrap_or_else(|| cfg.sweep.homophily.clone());
            let s = cmd_sweep_homophily(&cfg, &h, &opts)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
        Command::RewireSweep(c) => {
            let (cfg, opts) = setup(&c)?;
            cmd_rewire_sweep(&cfg, &opts)?;
        }
        Command::Mia(c) => {
            let (cfg, opts) = setup(&c)?;
            let s = cmd_mia(&cfg, &opts)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
        Command::Report { dir } => {
            let r = cmd_report(&dir)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
