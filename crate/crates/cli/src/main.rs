//! `ghlevy`: simulate GH Lévy paths, compare marginals against exact
//! variates, and dump bound diagnostics.

mod config;
mod run;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;

use config::{Command, Config};

#[derive(Debug, Parser)]
#[command(name = "ghlevy", version, about = "Generalised hyperbolic Lévy process simulator")]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Command to run; overrides the config.
    #[arg(long, value_enum)]
    cmd: Option<Command>,
    /// Worker threads; overrides the config. 0 means all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let config = Config::load(&args.config)?;
    let cmd = args.cmd.or(config.command).context("no command: pass --cmd or set \"command\" in the config")?;
    let seed = args.seed.or(config.seed).context("no seed: pass --seed or set \"seed\" in the config")?;
    if let Some(n) = args.threads.or(config.threads) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let run = run::Run::new(config, seed, run::output_dir(args.out.as_deref()))?;
    match cmd {
        Command::Simulate => run::simulate(&run),
        Command::MarginalTest => run::marginal_test(&run),
        Command::Diagnostics => run::diagnostics(&run),
    }
}
