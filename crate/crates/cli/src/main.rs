//! `dyadlab`: run dyadic operators, probes and norm diagnostics from a JSON config.
//!
//! Exit codes: 0 when every configured target is met, 1 when a target is
//! missed, 2 on configuration or precondition errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::Sink;

#[derive(Parser, Debug)]
#[command(name = "dyadlab", version, about = "Exact dyadic operators and compactness probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, env = "DYADLAB_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply the configured operator to the configured inputs.
    Apply(RunArgs),
    /// Run the configured probe.
    Probe(RunArgs),
    /// BMO, BMO_r, Haar BMO_2, CMO and A_P diagnostics.
    Norms(RunArgs),
    /// List input generators and probe names.
    ListGenerators,
}

type Runner = fn(&config::ExperimentConfig, &Sink) -> Result<bool>;

fn run(command: Command) -> Result<bool> {
    let (args, which, name): (RunArgs, Runner, &str) = match command {
        Command::ListGenerators => {
            commands::list_generators();
            return Ok(true);
        }
        Command::Apply(a) => (a, commands::apply, "apply"),
        Command::Probe(a) => (a, commands::probe, "probe"),
        Command::Norms(a) => (a, commands::norms, "norms"),
    };
    let mut cfg = config::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let prefix = match &cfg.probe {
        Some(p) if name == "probe" => p.name(),
        _ => name,
    };
    let sink = Sink::new(&cfg, args.out.as_deref(), prefix);
    dyadlab::par::with_threads(args.threads, || which(&cfg, &sink))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
