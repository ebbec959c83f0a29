use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rangewalk_cli::pipeline::Stage;
use rangewalk_cli::{execute, Command, Options};

#[derive(Parser)]
#[command(name = "rangewalk", version, about = "Random walks on the range of a lattice random walk")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment config (flat TOML); defaults for every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// With `run`: stop after this stage.
    #[arg(long, global = true)]
    stage: Option<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Simulate and cache trajectories.
    Generate,
    /// Export range graphs as edge lists and vertex tables.
    Graph,
    /// Detect cut times.
    Cuts,
    /// Resistance and distance profiles.
    Metrics,
    /// Walks on the range: trace, heat kernels, exit times, rescaled samples.
    Walk,
    /// Ensemble estimators.
    Estimate,
    /// Write report.json from the estimates.
    Report,
    /// Oracle and invariant checks at capped sizes.
    Verify,
    /// Every stage in order.
    Run,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("rangewalk: {e}");
            return ExitCode::from(2);
        }
    }
    let command = match cli.command {
        Cmd::Generate => Command::Stage(Stage::Generate),
        Cmd::Graph => Command::Stage(Stage::Graph),
        Cmd::Cuts => Command::Stage(Stage::Cuts),
        Cmd::Metrics => Command::Stage(Stage::Metrics),
        Cmd::Walk => Command::Stage(Stage::Walk),
        Cmd::Estimate => Command::Stage(Stage::Estimate),
        Cmd::Report => Command::Stage(Stage::Report),
        Cmd::Verify => Command::Verify,
        Cmd::Run => Command::Run,
    };
    let opts = Options { config: cli.config, seed: cli.seed, out: cli.out, stage: cli.stage, cache: None };
    match execute(command, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rangewalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
