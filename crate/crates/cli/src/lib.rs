//! Experiment pipeline around the `rangewalk` library: configuration,
//! staged runs with a content-addressed cache, run manifests, the verify
//! suite and report emission.
//!
//! A run writes into one output directory:
//!
//! ```text
//! trajectories/env_NNNN.rwr   binary step streams
//! graph/env_NNNN.{edges,vertices}
//! cuts/env_NNNN.csv           k,provisional
//! metrics/env_NNNN.csv        metric profile on the grid
//! walk/...                    walk trace, heat-kernel CSVs, exit and process samples
//! estimate.json, report.json
//! manifest.json               config hash, stage statuses, file checksums
//! ```

use std::path::PathBuf;

pub mod config;
pub mod estimate;
pub mod pipeline;
pub mod store;
pub mod verify;

use pipeline::{Run, Stage};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("checksum mismatch for {0}")]
    Checksum(String),
    #[error(transparent)]
    Core(#[from] rangewalk::Error),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
}

impl CliError {
    /// 2 for configuration errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Stage(Stage),
    Run,
    Verify,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub stage: Option<String>,
    /// Cache directory; [`store::Cache::default_dir`] when absent.
    pub cache: Option<PathBuf>,
}

pub fn execute(command: Command, opts: &Options) -> Result<(), CliError> {
    let mut loaded = config::load(opts.config.as_deref())?;
    if let Some(seed) = opts.seed {
        loaded.config.master_seed = seed;
        loaded.defaults_applied.retain(|k| k != "master_seed");
    }
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from(&loaded.config.out));
    if opts.out.is_some() {
        loaded.defaults_applied.retain(|k| k != "out");
    }
    let last = match (&command, &opts.stage) {
        (Command::Run, Some(s)) => s.parse()?,
        (Command::Run, None) => Stage::Report,
        (_, Some(_)) => return Err(CliError::Config("--stage only applies to run".into())),
        _ => Stage::Report,
    };
    let cache = opts.cache.clone().unwrap_or_else(store::Cache::default_dir);
    let mut run = Run::open(loaded, out, cache)?;
    match command {
        Command::Stage(s) => run.stage(s),
        Command::Run => run.pipeline(last),
        Command::Verify => {
            let report = verify::verify_suite(&run.config)?;
            let json = serde_json::to_string_pretty(&report).expect("serializes");
            store::write_file(&run.out.join("verify.json"), json.as_bytes())?;
            run.manifest.record(store::StageStatus {
                stage: "verify".into(),
                status: if report.passed { "ok" } else { "checks_failed" }.into(),
                error: None,
                cache_hits: 0,
                cache_misses: 0,
            });
            run.manifest.save(&run.out)?;
            println!("{json}");
            Ok(())
        }
    }
}
