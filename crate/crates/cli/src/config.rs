//! Experiment configuration: a flat TOML table of typed keys, every key
//! optional. Missing keys take the defaults below and are listed in the
//! manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rangewalk::network::SolverConfig;
use rangewalk::stats::BootstrapConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    /// Time grid for profiles, cut counts and volume ratios.
    pub grid: Vec<usize>,
    /// Trajectory length; twice the largest grid point when absent.
    pub horizon: Option<usize>,
    /// Environments per grid point.
    pub seeds: usize,
    pub master_seed: u64,
    /// Provisional buffer before the horizon; the log-power default when absent.
    pub buffer: Option<usize>,

    pub solver_tolerance: f64,
    pub solver_max_iter_factor: usize,
    pub dense_max: usize,
    pub oracle_cap: usize,
    pub brute_force_cap: usize,
    pub verify_seeds: usize,
    pub verify_horizon: usize,

    pub bootstrap_resamples: usize,
    pub two_sided_m: usize,
    pub two_sided_pairs: usize,

    pub t_grid: Vec<f64>,
    pub process_n: usize,
    pub process_envs: usize,
    pub heat_kernel_n: usize,
    pub heat_kernel_x: Vec<f64>,
    pub heat_kernel_envs: usize,
    pub heat_kernel_replicas: u64,
    pub exit_radii: Vec<u32>,
    pub exit_envs: usize,
    pub exit_max_steps: u64,
    pub cover_radii: Vec<f64>,
    pub cover_envs: usize,
    pub walk_trace_steps: usize,

    /// Acceptance band for log-log slopes.
    pub slope_band: [f64; 2],
    /// Largest allowed spread of normalized exit times.
    pub exit_band: f64,
    /// Relative tolerance of the heat-kernel value at `x = 0`.
    pub heat_kernel_band: f64,
    /// Largest allowed covering number.
    pub cover_cap: usize,

    pub out: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 4,
            grid: vec![1 << 10, 1 << 11, 1 << 12, 1 << 13],
            horizon: None,
            seeds: 30,
            master_seed: 1,
            buffer: None,
            solver_tolerance: 1e-10,
            solver_max_iter_factor: 20,
            dense_max: 3000,
            oracle_cap: rangewalk::resistance_metrics::ORACLE_CAP,
            brute_force_cap: rangewalk::cut_structure::BRUTE_FORCE_CAP,
            verify_seeds: 20,
            verify_horizon: 2000,
            bootstrap_resamples: 1000,
            two_sided_m: 256,
            two_sided_pairs: 10_000,
            t_grid: vec![0.5, 1.0, 2.0],
            process_n: 128,
            process_envs: 500,
            heat_kernel_n: 64,
            heat_kernel_x: vec![0.0, 0.5, 1.0],
            heat_kernel_envs: 20,
            heat_kernel_replicas: 2000,
            exit_radii: vec![4, 8, 16, 32],
            exit_envs: 100,
            exit_max_steps: 10_000_000,
            cover_radii: vec![4.0, 8.0, 16.0],
            cover_envs: 20,
            walk_trace_steps: 1000,
            slope_band: [-0.8, -0.25],
            exit_band: 3.0,
            heat_kernel_band: 0.25,
            cover_cap: 6,
            out: "rangewalk-out".into(),
        }
    }
}

/// A validated configuration and the keys that fell back to defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub defaults_applied: Vec<String>,
}

const KEYS: &[&str] = &[
    "dimension", "grid", "horizon", "seeds", "master_seed", "buffer", "solver_tolerance",
    "solver_max_iter_factor", "dense_max", "oracle_cap", "brute_force_cap", "verify_seeds",
    "verify_horizon", "bootstrap_resamples", "two_sided_m", "two_sided_pairs", "t_grid", "process_n",
    "process_envs", "heat_kernel_n", "heat_kernel_x", "heat_kernel_envs", "heat_kernel_replicas",
    "exit_radii", "exit_envs", "exit_max_steps", "cover_radii", "cover_envs", "walk_trace_steps",
    "slope_band", "exit_band", "heat_kernel_band", "cover_cap", "out",
];

pub fn parse(text: &str) -> Result<Loaded, CliError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let config: ExperimentConfig = table.clone().try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let defaults_applied = KEYS.iter().filter(|k| !table.contains_key(**k)).map(|k| k.to_string()).collect();
    config.validate()?;
    Ok(Loaded { config, defaults_applied })
}

pub fn load(path: Option<&Path>) -> Result<Loaded, CliError> {
    match path {
        None => parse(""),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            parse(&text)
        }
    }
}

fn increasing<T: PartialOrd>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

impl ExperimentConfig {
    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or_else(|| 2 * self.grid.last().copied().unwrap_or(1))
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            tolerance: self.solver_tolerance,
            max_iter_factor: self.solver_max_iter_factor,
            dense_max: self.dense_max,
        }
    }

    pub fn bootstrap(&self, purpose: u64) -> BootstrapConfig {
        BootstrapConfig {
            resamples: self.bootstrap_resamples,
            seed: rangewalk::seeds::purpose_seed(self.master_seed, purpose),
            level_permille: 950,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: &str| Err(CliError::Config(m.into()));
        if self.dimension == 0 || self.dimension > rangewalk::lattice_walk::MAX_DIMENSION {
            return fail("dimension out of range");
        }
        if self.grid.is_empty() || !increasing(&self.grid) || self.grid[0] == 0 {
            return fail("grid must be nonempty, positive and strictly increasing");
        }
        if self.horizon() < *self.grid.last().unwrap() {
            return fail("horizon must cover the grid");
        }
        if self.t_grid.is_empty() || !increasing(&self.t_grid) || self.t_grid[0] <= 0.0 {
            return fail("t_grid must be nonempty, positive and strictly increasing");
        }
        if self.heat_kernel_x.is_empty() || !increasing(&self.heat_kernel_x) || self.heat_kernel_x[0] < 0.0
            || *self.heat_kernel_x.last().unwrap() > 8.0
        {
            return fail("heat_kernel_x must be strictly increasing within [0, 8]");
        }
        if self.exit_radii.is_empty() || !increasing(&self.exit_radii) || self.exit_radii[0] == 0 {
            return fail("exit_radii must be nonempty, positive and strictly increasing");
        }
        if self.cover_radii.is_empty() || !increasing(&self.cover_radii) || self.cover_radii[0] <= 0.0 {
            return fail("cover_radii must be nonempty, positive and strictly increasing");
        }
        let counts = [
            self.seeds,
            self.verify_seeds,
            self.process_envs,
            self.heat_kernel_envs,
            self.exit_envs,
            self.cover_envs,
            self.two_sided_pairs,
            self.heat_kernel_replicas as usize,
        ];
        if counts.contains(&0) {
            return fail("seed and replica counts must be at least 1");
        }
        if !(self.solver_tolerance > 0.0 && self.exit_band > 0.0 && self.heat_kernel_band > 0.0) {
            return fail("tolerances and bands must be positive");
        }
        if self.slope_band[0] >= self.slope_band[1] {
            return fail("slope_band must be [low, high] with low < high");
        }
        if self.process_n < 2 || self.heat_kernel_n < 2 || self.two_sided_m == 0 {
            return fail("process_n and heat_kernel_n must be at least 2, two_sided_m at least 1");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out.clear();
        hex(&Sha256::digest(serde_json::to_vec(&c).expect("config serializes")))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
