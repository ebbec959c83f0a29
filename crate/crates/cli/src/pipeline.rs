//! Stages of a run. Each stage reads the files of the stages before it from
//! the output directory, checking them against the manifest, so stages can
//! run as separate invocations.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rangewalk::cut_structure::{find_cut_times, CutTimeSet};
use rangewalk::formats::{self, HeatKernelRow};
use rangewalk::lattice_walk::{generate_trajectory, Trajectory};
use rangewalk::range_graph::{build_range_graph, RangeGraph};
use rangewalk::range_walker::{heat_kernel_estimate, simulate_walk, ExitOutcome};
use rangewalk::resistance_metrics::{covering_number, metric_profile, MetricProfile};
use rangewalk::scaling_lab::{exit_sample, rescaled_process_sample, walk_time, RescaledSample};
use rangewalk::seeds::{purpose_seed, replica_seed};

use crate::config::{ExperimentConfig, Loaded};
use crate::estimate::{self, PointTables};
use crate::store::{read_file, write_file, Cache, RunManifest, StageStatus};
use crate::CliError;

pub const REPORT: &str = "report.json";
pub const ESTIMATE: &str = "estimate.json";

// Seed purposes for the ensembles drawn besides the main environments.
pub(crate) const PROCESS_ENVS: u64 = 10;
pub(crate) const HEAT_KERNEL_ENVS: u64 = 11;
pub(crate) const EXIT_ENVS: u64 = 12;
pub(crate) const TWO_SIDED: u64 = 13;
pub(crate) const BOOTSTRAP: u64 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    Generate,
    Graph,
    Cuts,
    Metrics,
    Walk,
    Estimate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] =
        [Stage::Generate, Stage::Graph, Stage::Cuts, Stage::Metrics, Stage::Walk, Stage::Estimate, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Graph => "graph",
            Stage::Cuts => "cuts",
            Stage::Metrics => "metrics",
            Stage::Walk => "walk",
            Stage::Estimate => "estimate",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown stage {s:?}")))
    }
}

pub fn env_name(k: usize) -> String {
    format!("env_{k:04}")
}

pub struct Run {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub cache: Cache,
    pub manifest: RunManifest,
}

impl Run {
    /// Opens `out`, keeping stage records from an earlier run of the same
    /// configuration.
    pub fn open(loaded: Loaded, out: PathBuf, cache_dir: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(&out).map_err(|e| crate::store::io_err(&out, e))?;
        let hash = loaded.config.hash();
        let manifest = match RunManifest::load(&out)? {
            Some(m) if m.config_hash == hash => m,
            _ => RunManifest {
                config_hash: hash,
                artifact_version: env!("CARGO_PKG_VERSION").to_string(),
                defaults_applied: loaded.defaults_applied,
                config: loaded.config.clone(),
                stages: Vec::new(),
                files: Vec::new(),
            },
        };
        Ok(Self { config: loaded.config, out, cache: Cache::open(cache_dir)?, manifest })
    }

    /// Runs one stage and records its outcome in the manifest.
    pub fn stage(&mut self, stage: Stage) -> Result<(), CliError> {
        let before = self.cache.counts();
        let result = match stage {
            Stage::Generate => self.generate(),
            Stage::Graph => self.graph(),
            Stage::Cuts => self.cuts(),
            Stage::Metrics => self.metrics(),
            Stage::Walk => self.walk(),
            Stage::Estimate => self.estimate(),
            Stage::Report => self.report(),
        };
        self.cache.save()?;
        let after = self.cache.counts();
        self.manifest.record(StageStatus {
            stage: stage.name().into(),
            status: if result.is_ok() { "ok" } else { "failed" }.into(),
            error: result.as_ref().err().map(|e| e.to_string()),
            cache_hits: after.0 - before.0,
            cache_misses: after.1 - before.1,
        });
        self.manifest.save(&self.out)?;
        result.map_err(|e| match e {
            CliError::Config(_) => e,
            other => CliError::Stage { stage: stage.name().into(), message: other.to_string() },
        })
    }

    /// All stages in order, stopping after `last`.
    pub fn pipeline(&mut self, last: Stage) -> Result<(), CliError> {
        for stage in Stage::ALL {
            self.stage(stage)?;
            if stage == last {
                break;
            }
        }
        Ok(())
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn read(&self, rel: &str) -> Result<Vec<u8>, CliError> {
        self.manifest.read_checked(&self.out, rel)
    }

    fn env_seed(&self, k: usize) -> u64 {
        replica_seed(self.config.master_seed, k as u64)
    }

    fn generate(&self) -> Result<(), CliError> {
        let c = &self.config;
        (0..c.seeds).into_par_iter().try_for_each(|k| {
            let seed = self.env_seed(k);
            let key = Cache::key(&["trajectory", &c.dimension.to_string(), &c.horizon().to_string(), &seed.to_string()]);
            let bytes = self.cache.get_or_insert(&format!("traj-{key}.rwr"), || {
                Ok(generate_trajectory(c.dimension, c.horizon(), seed)?.to_bytes())
            })?;
            write_file(&self.path(&format!("trajectories/{}.rwr", env_name(k))), &bytes)
        })
    }

    fn trajectory(&self, k: usize) -> Result<Trajectory, CliError> {
        Ok(Trajectory::from_bytes(&self.read(&format!("trajectories/{}.rwr", env_name(k)))?)?)
    }

    fn graph(&self) -> Result<(), CliError> {
        (0..self.config.seeds).into_par_iter().try_for_each(|k| {
            let g = build_range_graph(&self.trajectory(k)?)?;
            let mut edges = Vec::new();
            formats::write_edge_list(&g, &mut edges)?;
            let mut table = Vec::new();
            formats::write_vertex_table(&g, &mut table)?;
            write_file(&self.path(&format!("graph/{}.edges", env_name(k))), &edges)?;
            write_file(&self.path(&format!("graph/{}.vertices", env_name(k))), &table)
        })
    }

    fn buffered(&self, cuts: CutTimeSet) -> CutTimeSet {
        match self.config.buffer {
            Some(b) => cuts.with_buffer(b),
            None => cuts,
        }
    }

    fn cuts(&self) -> Result<(), CliError> {
        (0..self.config.seeds).into_par_iter().try_for_each(|k| {
            let g = build_range_graph(&self.trajectory(k)?)?;
            let mut buf = Vec::new();
            formats::write_cuts_csv(&self.buffered(find_cut_times(&g)), &mut buf)?;
            write_file(&self.path(&format!("cuts/{}.csv", env_name(k))), &buf)
        })
    }

    /// The environment's graph with cut times read back from its CSV.
    fn env(&self, k: usize) -> Result<(RangeGraph, CutTimeSet), CliError> {
        let g = build_range_graph(&self.trajectory(k)?)?;
        let rows = formats::read_cuts_csv(&self.read(&format!("cuts/{}.csv", env_name(k)))?[..])?;
        let times = rows.into_iter().map(|(t, _)| t).collect();
        let cuts = self.buffered(CutTimeSet::new(g.horizon(), times, rangewalk::cut_structure::default_buffer(g.horizon()))?);
        Ok((g, cuts))
    }

    fn metrics(&self) -> Result<(), CliError> {
        let c = &self.config;
        let solver = c.solver();
        (0..c.seeds).into_par_iter().try_for_each(|k| {
            let traj = crate::store::sha256(&self.read(&format!("trajectories/{}.rwr", env_name(k)))?);
            let cut_sum = crate::store::sha256(&self.read(&format!("cuts/{}.csv", env_name(k)))?);
            let key = Cache::key(&["profile", &traj, &cut_sum, &format!("{:?}", c.grid), &format!("{solver:?}")]);
            let bytes = self.cache.get_or_insert(&format!("profile-{key}.csv"), || {
                let (g, cuts) = self.env(k)?;
                let mut buf = Vec::new();
                formats::write_profile_csv(&metric_profile(&g, &cuts, &c.grid, &solver)?, &mut buf)?;
                Ok(buf)
            })?;
            write_file(&self.path(&format!("metrics/{}.csv", env_name(k))), &bytes)
        })
    }

    fn profiles(&self) -> Result<Vec<MetricProfile>, CliError> {
        (0..self.config.seeds)
            .map(|k| Ok(formats::read_profile_csv(&self.read(&format!("metrics/{}.csv", env_name(k)))?[..])?))
            .collect()
    }

    fn cut_sets(&self) -> Result<Vec<CutTimeSet>, CliError> {
        (0..self.config.seeds).into_par_iter().map(|k| Ok(self.env(k)?.1)).collect()
    }

    fn volume_rows(&self) -> Result<Vec<Vec<f64>>, CliError> {
        let grid = &self.config.grid;
        (0..self.config.seeds)
            .into_par_iter()
            .map(|k| {
                let g = build_range_graph(&self.trajectory(k)?)?;
                grid.iter()
                    .map(|&n| Ok(rangewalk::range_graph::mu_measure_prefix(&g, n)? as f64 / n as f64))
                    .collect()
            })
            .collect()
    }

    fn point_tables(&self) -> Result<PointTables, CliError> {
        Ok(estimate::point_tables(&self.config.grid, &self.volume_rows()?, &self.profiles()?))
    }

    fn walk(&self) -> Result<(), CliError> {
        let c = &self.config;
        let tables = self.point_tables()?;

        let (g, _) = self.env(0)?;
        let trace = simulate_walk(&g, 0, c.walk_trace_steps, purpose_seed(self.env_seed(0), 3))?;
        let mut buf = Vec::new();
        formats::write_walk_csv(&trace, &mut buf)?;
        write_file(&self.path(&format!("walk/trace_{}.csv", env_name(0))), &buf)?;

        let n = c.heat_kernel_n;
        let steps = walk_time(1.0, n as f64, tables.psi_at(n as f64));
        (0..c.heat_kernel_envs).into_par_iter().try_for_each(|j| {
            let seed = replica_seed(purpose_seed(c.master_seed, HEAT_KERNEL_ENVS), j as u64);
            let rows = heat_kernel_rows(c.dimension, n, steps, &c.heat_kernel_x, c.heat_kernel_replicas, seed, &c.solver())?;
            let mut buf = Vec::new();
            formats::write_heat_kernel_csv(&rows, &mut buf)?;
            write_file(&self.path(&format!("walk/heat_kernel_{}.csv", env_name(j))), &buf)
        })?;

        let max_r = *c.exit_radii.last().unwrap() as usize;
        let exits: Vec<Vec<ExitOutcome>> = (0..c.exit_envs)
            .into_par_iter()
            .map(|j| {
                let seed = replica_seed(purpose_seed(c.master_seed, EXIT_ENVS), j as u64);
                exit_sample(c.dimension, &c.exit_radii, 64 * max_r, seed, c.exit_max_steps)
            })
            .collect::<Result<_, _>>()?;
        write_file(&self.path("walk/exit_times.json"), &serde_json::to_vec(&exits).expect("serializes"))?;

        let pn = c.process_n;
        let t_max = *c.t_grid.last().unwrap();
        let horizon = 16 * pn * t_max.sqrt().ceil() as usize;
        let (psi, phi) = (tables.psi_at(pn as f64), tables.phi.at(pn as f64));
        let draws: Vec<Option<RescaledSample>> = (0..c.process_envs)
            .into_par_iter()
            .map(|j| {
                let seed = replica_seed(purpose_seed(c.master_seed, PROCESS_ENVS), j as u64);
                match rescaled_process_sample(c.dimension, pn, psi, phi, &c.t_grid, horizon, seed) {
                    Ok(s) => Ok(Some(s)),
                    Err(rangewalk::Error::WalkHorizon { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_, _>>()?;
        let process = ProcessDraws {
            n: pn,
            psi,
            phi,
            censored: draws.iter().filter(|d| d.is_none()).count(),
            samples: draws.into_iter().flatten().collect(),
        };
        write_file(&self.path("walk/process.json"), &serde_json::to_vec(&process).expect("serializes"))
    }

    fn estimate(&self) -> Result<(), CliError> {
        let c = &self.config;
        let heat_kernel: Vec<Vec<HeatKernelRow>> = (0..c.heat_kernel_envs)
            .map(|j| Ok(formats::read_heat_kernel_csv(&self.read(&format!("walk/heat_kernel_{}.csv", env_name(j)))?[..])?))
            .collect::<Result<_, CliError>>()?;
        let exits: Vec<Vec<ExitOutcome>> = parse_json(&self.read("walk/exit_times.json")?, "walk/exit_times.json")?;
        let process: ProcessDraws = parse_json(&self.read("walk/process.json")?, "walk/process.json")?;
        let inputs = estimate::Inputs {
            volume_rows: self.volume_rows()?,
            profiles: self.profiles()?,
            cuts: self.cut_sets()?,
            heat_kernel,
            exits,
            process,
            covering: self.covering()?,
        };
        let est = estimate::estimate(c, &inputs)?;
        write_file(&self.path(ESTIMATE), &serde_json::to_vec_pretty(&est).expect("serializes"))
    }

    fn covering(&self) -> Result<Vec<Vec<usize>>, CliError> {
        let c = &self.config;
        (0..c.cover_envs.min(c.seeds))
            .into_par_iter()
            .map(|k| {
                let (g, cuts) = self.env(k)?;
                c.cover_radii
                    .iter()
                    .map(|&r| Ok(covering_number(&g, &cuts, r, &c.solver())?))
                    .collect()
            })
            .collect()
    }

    fn report(&self) -> Result<(), CliError> {
        let est: estimate::Estimates = parse_json(&self.read(ESTIMATE)?, ESTIMATE)?;
        let report = estimate::Report::new(&self.config, est);
        let mut bytes = serde_json::to_vec_pretty(&report).expect("serializes");
        bytes.push(b'\n');
        write_file(&self.path(REPORT), &bytes)
    }
}

/// Rescaled process samples of the walk stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessDraws {
    pub n: usize,
    pub psi: f64,
    pub phi: f64,
    /// Environments whose walk left the settled part of the range.
    pub censored: usize,
    pub samples: Vec<RescaledSample>,
}

fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], name: &str) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Io(format!("{name}: {e}")))
}

/// Smoothed kernel of one fresh environment at the points `S_{floor(n x)}`.
pub fn heat_kernel_rows(
    dimension: usize,
    n: usize,
    steps: u64,
    xs: &[f64],
    replicas: u64,
    seed: u64,
    solver: &rangewalk::network::SolverConfig,
) -> Result<Vec<HeatKernelRow>, CliError> {
    let horizon = 8 * n;
    let g = build_range_graph(&generate_trajectory(dimension, horizon, seed)?)?;
    let cuts = find_cut_times(&g);
    let times: Vec<usize> = xs.iter().map(|&x| (n as f64 * x).floor() as usize).collect();
    let targets: Vec<u32> = times.iter().map(|&k| g.vertex_at(k)).collect();
    let est = heat_kernel_estimate(&g, steps, &targets, replicas, purpose_seed(seed, 3))?;
    let mut sorted = times.clone();
    sorted.dedup();
    let prof = metric_profile(&g, &cuts, &sorted, solver)?;
    Ok(times
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let at = sorted.binary_search(k).unwrap();
            HeatKernelRow {
                target: targets[i],
                distance: prof.distance[at] as u32,
                resistance: prof.resistance[at],
                estimate: est.values[i],
                stderr: est.stderr[i],
            }
        })
        .collect())
}

/// Reads the report of a finished run.
pub fn read_report(out: &Path) -> Result<Vec<u8>, CliError> {
    read_file(&out.join(REPORT))
}
