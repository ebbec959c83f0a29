//! Estimators over the files of a run, and the report built from them.

use serde::{Deserialize, Serialize};

use rangewalk::cut_structure::{count_cut_times, CutTimeSet};
use rangewalk::formats::HeatKernelRow;
use rangewalk::range_walker::ExitOutcome;
use rangewalk::resistance_metrics::MetricProfile;
use rangewalk::scaling_lab::*;
use rangewalk::seeds::purpose_seed;
use rangewalk::stats::{mean, Interval};

use crate::config::ExperimentConfig;
use crate::pipeline::{ProcessDraws, BOOTSTRAP, TWO_SIDED};
use crate::CliError;

/// A value, or the reason an estimator's preconditions were not met.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimated<T> {
    Ok(T),
    Skipped(String),
}

impl<T> Estimated<T> {
    fn from(r: rangewalk::Result<T>) -> Result<Self, CliError> {
        match r {
            Ok(v) => Ok(Estimated::Ok(v)),
            Err(
                e @ (rangewalk::Error::InsufficientSamples { .. }
                | rangewalk::Error::DegenerateGrid(_)
                | rangewalk::Error::DimensionMismatch { .. }),
            ) => Ok(Estimated::Skipped(e.to_string())),
            Err(e) => Err(e.into()),
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Estimated::Ok(v) => Some(v),
            Estimated::Skipped(_) => None,
        }
    }

    fn map<U>(&self, f: impl FnOnce(&T) -> U) -> Estimated<U> {
        match self {
            Estimated::Ok(v) => Estimated::Ok(f(v)),
            Estimated::Skipped(r) => Estimated::Skipped(r.clone()),
        }
    }
}

/// Plain ensemble means, available for any number of seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTables {
    pub lambda: f64,
    pub psi_tilde: Table,
    pub phi: Table,
}

impl PointTables {
    pub fn psi_at(&self, n: f64) -> f64 {
        self.lambda * self.psi_tilde.at(n)
    }
}

/// Same arithmetic as the pooled and per-`n` estimators, so the tables
/// agree with them bit for bit.
pub fn point_tables(grid: &[usize], volume_rows: &[Vec<f64>], profiles: &[MetricProfile]) -> PointTables {
    let lambda = volume_rows.iter().map(|r| mean(r)).sum::<f64>() / volume_rows.len() as f64;
    let col = |f: &dyn Fn(&MetricProfile, usize) -> f64| -> Vec<f64> {
        (0..grid.len())
            .map(|j| mean(&profiles.iter().map(|p| f(p, j) / grid[j] as f64).collect::<Vec<_>>()))
            .collect()
    };
    PointTables {
        lambda,
        psi_tilde: Table { n: grid.to_vec(), value: col(&|p, j| p.resistance[j]) },
        phi: Table { n: grid.to_vec(), value: col(&|p, j| p.distance[j] as f64) },
    }
}

pub struct Inputs {
    pub volume_rows: Vec<Vec<f64>>,
    pub profiles: Vec<MetricProfile>,
    pub cuts: Vec<CutTimeSet>,
    pub heat_kernel: Vec<Vec<HeatKernelRow>>,
    pub exits: Vec<Vec<ExitOutcome>>,
    pub process: ProcessDraws,
    /// `covering[s][i]`: covering number of seed `s` at the `i`-th radius.
    pub covering: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covering {
    pub radii: Vec<f64>,
    pub counts: Vec<Vec<usize>>,
    /// The reported constant: the largest count over seeds and radii.
    pub max: usize,
    pub cap: usize,
    pub within_cap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub point: PointTables,
    pub lambda_prefix: Estimated<LambdaPrefix>,
    pub lambda_two_sided: Estimated<Interval>,
    pub slowly_varying: Estimated<SlowlyVarying>,
    pub alpha_tau: Estimated<AlphaTau>,
    pub scaling: Estimated<ScalingEstimate>,
    pub process: Estimated<ProcessComparison>,
    pub process_censored: usize,
    pub heat_kernel: Estimated<HeatKernelProfile>,
    pub exit_times: Estimated<ExitScaling>,
    pub covering: Covering,
}

pub fn estimate(c: &ExperimentConfig, inp: &Inputs) -> Result<Estimates, CliError> {
    let grid = &c.grid;
    let boot = c.bootstrap(BOOTSTRAP);
    let point = point_tables(grid, &inp.volume_rows, &inp.profiles);
    let samples: Vec<MetricSample> = inp
        .profiles
        .iter()
        .zip(&inp.cuts)
        .map(|(p, cuts)| MetricSample {
            resistance: p.resistance.clone(),
            distance: p.distance.clone(),
            cut_counts: grid.iter().map(|&n| count_cut_times(cuts, n).count).collect(),
        })
        .collect();
    let counts: Vec<Vec<usize>> = samples.iter().map(|s| s.cut_counts.clone()).collect();

    let lambda_prefix = Estimated::from(estimate_lambda_prefix(grid, &inp.volume_rows, boot))?;
    let ys = two_sided_ensemble(c.dimension, c.two_sided_m, c.two_sided_pairs, purpose_seed(c.master_seed, TWO_SIDED))?;
    let lambda_two_sided = Estimated::from(estimate_lambda_two_sided(&ys))?;
    let slowly_varying = Estimated::from(estimate_slowly_varying(grid, &samples, boot))?;
    let alpha_tau = Estimated::from(estimate_alpha_tau(grid, &counts, boot))?;
    let scaling = match (&lambda_prefix, &alpha_tau, &slowly_varying) {
        (Estimated::Ok(l), Estimated::Ok(a), Estimated::Ok(s)) => Estimated::Ok(assemble_estimate(l.pooled, a, s)),
        _ => Estimated::Skipped("needs the volume, cut-count and slowly varying estimates".into()),
    };

    let process = Estimated::from(compare_to_limit(&c.t_grid, &inp.process.samples, boot))?;

    let n = c.heat_kernel_n as f64;
    let envs: Vec<HeatKernelSample> = inp
        .heat_kernel
        .iter()
        .map(|rows| HeatKernelSample {
            values: rows.iter().map(|r| r.estimate * n).collect(),
            stderr: rows.iter().map(|r| r.stderr * n).collect(),
        })
        .collect();
    let heat_kernel = Estimated::from(heat_kernel_profile(point.lambda, 1.0, &c.heat_kernel_x, &envs))?;

    let exit_times =
        Estimated::from(exit_time_scaling(&c.exit_radii, &inp.exits, &point.psi_tilde, &point.phi, c.exit_band))?;

    let max = inp.covering.iter().flatten().copied().max().unwrap_or(0);
    let covering = Covering {
        radii: c.cover_radii.clone(),
        counts: inp.covering.clone(),
        max,
        cap: c.cover_cap,
        within_cap: max <= c.cover_cap,
    };

    Ok(Estimates {
        point,
        lambda_prefix,
        lambda_two_sided,
        slowly_varying,
        alpha_tau,
        scaling,
        process,
        process_censored: inp.process.censored,
        heat_kernel,
        exit_times,
        covering,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub lambda: Estimated<Interval>,
    pub lambda_two_sided: Estimated<Interval>,
    pub alpha: Estimated<Interval>,
    pub tau: Estimated<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub n: Vec<usize>,
    pub psi_tilde: Vec<f64>,
    pub phi: Vec<f64>,
    /// `lambda * psi_tilde`.
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub psi_tilde: Estimated<Interval>,
    pub phi: Estimated<Interval>,
    pub cut_density: Estimated<Interval>,
    pub slope_band: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub constants: Constants,
    pub tables: Tables,
    pub exponents: Exponents,
    pub ks: Estimated<ProcessComparison>,
    pub process_censored: usize,
    pub heat_kernel: Estimated<HeatKernelProfile>,
    pub exit_times: Estimated<ExitScaling>,
    pub covering: Covering,
    pub config: ExperimentConfig,
    pub master_seed: u64,
}

impl Report {
    pub fn new(config: &ExperimentConfig, e: Estimates) -> Self {
        let p = &e.point;
        Report {
            constants: Constants {
                lambda: e.lambda_prefix.map(|l| l.pooled),
                lambda_two_sided: e.lambda_two_sided.clone(),
                alpha: e.alpha_tau.map(|a| a.alpha),
                tau: e.alpha_tau.map(|a| a.tau),
            },
            tables: Tables {
                n: p.psi_tilde.n.clone(),
                psi_tilde: p.psi_tilde.value.clone(),
                phi: p.phi.value.clone(),
                psi: p.psi_tilde.value.iter().map(|v| p.lambda * v).collect(),
            },
            exponents: Exponents {
                psi_tilde: e.slowly_varying.map(|s| s.logexp_psi),
                phi: e.slowly_varying.map(|s| s.logexp_phi),
                cut_density: e.alpha_tau.map(|a| a.logexp_n),
                slope_band: config.slope_band,
            },
            ks: e.process,
            process_censored: e.process_censored,
            heat_kernel: e.heat_kernel,
            exit_times: e.exit_times,
            covering: e.covering,
            config: config.clone(),
            master_seed: config.master_seed,
        }
    }
}
