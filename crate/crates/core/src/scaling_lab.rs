//! Ensemble estimators for the volume constant, the slowly varying
//! corrections to resistance and distance growth, the cut-time density,
//! exit times and the heat kernel, plus comparisons with the limit laws.
//!
//! Every ensemble member is an independent environment built from
//! `replica_seed(master, k)`; per-member results are collected in seed order
//! and reduced sequentially, so estimates do not depend on thread count.
//! Corrections are normalized by the crate's own estimated tables and their
//! power of `log n` is fitted by least squares against `log log n`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut_structure::{count_cut_times, find_cut_times};
use crate::lattice_walk::{generate_trajectory, two_sided_trajectory};
use crate::network::SolverConfig;
use crate::range_graph::{build_range_graph, mu_measure_prefix};
use crate::range_walker::{exit_time, heat_kernel_estimate, CensorReason, ExitLimits, ExitOutcome};
use crate::resistance_metrics::{distance_field, metric_profile};
use crate::seeds::{purpose_seed, replica_seed, stream_rng};
use crate::stats::{bootstrap, half_normal_cdf, half_normal_mean, kurtosis, least_squares, mean, mean_interval, variance, BootstrapConfig, Interval};
use crate::{Error, Result};

/// Seeds required per grid point by the ensemble estimators.
pub const MIN_SEEDS: usize = 30;
/// Samples required per time by [`compare_to_limit`].
pub const MIN_PROCESS_SAMPLES: usize = 500;

const WALK_PURPOSE: u64 = 3;

/// A positive function of `n` on a grid, interpolated linearly in
/// `(ln n, ln value)` and extrapolated along the end segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub n: Vec<usize>,
    pub value: Vec<f64>,
}

impl Table {
    pub fn at(&self, n: f64) -> f64 {
        match self.n.len() {
            0 => f64::NAN,
            1 => self.value[0],
            len => {
                let x = n.ln();
                let i = self.n.partition_point(|&m| (m as f64) < n).clamp(1, len - 1);
                let (x0, x1) = ((self.n[i - 1] as f64).ln(), (self.n[i] as f64).ln());
                let (y0, y1) = (self.value[i - 1].ln(), self.value[i].ln());
                (y0 + (y1 - y0) * (x - x0) / (x1 - x0)).exp()
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Table {
        Table { n: self.n.clone(), value: self.value.iter().map(|v| v * factor).collect() }
    }
}

fn check_seeds(count: usize) -> Result<()> {
    if count < MIN_SEEDS {
        Err(Error::InsufficientSamples { needed: MIN_SEEDS, got: count })
    } else {
        Ok(())
    }
}

fn check_rows<T>(grid: &[usize], rows: &[Vec<T>]) -> Result<()> {
    for row in rows {
        if row.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: row.len() });
        }
    }
    Ok(())
}

fn log_log(grid: &[usize]) -> Result<Vec<f64>> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] < 3 {
        return Err(Error::DegenerateGrid(format!("{grid:?}")));
    }
    Ok(grid.iter().map(|&n| (n as f64).ln().ln()).collect())
}

/// Slope of `log(mean over seeds)` against `log log n`, with a bootstrap
/// interval over seeds.
fn fit_log_exponent(grid: &[usize], rows: &[Vec<f64>], boot: BootstrapConfig) -> Result<Interval> {
    let x = log_log(grid)?;
    let slope_of = |idx: &[usize]| {
        let y: Vec<f64> = (0..grid.len())
            .map(|j| (idx.iter().map(|&s| rows[s][j]).sum::<f64>() / idx.len() as f64).ln())
            .collect();
        least_squares(&x, &y).map(|f| f.slope).unwrap_or(f64::NAN)
    };
    bootstrap(rows.len(), boot, slope_of)
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaPrefix {
    pub grid: Vec<usize>,
    pub per_n: Vec<Interval>,
    /// Mean over seeds and grid points, bootstrapped over seeds.
    pub pooled: Interval,
}

/// Volume constant from `mu_G(S[0, n]) / n`, one row per seed.
pub fn estimate_lambda_prefix(grid: &[usize], rows: &[Vec<f64>], boot: BootstrapConfig) -> Result<LambdaPrefix> {
    check_seeds(rows.len())?;
    check_rows(grid, rows)?;
    let per_n = (0..grid.len()).map(|j| mean_interval(&column(rows, j))).collect();
    let pooled = bootstrap(rows.len(), boot, |idx| {
        idx.iter().map(|&s| mean(&rows[s])).sum::<f64>() / idx.len() as f64
    })?;
    Ok(LambdaPrefix { grid: grid.to_vec(), per_n, pooled })
}

/// Truncated two-sided variable: edges at the origin from the backward walk
/// over `m` steps together with the first forward edge, counted only if the
/// forward walk stays away from the origin during `[1, m]`. With `m = 0`
/// both conditions are empty and the value is 1.
pub fn two_sided_y(dimension: usize, m: usize, seed: u64) -> Result<u32> {
    if m == 0 {
        return Ok(1);
    }
    let (forward, backward) = two_sided_trajectory(dimension, m, seed)?;
    let d = dimension;
    let fpos = forward.positions();
    if (1..=m).any(|k| fpos[k * d..(k + 1) * d].iter().all(|&c| c == 0)) {
        return Ok(0);
    }
    // Edges at the origin are identified by direction code.
    let mut directions = 1u32 << forward.step_codes()[0];
    let bpos = backward.positions();
    let at_origin = |k: usize| bpos[k * d..(k + 1) * d].iter().all(|&c| c == 0);
    for (k, &code) in backward.step_codes().iter().enumerate() {
        if at_origin(k) {
            directions |= 1 << code;
        }
        if at_origin(k + 1) {
            directions |= 1 << (code ^ 1);
        }
    }
    Ok(directions.count_ones())
}

/// Mean of the truncated two-sided variable.
pub fn estimate_lambda_two_sided(values: &[u32]) -> Result<Interval> {
    if values.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let xs: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    Ok(mean_interval(&xs))
}

/// Two-sided variables for `pairs` independent pairs.
pub fn two_sided_ensemble(dimension: usize, m: usize, pairs: usize, master: u64) -> Result<Vec<u32>> {
    (0..pairs as u64)
        .into_par_iter()
        .map(|k| two_sided_y(dimension, m, replica_seed(master, k)))
        .collect()
}

/// `mu_G(S[0, n]) / n` on `grid` for one environment of the given horizon.
pub fn prefix_volume_ratios(dimension: usize, grid: &[usize], horizon: usize, seed: u64) -> Result<Vec<f64>> {
    let graph = build_range_graph(&generate_trajectory(dimension, horizon, seed)?)?;
    grid.iter().map(|&n| Ok(mu_measure_prefix(&graph, n)? as f64 / n as f64)).collect()
}

/// Per-seed resistance, distance and cut counts on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub resistance: Vec<f64>,
    pub distance: Vec<u64>,
    pub cut_counts: Vec<usize>,
}

pub fn metric_sample(dimension: usize, grid: &[usize], horizon: usize, seed: u64, cfg: &SolverConfig) -> Result<MetricSample> {
    let graph = build_range_graph(&generate_trajectory(dimension, horizon, seed)?)?;
    let cuts = find_cut_times(&graph);
    let profile = metric_profile(&graph, &cuts, grid, cfg)?;
    Ok(MetricSample {
        resistance: profile.resistance,
        distance: profile.distance,
        cut_counts: grid.iter().map(|&n| count_cut_times(&cuts, n).count).collect(),
    })
}

pub fn metric_ensemble(
    dimension: usize,
    grid: &[usize],
    horizon: usize,
    seeds: usize,
    master: u64,
    cfg: &SolverConfig,
) -> Result<Vec<MetricSample>> {
    (0..seeds as u64)
        .into_par_iter()
        .map(|k| metric_sample(dimension, grid, horizon, replica_seed(master, k), cfg))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowlyVarying {
    pub psi_tilde: Table,
    pub phi: Table,
    pub psi_tilde_ci: Vec<Interval>,
    pub phi_ci: Vec<Interval>,
    pub logexp_psi: Interval,
    pub logexp_phi: Interval,
}

/// Tables of `E R(0, S_n) / n` and `E d(0, S_n) / n` with fitted exponents.
pub fn estimate_slowly_varying(grid: &[usize], samples: &[MetricSample], boot: BootstrapConfig) -> Result<SlowlyVarying> {
    check_seeds(samples.len())?;
    log_log(grid)?;
    let r_rows: Vec<Vec<f64>> =
        samples.iter().map(|s| s.resistance.iter().zip(grid).map(|(r, &n)| r / n as f64).collect()).collect();
    let d_rows: Vec<Vec<f64>> =
        samples.iter().map(|s| s.distance.iter().zip(grid).map(|(&d, &n)| d as f64 / n as f64).collect()).collect();
    check_rows(grid, &r_rows)?;
    check_rows(grid, &d_rows)?;
    let psi_tilde_ci: Vec<Interval> = (0..grid.len()).map(|j| mean_interval(&column(&r_rows, j))).collect();
    let phi_ci: Vec<Interval> = (0..grid.len()).map(|j| mean_interval(&column(&d_rows, j))).collect();
    Ok(SlowlyVarying {
        psi_tilde: Table { n: grid.to_vec(), value: psi_tilde_ci.iter().map(|i| i.estimate).collect() },
        phi: Table { n: grid.to_vec(), value: phi_ci.iter().map(|i| i.estimate).collect() },
        psi_tilde_ci,
        phi_ci,
        logexp_psi: fit_log_exponent(grid, &r_rows, boot)?,
        logexp_phi: fit_log_exponent(grid, &d_rows, BootstrapConfig { seed: boot.seed ^ 1, ..boot })?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTau {
    /// `N_n / (n (ln n)^{-1/2})` at the largest grid point.
    pub alpha: Interval,
    /// Exactly `1 / alpha.estimate`.
    pub tau: f64,
    /// Mean `N_n / n` per grid point.
    pub density: Vec<f64>,
    /// Slope of `log(N_n / n)` against `log log n`.
    pub logexp_n: Interval,
}

pub fn estimate_alpha_tau(grid: &[usize], counts: &[Vec<usize>], boot: BootstrapConfig) -> Result<AlphaTau> {
    check_seeds(counts.len())?;
    check_rows(grid, counts)?;
    log_log(grid)?;
    let rows: Vec<Vec<f64>> =
        counts.iter().map(|c| c.iter().zip(grid).map(|(&k, &n)| k as f64 / n as f64).collect()).collect();
    let last = grid.len() - 1;
    let norm = (grid[last] as f64).ln().sqrt();
    let alpha = mean_interval(&column(&rows, last).iter().map(|v| v * norm).collect::<Vec<_>>());
    Ok(AlphaTau {
        alpha,
        tau: 1.0 / alpha.estimate,
        density: (0..grid.len()).map(|j| mean(&column(&rows, j))).collect(),
        logexp_n: fit_log_exponent(grid, &rows, boot)?,
    })
}

/// Collected estimates, as reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingEstimate {
    pub lambda_hat: Interval,
    pub alpha_hat: Interval,
    pub tau_hat: f64,
    pub psi_tilde: Table,
    pub phi: Table,
    /// Exactly `lambda_hat * psi_tilde`.
    pub psi: Table,
    pub logexp_psi: Interval,
    pub logexp_phi: Interval,
    pub logexp_n: Interval,
}

pub fn assemble_estimate(lambda: Interval, alpha: &AlphaTau, slowly: &SlowlyVarying) -> ScalingEstimate {
    ScalingEstimate {
        lambda_hat: lambda,
        alpha_hat: alpha.alpha,
        tau_hat: alpha.tau,
        psi_tilde: slowly.psi_tilde.clone(),
        phi: slowly.phi.clone(),
        psi: slowly.psi_tilde.scaled(lambda.estimate),
        logexp_psi: slowly.logexp_psi,
        logexp_phi: slowly.logexp_phi,
        logexp_n: alpha.logexp_n,
    }
}

/// One environment's exit outcomes at each radius, all driven by the same
/// walk so that larger radii exit later.
pub fn exit_sample(dimension: usize, radii: &[u32], horizon: usize, seed: u64, max_steps: u64) -> Result<Vec<ExitOutcome>> {
    let graph = build_range_graph(&generate_trajectory(dimension, horizon, seed)?)?;
    let cuts = find_cut_times(&graph);
    let field = distance_field(&graph);
    let limits = ExitLimits::for_graph(&graph, &cuts, max_steps);
    let walk_seed = purpose_seed(seed, WALK_PURPOSE);
    radii
        .iter()
        .map(|&r| match exit_time(&graph, &field, r, walk_seed, limits) {
            Err(Error::RadiusBeyondHorizon { .. }) => {
                Ok(ExitOutcome::Censored { r, steps: 0, reason: CensorReason::Horizon })
            }
            other => other,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitScaling {
    pub radii: Vec<u32>,
    pub mean_tau: Vec<f64>,
    /// `mean tau / (r^2 psi_tilde(r) phi(r)^{-2})`.
    pub ratio: Vec<f64>,
    pub censored_fraction: Vec<f64>,
    /// Largest over smallest ratio.
    pub spread: f64,
    pub within_band: bool,
}

/// Normalized mean exit times. `outcomes[s][i]` is seed `s` at `radii[i]`;
/// censored outcomes are excluded and counted.
pub fn exit_time_scaling(
    radii: &[u32],
    outcomes: &[Vec<ExitOutcome>],
    psi_tilde: &Table,
    phi: &Table,
    band: f64,
) -> Result<ExitScaling> {
    check_rows(&vec![0; radii.len()], outcomes)?;
    let mut mean_tau = Vec::new();
    let mut ratio = Vec::new();
    let mut censored_fraction = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        let taus: Vec<f64> = outcomes
            .iter()
            .filter_map(|o| match o[i] {
                ExitOutcome::Exited(s) => Some(s.tau as f64),
                ExitOutcome::Censored { .. } => None,
            })
            .collect();
        if taus.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        let m = mean(&taus);
        let rf = r as f64;
        let scale = rf * rf * psi_tilde.at(rf) / phi.at(rf).powi(2);
        mean_tau.push(m);
        ratio.push(m / scale);
        censored_fraction.push(1.0 - taus.len() as f64 / outcomes.len() as f64);
    }
    let max = ratio.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratio.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max / min;
    Ok(ExitScaling { radii: radii.to_vec(), mean_tau, ratio, censored_fraction, spread, within_band: spread <= band })
}

/// Walk time `floor(t n^2 psi)` for a rescaling level `n`.
pub fn walk_time(t: f64, n: f64, psi: f64) -> u64 {
    (t * n * n * psi).floor() as u64
}

/// Rescaled observables of one environment at each time of `t_grid`:
/// `d_G(0, X) / (n phi)` and the lattice position of `X` over `sqrt(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledSample {
    pub distance: Vec<f64>,
    pub position: Vec<Vec<f64>>,
}

#[allow(clippy::too_many_arguments)]
pub fn rescaled_process_sample(
    dimension: usize,
    n: usize,
    psi: f64,
    phi: f64,
    t_grid: &[f64],
    horizon: usize,
    seed: u64,
) -> Result<RescaledSample> {
    if t_grid.windows(2).any(|w| w[0] > w[1]) || t_grid.iter().any(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("t grid must be sorted and nonnegative".into()));
    }
    let graph = build_range_graph(&generate_trajectory(dimension, horizon, seed)?)?;
    let cuts = find_cut_times(&graph);
    let field = distance_field(&graph);
    let limits = ExitLimits::for_graph(&graph, &cuts, u64::MAX);
    let nf = n as f64;
    let times: Vec<u64> = t_grid.iter().map(|&t| walk_time(t, nf, psi)).collect();
    let mut rng = stream_rng(purpose_seed(seed, WALK_PURPOSE), 0);
    let mut v = graph.vertex_at(0);
    let mut now = 0u64;
    let mut out = RescaledSample { distance: Vec::new(), position: Vec::new() };
    for &t in &times {
        while now < t {
            v = crate::range_walker::step(&graph, v, &mut rng);
            now += 1;
            if v >= limits.censor_from {
                return Err(Error::WalkHorizon { needed: *times.last().unwrap(), available: now });
            }
        }
        out.distance.push(field[v as usize] as f64 / (nf * phi));
        out.position.push(graph.coords(v).iter().map(|&c| c as f64 / nf.sqrt()).collect());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeComparison {
    pub t: f64,
    pub samples: usize,
    /// KS distance to `|N(0, t)|` with a bootstrap interval.
    pub ks: Interval,
    pub component_mean: Vec<f64>,
    /// Largest `|mean| / stderr` over components.
    pub component_mean_z: f64,
    pub component_variance: Vec<f64>,
    /// Largest over smallest component variance.
    pub isotropy_ratio: f64,
    pub radial_second_moment: f64,
    pub reference_radial_second_moment: f64,
    pub kurtosis: f64,
    pub reference_kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessComparison {
    pub times: Vec<TimeComparison>,
}

/// Compares rescaled samples with the limit laws. The spatial reference
/// uses the lattice walk's covariance `I / d` per unit time, so the radial
/// second moment of `W_{|B_t|}` is `E|B_t| = sqrt(2t/pi)`; the component
/// kurtosis `3 pi / 2` does not depend on that scale.
pub fn compare_to_limit(t_grid: &[f64], samples: &[RescaledSample], boot: BootstrapConfig) -> Result<ProcessComparison> {
    if samples.len() < MIN_PROCESS_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_PROCESS_SAMPLES, got: samples.len() });
    }
    let mut times = Vec::new();
    for (i, &t) in t_grid.iter().enumerate() {
        let dist: Vec<f64> = samples.iter().map(|s| s.distance[i]).collect();
        let ks = if t > 0.0 {
            bootstrap(dist.len(), BootstrapConfig { seed: boot.seed.wrapping_add(i as u64), ..boot }, |idx| {
                let pick: Vec<f64> = idx.iter().map(|&k| dist[k]).collect();
                crate::stats::ks_statistic(&pick, |x| half_normal_cdf(x, t))
            })?
        } else {
            let zero = if dist.iter().all(|&x| x == 0.0) { 0.0 } else { 1.0 };
            Interval { estimate: zero, stderr: 0.0, low: zero, high: zero }
        };
        let d = samples[0].position[i].len();
        let comps: Vec<Vec<f64>> = (0..d).map(|c| samples.iter().map(|s| s.position[i][c]).collect()).collect();
        let component_mean: Vec<f64> = comps.iter().map(|c| mean(c)).collect();
        let component_mean_z = comps
            .iter()
            .map(|c| {
                let se = (variance(c) / c.len() as f64).sqrt();
                if se > 0.0 { mean(c).abs() / se } else { 0.0 }
            })
            .fold(0.0, f64::max);
        let component_variance: Vec<f64> = comps.iter().map(|c| variance(c)).collect();
        let vmax = component_variance.iter().cloned().fold(f64::MIN, f64::max);
        let vmin = component_variance.iter().cloned().fold(f64::MAX, f64::min);
        let radial: Vec<f64> = samples.iter().map(|s| s.position[i].iter().map(|x| x * x).sum()).collect();
        let pooled: Vec<f64> = comps.concat();
        times.push(TimeComparison {
            t,
            samples: samples.len(),
            ks,
            component_mean,
            component_mean_z,
            component_variance,
            isotropy_ratio: if vmin > 0.0 { vmax / vmin } else { f64::NAN },
            radial_second_moment: mean(&radial),
            reference_radial_second_moment: half_normal_mean(t),
            kurtosis: kurtosis(&pooled),
            reference_kurtosis: 1.5 * PI,
        });
    }
    Ok(ProcessComparison { times })
}

/// KS statistics along an increasing `n` grid never rise by more than
/// the sum of the two neighbouring interval half-widths.
pub fn ks_nonincreasing(ks: &[Interval]) -> bool {
    ks.windows(2).all(|w| {
        let slack = (w[0].high - w[0].estimate).max(0.0) + (w[1].estimate - w[1].low).max(0.0);
        w[1].estimate <= w[0].estimate + slack
    })
}

/// `n * p_hat` at lattice points `S_{floor(n x)}` for one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelSample {
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
}

pub fn heat_kernel_sample(
    dimension: usize,
    n: usize,
    walk_steps: u64,
    xs: &[f64],
    horizon: usize,
    replicas: u64,
    seed: u64,
) -> Result<HeatKernelSample> {
    let graph = build_range_graph(&generate_trajectory(dimension, horizon, seed)?)?;
    let mut targets = Vec::with_capacity(xs.len());
    for &x in xs {
        let k = (n as f64 * x).floor() as usize;
        if k > horizon {
            return Err(Error::BeyondHorizon { time: k, horizon });
        }
        targets.push(graph.vertex_at(k));
    }
    let est = heat_kernel_estimate(&graph, walk_steps, &targets, replicas, purpose_seed(seed, WALK_PURPOSE))?;
    let nf = n as f64;
    Ok(HeatKernelSample {
        values: est.values.iter().map(|v| v * nf).collect(),
        stderr: est.stderr.iter().map(|v| v * nf).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelProfile {
    pub t: f64,
    pub x: Vec<f64>,
    /// `lambda * n * p_hat` averaged over environments.
    pub estimate: Vec<f64>,
    pub stderr: Vec<f64>,
    pub target: Vec<f64>,
    pub sup_deviation: f64,
}

/// Averages environments and compares `lambda n p_hat` with the limit profile.
pub fn heat_kernel_profile(lambda: f64, t: f64, xs: &[f64], envs: &[HeatKernelSample]) -> Result<HeatKernelProfile> {
    if envs.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut estimate = Vec::new();
    let mut stderr = Vec::new();
    let mut target = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let vals: Vec<f64> = envs.iter().map(|e| lambda * e.values[i]).collect();
        let iv = mean_interval(&vals);
        estimate.push(iv.estimate);
        stderr.push(iv.stderr);
        target.push(crate::stats::gaussian_profile(x, t));
    }
    let sup_deviation = estimate.iter().zip(&target).map(|(e, g)| (e - g).abs()).fold(0.0, f64::max);
    Ok(HeatKernelProfile { t, x: xs.to_vec(), estimate, stderr, target, sup_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_interpolates_in_log_space() {
        let t = Table { n: vec![10, 100], value: vec![1.0, 0.1] };
        assert!((t.at(31.622776601683793) - 0.31622776601683794).abs() < 1e-12);
        assert!((t.at(1000.0) - 0.01).abs() < 1e-12);
        assert_eq!(t.scaled(2.0).value, vec![2.0, 0.2]);
    }

    #[test]
    fn truncated_two_sided_bounds() {
        assert_eq!(two_sided_y(4, 0, 5).unwrap(), 1);
        for seed in 0..200 {
            assert!(two_sided_y(4, 64, seed).unwrap() <= 8);
        }
    }

    #[test]
    fn seed_count_is_enforced() {
        let rows = vec![vec![2.0]; 5];
        assert!(matches!(
            estimate_lambda_prefix(&[10], &rows, BootstrapConfig::default()),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn nonincreasing_with_slack() {
        let iv = |e: f64, h: f64| Interval { estimate: e, stderr: h / 2.0, low: e - h, high: e + h };
        assert!(ks_nonincreasing(&[iv(0.2, 0.01), iv(0.15, 0.01), iv(0.16, 0.01)]));
        assert!(!ks_nonincreasing(&[iv(0.1, 0.01), iv(0.2, 0.01)]));
    }
}
