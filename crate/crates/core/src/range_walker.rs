//! Simple random walk on a built range graph: traces, exit times from
//! graph-distance balls, and the smoothed heat kernel
//! `p_n(x, y) = [P_x(X_n = y) + P_x(X_{n+1} = y)] / (2 deg y)`.
//!
//! Time is discrete. Replica `k` of an estimate draws from stream `k` of the
//! caller's seed, so results do not depend on thread scheduling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut_structure::CutTimeSet;
use crate::range_graph::RangeGraph;
use crate::seeds::stream_rng;
use crate::{Error, Result};

/// Largest graph [`exact_kernel_small`] accepts.
pub const EXACT_KERNEL_CAP: usize = 2000;

/// Replicas stepped together by [`heat_kernel_from`].
const LANES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkOnRangeTrace {
    pub seed: u64,
    pub start: u32,
    /// Visited vertices, `steps[0] == start`.
    pub steps: Vec<u32>,
}

fn check_vertex(graph: &RangeGraph, v: u32) -> Result<()> {
    if (v as usize) < graph.vertex_count() {
        Ok(())
    } else {
        Err(Error::UnknownVertex(v as usize))
    }
}

#[inline]
pub(crate) fn step(graph: &RangeGraph, v: u32, rng: &mut ChaCha8Rng) -> u32 {
    let nb = graph.neighbors(v);
    nb[rng.random_range(0..nb.len() as u32) as usize]
}

pub fn simulate_walk(graph: &RangeGraph, start: u32, steps: usize, seed: u64) -> Result<WalkOnRangeTrace> {
    check_vertex(graph, start)?;
    let mut rng = stream_rng(seed, 0);
    let mut trace = Vec::with_capacity(steps + 1);
    let mut v = start;
    trace.push(v);
    for _ in 0..steps {
        v = step(graph, v, &mut rng);
        trace.push(v);
    }
    Ok(WalkOnRangeTrace { seed, start, steps: trace })
}

/// Vertices occupied at each of the sorted `times`.
pub fn positions_at(graph: &RangeGraph, start: u32, times: &[u64], seed: u64) -> Result<Vec<u32>> {
    check_vertex(graph, start)?;
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("times must be sorted".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let mut out = Vec::with_capacity(times.len());
    let (mut v, mut now) = (start, 0u64);
    for &t in times {
        while now < t {
            v = step(graph, v, &mut rng);
            now += 1;
        }
        out.push(v);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitTimeSample {
    pub r: u32,
    pub tau: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CensorReason {
    /// The walk reached a vertex past the last cut time, where the finite
    /// range no longer matches the infinite one.
    Horizon,
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitOutcome {
    Exited(ExitTimeSample),
    Censored { r: u32, steps: u64, reason: CensorReason },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitLimits {
    pub max_steps: u64,
    /// Vertex ids at or above this bound are past the last cut time.
    pub censor_from: u32,
}

impl ExitLimits {
    /// Censors on vertices first visited after the last cut time.
    pub fn for_graph(graph: &RangeGraph, cuts: &CutTimeSet, max_steps: u64) -> Self {
        let censor_from = match cuts.times().last() {
            Some(&t) => graph.visited_count(t as usize) as u32,
            None => 1,
        };
        Self { max_steps, censor_from }
    }

    /// Never censors on position.
    pub fn unbounded(max_steps: u64) -> Self {
        Self { max_steps, censor_from: u32::MAX }
    }
}

/// First time `d_G(0, X_n) >= r` for a walk started at the origin.
pub fn exit_time(graph: &RangeGraph, distance_field: &[u32], r: u32, seed: u64, limits: ExitLimits) -> Result<ExitOutcome> {
    if distance_field.len() != graph.vertex_count() {
        return Err(Error::DimensionMismatch { expected: graph.vertex_count(), got: distance_field.len() });
    }
    let available = distance_field
        .iter()
        .enumerate()
        .filter(|&(v, _)| (v as u32) < limits.censor_from)
        .map(|(_, &d)| d)
        .max()
        .unwrap_or(0);
    if r > available {
        return Err(Error::RadiusBeyondHorizon { requested: r, available });
    }
    let origin = graph.vertex_at(graph.time_offset());
    let mut rng = stream_rng(seed, 0);
    let mut v = origin;
    let mut tau = 0u64;
    loop {
        if distance_field[v as usize] >= r {
            return Ok(ExitOutcome::Exited(ExitTimeSample { r, tau }));
        }
        if v >= limits.censor_from {
            return Ok(ExitOutcome::Censored { r, steps: tau, reason: CensorReason::Horizon });
        }
        if tau >= limits.max_steps {
            return Ok(ExitOutcome::Censored { r, steps: tau, reason: CensorReason::StepLimit });
        }
        v = step(graph, v, &mut rng);
        tau += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelEstimate {
    pub n: u64,
    pub start: u32,
    pub targets: Vec<u32>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub replicas: u64,
}

/// Monte Carlo smoothed kernel from the origin.
pub fn heat_kernel_estimate(graph: &RangeGraph, n: u64, targets: &[u32], replicas: u64, seed: u64) -> Result<HeatKernelEstimate> {
    heat_kernel_from(graph, graph.vertex_at(graph.time_offset()), n, targets, replicas, seed)
}

/// Monte Carlo smoothed kernel `p_n(start, y)` at each target.
pub fn heat_kernel_from(
    graph: &RangeGraph,
    start: u32,
    n: u64,
    targets: &[u32],
    replicas: u64,
    seed: u64,
) -> Result<HeatKernelEstimate> {
    check_vertex(graph, start)?;
    if replicas == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut slot = vec![u32::MAX; graph.vertex_count()];
    for (i, &t) in targets.iter().enumerate() {
        check_vertex(graph, t)?;
        slot[t as usize] = i as u32;
    }
    // X_n != X_{n+1}, so each replica adds at most one hit per target and
    // integer hit counts are all the state needed. Replicas advance in
    // lockstep groups so their memory accesses overlap.
    let groups = replicas.div_ceil(LANES as u64);
    let hits = (0..groups)
        .into_par_iter()
        .fold(
            || vec![0u64; targets.len()],
            |mut acc, g| {
                let first = g * LANES as u64;
                let lanes = (replicas - first).min(LANES as u64) as usize;
                let mut rngs: Vec<ChaCha8Rng> = (0..lanes as u64).map(|l| stream_rng(seed, first + l)).collect();
                let mut at = vec![start; lanes];
                for _ in 0..n {
                    for (v, rng) in at.iter_mut().zip(rngs.iter_mut()) {
                        *v = step(graph, *v, rng);
                    }
                }
                for (&v, rng) in at.iter().zip(rngs.iter_mut()) {
                    let next = step(graph, v, rng);
                    for x in [v, next] {
                        if slot[x as usize] != u32::MAX {
                            acc[slot[x as usize] as usize] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; targets.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let reps = replicas as f64;
    let mut values = Vec::with_capacity(targets.len());
    let mut stderr = Vec::with_capacity(targets.len());
    for (&t, &h) in targets.iter().zip(&hits) {
        let scale = 2.0 * graph.degree(t) as f64;
        let q = h as f64 / reps;
        let var = if replicas > 1 { q * (1.0 - q) * reps / (reps - 1.0) } else { 0.0 };
        values.push(q / scale);
        stderr.push((var / reps).sqrt() / scale);
    }
    Ok(HeatKernelEstimate { n, start, targets: targets.to_vec(), values, stderr, replicas })
}

/// Exact law of `X_n` started at `x`, by propagating the distribution.
pub fn exact_kernel_small(graph: &RangeGraph, n: u64, x: u32) -> Result<Vec<f64>> {
    let size = graph.vertex_count();
    if size > EXACT_KERNEL_CAP {
        return Err(Error::CapExceeded { horizon: size, cap: EXACT_KERNEL_CAP });
    }
    check_vertex(graph, x)?;
    let mut dist = vec![0.0; size];
    dist[x as usize] = 1.0;
    let mut next = vec![0.0; size];
    for _ in 0..n {
        next.iter_mut().for_each(|p| *p = 0.0);
        for (v, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let nb = graph.neighbors(v as u32);
            let share = mass / nb.len() as f64;
            for &w in nb {
                next[w as usize] += share;
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    Ok(dist)
}

/// Exact smoothed kernel `p_n(x, ·)` from [`exact_kernel_small`].
pub fn exact_smoothed_kernel(graph: &RangeGraph, n: u64, x: u32) -> Result<Vec<f64>> {
    let now = exact_kernel_small(graph, n, x)?;
    let later = exact_kernel_small(graph, n + 1, x)?;
    Ok((0..graph.vertex_count())
        .map(|y| (now[y] + later[y]) / (2.0 * graph.degree(y as u32) as f64))
        .collect())
}
