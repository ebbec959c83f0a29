//! Cut times of a trajectory within a finite horizon.
//!
//! `k` is a cut time of the horizon-`N` path when `S_[0,k]` and `S_[k+1,N]`
//! are disjoint. A time `k` fails to be one exactly when some site is
//! visited both at or before `k` and after `k`, i.e. when
//! `first(x) <= k < last(x)` for some vertex `x`. The detector therefore
//! marks the union of the intervals `[first(x), last(x) - 1]` with a
//! difference array and reports the uncovered times.

use std::collections::{HashMap, HashSet};

use crate::lattice_walk::{LatticePoint, Trajectory};
use crate::range_graph::RangeGraph;
use crate::{Error, Result};

/// Largest horizon accepted by [`brute_force_cut_times`].
pub const BRUTE_FORCE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutTimeSet {
    horizon: usize,
    times: Vec<u32>,
    buffer: usize,
}

/// `⌈N / (ln N)^6⌉`, clamped to `[0, N]`.
pub fn default_buffer(horizon: usize) -> usize {
    if horizon < 2 {
        return horizon;
    }
    let n = horizon as f64;
    ((n / n.ln().powi(6)).ceil() as usize).min(horizon)
}

impl CutTimeSet {
    pub fn new(horizon: usize, times: Vec<u32>, buffer: usize) -> Result<Self> {
        if times.windows(2).any(|w| w[0] >= w[1]) || times.last().is_some_and(|&t| t as usize >= horizon.max(1)) {
            return Err(Error::InvalidParameter("cut times must be strictly increasing and below the horizon".into()));
        }
        Ok(Self { horizon, times, buffer: buffer.min(horizon) })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn buffer(&self) -> usize {
        self.buffer
    }

    pub fn with_buffer(mut self, buffer: usize) -> Self {
        self.buffer = buffer.min(self.horizon);
        self
    }

    pub fn times(&self) -> &[u32] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.times.binary_search(&(k as u32)).is_ok()
    }

    /// Times in `(N - b, N]` may stop being cut times once the walk is
    /// continued, so they are excluded from scaling statistics.
    pub fn is_provisional(&self, k: usize) -> bool {
        k + self.buffer > self.horizon
    }

    /// Per-time mask: `mask[i]` is true when `times()[i]` is provisional.
    pub fn provisional_mask(&self) -> Vec<bool> {
        self.times.iter().map(|&t| self.is_provisional(t as usize)).collect()
    }
}

/// Linear-time cut-time detector (see module docs).
pub fn find_cut_times(graph: &RangeGraph) -> CutTimeSet {
    let offset = graph.time_offset();
    let horizon = graph.horizon();
    let span = horizon - offset;
    let mut cover = vec![0i32; span + 1];
    for (&first, &last) in graph.first_visits().iter().zip(graph.last_visits()) {
        if last > first {
            cover[first as usize - offset] += 1;
            cover[last as usize - offset] -= 1;
        }
    }
    let mut times = Vec::new();
    let mut running = 0;
    for (i, delta) in cover.iter().take(span).enumerate() {
        running += delta;
        if running == 0 {
            times.push((offset + i) as u32);
        }
    }
    CutTimeSet { horizon, times, buffer: default_buffer(horizon) }
}

/// Quadratic oracle: explicit intersection of the past and future point sets.
pub fn brute_force_cut_times(traj: &Trajectory) -> Result<CutTimeSet> {
    let horizon = traj.horizon();
    if horizon > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded { horizon, cap: BRUTE_FORCE_CAP });
    }
    let points = traj.points();
    let mut future: HashMap<&LatticePoint, usize> = HashMap::new();
    for p in &points[1..] {
        *future.entry(p).or_default() += 1;
    }
    let mut past: HashSet<&LatticePoint> = HashSet::new();
    let mut times = Vec::new();
    for k in 0..horizon {
        past.insert(&points[k]);
        // S_{k+1} moves from the future set into the past at the next step.
        let next = &points[k + 1];
        let intersects = past.iter().any(|p| future.get(p).is_some_and(|&c| c > 0));
        if !intersects {
            times.push(k as u32);
        }
        *future.get_mut(next).unwrap() -= 1;
    }
    Ok(CutTimeSet { horizon, times, buffer: default_buffer(horizon) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutCount {
    pub count: usize,
    /// `n` reaches into the buffer near the horizon.
    pub provisional: bool,
}

/// N_n: the number of cut times in `[0, n]`.
pub fn count_cut_times(cuts: &CutTimeSet, n: usize) -> CutCount {
    CutCount {
        count: cuts.times.partition_point(|&t| t as usize <= n),
        provisional: cuts.is_provisional(n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowedIndicatorConfig {
    pub window: usize,
}

impl WindowedIndicatorConfig {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidParameter("window must be at least 1".into()));
        }
        Ok(Self { window })
    }

    /// `b_n = ⌊n (ln n)^{-power}⌋`, at least 1.
    pub fn log_power(n: usize, power: i32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("log window needs n >= 2".into()));
        }
        let nf = n as f64;
        Self::new(((nf / nf.ln().powi(power)).floor() as usize).clamp(1, n))
    }

    /// `b_{n,r} = ⌊n (ln ln n)^r⌋`; must not exceed `n`.
    pub fn log_log(n: usize, r: i32) -> Result<Self> {
        let nf = n as f64;
        if nf.ln() <= 1.0 {
            return Err(Error::InvalidParameter("log-log window needs ln n > 1".into()));
        }
        let w = (nf * nf.ln().ln().powi(r)).floor() as usize;
        if w > n {
            return Err(Error::InvalidParameter(format!("window {w} exceeds n = {n}")));
        }
        Self::new(w)
    }
}

/// True when `S_[k-b, k]` and `S_[k+1, k+b]` are disjoint.
pub fn windowed_cut_indicator(traj: &Trajectory, k: usize, config: WindowedIndicatorConfig) -> Result<bool> {
    let b = config.window;
    if k < b || k + b > traj.horizon() {
        return Err(Error::InvalidWindow { start: k.saturating_sub(b), end: k + b, horizon: traj.horizon() });
    }
    let d = traj.dimension();
    let pos = traj.positions();
    let at = |j: usize| &pos[j * d..(j + 1) * d];
    let past: HashSet<&[i64]> = (k - b..=k).map(at).collect();
    Ok((k + 1..=k + b).all(|j| !past.contains(at(j))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapStats {
    /// Largest `T_i - T_{i-1}` over `i >= 2` with `T_i <= n` (0 if none).
    pub max_gap: usize,
    /// `n - T_(n)`, distance from the last cut time at or before `n`.
    pub tail_gap: usize,
    /// The first cut time `T_1`.
    pub first: usize,
}

pub fn gap_statistics(cuts: &CutTimeSet, n: usize) -> Result<GapStats> {
    let upto = cuts.times.partition_point(|&t| t as usize <= n);
    if upto == 0 {
        return Err(Error::NoCutTimes(n));
    }
    let listed = &cuts.times[..upto];
    let max_gap = listed.windows(2).map(|w| (w[1] - w[0]) as usize).max().unwrap_or(0);
    Ok(GapStats { max_gap, tail_gap: n - listed[upto - 1] as usize, first: listed[0] as usize })
}
