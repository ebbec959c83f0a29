//! The range graph G of a trajectory: visited sites joined by traversed bonds.
//!
//! Vertex ids are handed out in first-visit order, so the ids along a
//! trajectory are stable and `first_visit` is increasing in the id.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use crate::lattice_walk::{LatticePoint, Trajectory};
use crate::{Error, Result};

/// Hasher for packed lattice keys: two odd-multiplier products folded with
/// xor-shifts. Keys are already well spread, so this only has to mix bits.
#[derive(Default, Clone, Copy)]
pub struct LatticeKeyHasher {
    state: u64,
}

impl Hasher for LatticeKeyHasher {
    fn finish(&self) -> u64 {
        self.state
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.write_u64(u64::from_le_bytes(buf));
        }
    }

    fn write_u64(&mut self, x: u64) {
        let mut h = (self.state ^ x).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        h ^= h >> 29;
        self.state = h.wrapping_mul(0xbf58_476d_1ce4_e5b9) ^ (h >> 32);
    }

    fn write_u128(&mut self, x: u128) {
        let lo = x as u64;
        let hi = (x >> 64) as u64;
        let mut h = lo.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ hi.wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
        h ^= h >> 29;
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        self.state = h ^ (h >> 32);
    }
}

pub type LatticeIndex = HashMap<u128, u32, BuildHasherDefault<LatticeKeyHasher>>;

/// Packs a lattice point into a `u128` with `min(128 / d, 64)` bits per axis.
pub fn pack_point(coords: &[i64]) -> Result<u128> {
    let d = coords.len();
    let bits = (128 / d).min(64);
    let mut key = 0u128;
    for (axis, &c) in coords.iter().enumerate() {
        let field = if bits == 64 {
            c as u64 as u128
        } else {
            let limit = 1i64 << (bits - 1);
            if c <= -limit || c >= limit {
                return Err(Error::CoordinateOverflow { value: c, dimension: d });
            }
            ((c + limit) as u128) & ((1u128 << bits) - 1)
        };
        key |= field << (axis * bits);
    }
    Ok(key)
}

/// A time window `[start, end]` of a trajectory, `start < end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubtraceWindow {
    pub start: usize,
    pub end: usize,
}

impl SubtraceWindow {
    pub fn new(start: usize, end: usize, horizon: usize) -> Result<Self> {
        if start >= end || end > horizon {
            return Err(Error::InvalidWindow { start, end, horizon });
        }
        Ok(Self { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, k: usize) -> bool {
        self.start <= k && k <= self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeGraph {
    dimension: usize,
    time_offset: usize,
    index: LatticeIndex,
    coords: Vec<i32>,
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    first_visit: Vec<u32>,
    last_visit: Vec<u32>,
    trace: Vec<u32>,
    degree_prefix: Vec<u64>,
}

/// Range graph of the whole trajectory, G_N for horizon N.
pub fn build_range_graph(traj: &Trajectory) -> Result<RangeGraph> {
    build_window(traj, 0, traj.horizon())
}

/// Graph of the windowed trace: vertices `S_m..=S_n`, edges
/// `{S_k, S_{k+1}}` for `m <= k < n`. Visit times stay absolute.
pub fn subtrace_graph(traj: &Trajectory, window: SubtraceWindow) -> Result<RangeGraph> {
    if window.start >= window.end || window.end > traj.horizon() {
        return Err(Error::InvalidWindow {
            start: window.start,
            end: window.end,
            horizon: traj.horizon(),
        });
    }
    build_window(traj, window.start, window.end)
}

fn build_window(traj: &Trajectory, start: usize, end: usize) -> Result<RangeGraph> {
    if end >= u32::MAX as usize {
        return Err(Error::CapExceeded { horizon: end, cap: u32::MAX as usize - 1 });
    }
    let dimension = traj.dimension();
    let mut index = LatticeIndex::default();
    let mut coords = Vec::new();
    let mut first_visit = Vec::new();
    let mut last_visit = Vec::new();
    let mut trace = Vec::with_capacity(end - start + 1);
    let mut failure = None;

    traj.for_each_point(|k, point| {
        if k < start || k > end || failure.is_some() {
            return;
        }
        let key = match pack_point(point) {
            Ok(key) => key,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        let next = first_visit.len() as u32;
        let id = *index.entry(key).or_insert(next);
        if id == next {
            coords.extend(point.iter().map(|&c| c as i32));
            first_visit.push(k as u32);
            last_visit.push(k as u32);
        } else {
            last_visit[id as usize] = k as u32;
        }
        trace.push(id);
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let vertex_count = first_visit.len();
    let mut edges: Vec<u64> = trace
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].min(w[1]) as u64, w[0].max(w[1]) as u64);
            (a << 32) | b
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let mut degree = vec![0u32; vertex_count];
    for &e in &edges {
        degree[(e >> 32) as usize] += 1;
        degree[(e & 0xffff_ffff) as usize] += 1;
    }
    let mut offsets = Vec::with_capacity(vertex_count + 1);
    offsets.push(0u32);
    for &d in &degree {
        offsets.push(offsets.last().unwrap() + d);
    }
    // Edges are sorted by (low, high); filling both endpoints in that order
    // leaves every adjacency list sorted.
    let mut fill: Vec<u32> = offsets[..vertex_count].to_vec();
    let mut neighbors = vec![0u32; edges.len() * 2];
    for &e in &edges {
        let (a, b) = ((e >> 32) as usize, (e & 0xffff_ffff) as usize);
        neighbors[fill[a] as usize] = b as u32;
        fill[a] += 1;
        neighbors[fill[b] as usize] = a as u32;
        fill[b] += 1;
    }
    let mut degree_prefix = Vec::with_capacity(vertex_count + 1);
    degree_prefix.push(0u64);
    for &d in &degree {
        degree_prefix.push(degree_prefix.last().unwrap() + d as u64);
    }

    Ok(RangeGraph {
        dimension,
        time_offset: start,
        index,
        coords,
        offsets,
        neighbors,
        first_visit,
        last_visit,
        trace,
        degree_prefix,
    })
}

impl RangeGraph {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex_count(&self) -> usize {
        self.first_visit.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// First trajectory time covered by this graph (0 unless it is a subtrace).
    pub fn time_offset(&self) -> usize {
        self.time_offset
    }

    /// Last trajectory time covered by this graph.
    pub fn horizon(&self) -> usize {
        self.time_offset + self.trace.len() - 1
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    /// CSR offsets, `vertex_count + 1` entries.
    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn adjacency(&self) -> &[u32] {
        &self.neighbors
    }

    pub fn first_visit(&self, v: u32) -> usize {
        self.first_visit[v as usize] as usize
    }

    pub fn last_visit(&self, v: u32) -> usize {
        self.last_visit[v as usize] as usize
    }

    pub fn first_visits(&self) -> &[u32] {
        &self.first_visit
    }

    pub fn last_visits(&self) -> &[u32] {
        &self.last_visit
    }

    /// Vertex ids along the trajectory, one per time in `[time_offset, horizon]`.
    pub fn trace(&self) -> &[u32] {
        &self.trace
    }

    /// Vertex occupied at absolute time `k`.
    pub fn vertex_at(&self, k: usize) -> u32 {
        self.trace[k - self.time_offset]
    }

    pub fn coords(&self, v: u32) -> &[i32] {
        let d = self.dimension;
        &self.coords[v as usize * d..(v as usize + 1) * d]
    }

    pub fn point(&self, v: u32) -> LatticePoint {
        LatticePoint::new(self.coords(v).iter().map(|&c| c as i64).collect())
    }

    pub fn vertex_of(&self, point: &LatticePoint) -> Option<u32> {
        if point.dimension() != self.dimension {
            return None;
        }
        pack_point(point.coords()).ok().and_then(|key| self.index.get(&key).copied())
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn degree_sum(&self) -> u64 {
        *self.degree_prefix.last().unwrap()
    }

    /// Number of distinct vertices visited up to absolute time `n`.
    pub fn visited_count(&self, n: usize) -> usize {
        self.first_visit.partition_point(|&t| t as usize <= n)
    }

    /// Stable byte form used to compare graphs across rebuilds.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend((self.dimension as u64).to_le_bytes());
        out.extend((self.time_offset as u64).to_le_bytes());
        for part in [&self.offsets, &self.neighbors, &self.first_visit, &self.last_visit, &self.trace] {
            out.extend((part.len() as u64).to_le_bytes());
            out.extend(part.iter().flat_map(|x| x.to_le_bytes()));
        }
        out.extend(self.coords.iter().flat_map(|x| x.to_le_bytes()));
        out
    }
}

/// μ_G(S_[0,n]): total degree of the distinct vertices visited by time `n`.
pub fn mu_measure_prefix(graph: &RangeGraph, n: usize) -> Result<u64> {
    if n > graph.horizon() || n < graph.time_offset() {
        return Err(Error::BeyondHorizon { time: n, horizon: graph.horizon() });
    }
    Ok(graph.degree_prefix[graph.visited_count(n)])
}

/// Per-time weights of the last-exit decomposition, independent of the window.
///
/// Entry `k` is the number of distinct edges among `{S_j, S_{j+1}}`, `j <= k`,
/// that contain `S_k`, when `k` is the last visit to `S_k` within the horizon,
/// and 0 otherwise. At `k = N` the edge set is the whole trace. Only the trace
/// ids are used, not the graph's degree table, so the sum rule is a genuine
/// consistency check.
fn last_exit_weights(graph: &RangeGraph) -> (Vec<u32>, Vec<usize>) {
    let trace = graph.trace();
    let offset = graph.time_offset();
    let mut seen_edges = std::collections::HashSet::with_capacity(trace.len());
    let mut running = vec![0u32; graph.vertex_count()];
    let mut first_seen = vec![usize::MAX; graph.vertex_count()];
    let mut last_seen = vec![0usize; graph.vertex_count()];
    for (i, &v) in trace.iter().enumerate() {
        let slot = &mut first_seen[v as usize];
        if *slot == usize::MAX {
            *slot = offset + i;
        }
        last_seen[v as usize] = offset + i;
    }
    let mut weights = vec![0u32; trace.len()];
    for (i, &v) in trace.iter().enumerate() {
        if let Some(&w) = trace.get(i + 1) {
            let key = ((v.min(w) as u64) << 32) | v.max(w) as u64;
            if seen_edges.insert(key) {
                running[v as usize] += 1;
                running[w as usize] += 1;
            }
        }
        if last_seen[v as usize] == offset + i {
            weights[i] = running[v as usize];
        }
    }
    let first_of_step = trace.iter().map(|&v| first_seen[v as usize]).collect();
    (weights, first_of_step)
}

/// The sequence `Y_k^(n)`, `k = time_offset..=horizon`, whose sum equals
/// [`mu_measure_prefix`] at `n`.
pub fn last_exit_decomposition(graph: &RangeGraph, n: usize) -> Result<Vec<u32>> {
    if n > graph.horizon() || n < graph.time_offset() {
        return Err(Error::BeyondHorizon { time: n, horizon: graph.horizon() });
    }
    let (weights, first_of_step) = last_exit_weights(graph);
    Ok(weights
        .into_iter()
        .zip(first_of_step)
        .map(|(y, first)| if first <= n { y } else { 0 })
        .collect())
}

/// `Σ_k Y_k^(n)` for every `n` in `[time_offset, horizon]` in one pass.
pub fn last_exit_totals(graph: &RangeGraph) -> Vec<u64> {
    let (weights, first_of_step) = last_exit_weights(graph);
    let offset = graph.time_offset();
    let mut added_at = vec![0u64; weights.len()];
    for (y, first) in weights.into_iter().zip(first_of_step) {
        added_at[first - offset] += y as u64;
    }
    let mut total = 0;
    added_at
        .into_iter()
        .map(|a| {
            total += a;
            total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_walk::{generate_trajectory, load_fixed_path};

    fn e(axis: usize, scale: i64) -> LatticePoint {
        LatticePoint::axis(4, axis, scale)
    }

    pub(crate) fn straight(n: i64) -> Trajectory {
        load_fixed_path(&(0..=n).map(|k| e(0, k)).collect::<Vec<_>>()).unwrap()
    }

    fn back_and_forth() -> Trajectory {
        load_fixed_path(&[LatticePoint::origin(4), e(0, 1), LatticePoint::origin(4)]).unwrap()
    }

    fn square() -> Trajectory {
        let o = LatticePoint::origin(4);
        load_fixed_path(&[o.clone(), e(0, 1), e(0, 1).plus(&e(1, 1)), e(1, 1), o]).unwrap()
    }

    fn degrees(g: &RangeGraph) -> Vec<u32> {
        (0..g.vertex_count() as u32).map(|v| g.degree(v)).collect()
    }

    #[test]
    fn fixture_graphs() {
        let g = build_range_graph(&straight(2)).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
        assert_eq!(degrees(&g), vec![1, 2, 1]);

        let g = build_range_graph(&back_and_forth()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        assert_eq!(degrees(&g), vec![1, 1]);

        let g = build_range_graph(&square()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 4));
        assert_eq!(degrees(&g), vec![2, 2, 2, 2]);
        assert_eq!(g.first_visit(0), 0);
        assert_eq!(g.last_visit(0), 4);
    }

    #[test]
    fn mu_prefix_fixtures() {
        for n in 1..8 {
            let g = build_range_graph(&straight(n)).unwrap();
            assert_eq!(mu_measure_prefix(&g, n as usize).unwrap(), 2 * n as u64);
        }
        let g = build_range_graph(&square()).unwrap();
        assert_eq!(mu_measure_prefix(&g, 4).unwrap(), 8);
        assert!(matches!(mu_measure_prefix(&g, 5), Err(Error::BeyondHorizon { .. })));
    }

    #[test]
    fn last_exit_fixtures() {
        let g = build_range_graph(&straight(5)).unwrap();
        assert_eq!(last_exit_decomposition(&g, 5).unwrap(), vec![1, 2, 2, 2, 2, 1]);

        let g = build_range_graph(&back_and_forth()).unwrap();
        let y = last_exit_decomposition(&g, 2).unwrap();
        assert_eq!(y, vec![0, 1, 1]);
        assert_eq!(y.iter().map(|&v| v as u64).sum::<u64>(), mu_measure_prefix(&g, 2).unwrap());
    }

    #[test]
    fn subtrace_windows() {
        let t = straight(5);
        let full = subtrace_graph(&t, SubtraceWindow::new(0, 5, 5).unwrap()).unwrap();
        assert_eq!(full, build_range_graph(&t).unwrap());

        let w = subtrace_graph(&t, SubtraceWindow::new(1, 3, 5).unwrap()).unwrap();
        assert_eq!((w.vertex_count(), w.edge_count()), (3, 2));
        assert_eq!(w.first_visit(0), 1);

        let c = subtrace_graph(&square(), SubtraceWindow::new(0, 3, 4).unwrap()).unwrap();
        assert_eq!((c.vertex_count(), c.edge_count()), (4, 3));

        assert!(SubtraceWindow::new(3, 3, 5).is_err());
        assert!(SubtraceWindow::new(1, 6, 5).is_err());
    }

    #[test]
    fn random_graph_invariants() {
        for seed in 0..20 {
            let t = generate_trajectory(4, 3000, seed).unwrap();
            let g = build_range_graph(&t).unwrap();
            let degs = degrees(&g);
            assert!(degs.iter().all(|&d| (1..=8).contains(&d)));
            assert_eq!(degs.iter().map(|&d| d as u64).sum::<u64>(), 2 * g.edge_count() as u64);
            for v in 0..g.vertex_count() as u32 {
                for &w in g.neighbors(v) {
                    assert!(g.has_edge(w, v));
                    assert_eq!(g.point(v).l1_distance(&g.point(w)), 1);
                }
            }
            for (k, w) in g.trace().windows(2).enumerate() {
                assert!(g.has_edge(w[0], w[1]), "step {k}");
            }
            assert_eq!(g.vertex_of(&t.point(1234)), Some(g.vertex_at(1234)));
        }
    }

    #[test]
    fn packing_rejects_overflow() {
        assert!(pack_point(&[1 << 20; 8]).is_err());
        assert!(pack_point(&[i64::MIN, 5]).is_ok());
        assert_ne!(pack_point(&[1, 0, 0, 0]).unwrap(), pack_point(&[0, 1, 0, 0]).unwrap());
        assert_ne!(pack_point(&[-1, 0, 0, 0]).unwrap(), pack_point(&[0, -1, 0, 0]).unwrap());
    }
}
