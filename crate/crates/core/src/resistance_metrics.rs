//! Graph distance and effective resistance from the origin.
//!
//! Cut times split the range into a chain of blocks. Consecutive blocks
//! share exactly one vertex (the glue vertex at the cut time) and no edges,
//! so both metrics from the origin add up block by block: the value at a
//! vertex is the sum of the full block values before its block plus the
//! value from the block's entry glue vertex inside the block.
//!
//! Because vertex ids follow first-visit order, the vertices first visited
//! inside block `j` form the contiguous id range
//! `[visited_count(b_j), visited_count(b_{j+1}))`; together with the entry
//! glue vertex that is the whole block.

use std::collections::VecDeque;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cut_structure::CutTimeSet;
use crate::network::{effective_resistances, GroundedCholesky, Network, SolverConfig};
use crate::range_graph::RangeGraph;
use crate::{Error, Result};

/// Largest graph the whole-graph dense oracle accepts.
pub const ORACLE_CAP: usize = 5000;

/// Chain of blocks between consecutive cut times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    /// `b_0 < b_1 < ... < b_m`: start time, interior cut times, horizon.
    boundaries: Vec<usize>,
    /// Vertex at each boundary time.
    glue: Vec<u32>,
    /// `visited_count(b_j)` for each boundary.
    id_bounds: Vec<u32>,
    /// Time of the last interior cut (values after it are provisional).
    last_cut: Option<usize>,
}

pub fn decompose_blocks(graph: &RangeGraph, cuts: &CutTimeSet) -> BlockDecomposition {
    let start = graph.time_offset();
    let end = graph.horizon();
    let mut boundaries = vec![start];
    boundaries.extend(cuts.times().iter().map(|&t| t as usize).filter(|&t| t > start && t < end));
    if end > start {
        boundaries.push(end);
    }
    let glue = boundaries.iter().map(|&t| graph.vertex_at(t)).collect();
    let id_bounds = boundaries.iter().map(|&t| graph.visited_count(t) as u32).collect();
    BlockDecomposition { boundaries, glue, id_bounds, last_cut: cuts.times().last().map(|&t| t as usize) }
}

impl BlockDecomposition {
    pub fn block_count(&self) -> usize {
        self.boundaries.len().saturating_sub(1)
    }

    /// Time window `[b_j, b_{j+1}]` of block `j`.
    pub fn window(&self, j: usize) -> (usize, usize) {
        (self.boundaries[j], self.boundaries[j + 1])
    }

    pub fn windows(&self) -> Vec<(usize, usize)> {
        (0..self.block_count()).map(|j| self.window(j)).collect()
    }

    /// Glue vertices: the origin, every interior cut vertex, the endpoint.
    pub fn glue_vertices(&self) -> &[u32] {
        &self.glue
    }

    /// Block holding time `k`; a boundary time belongs to the block it starts.
    pub fn block_of_time(&self, k: usize) -> usize {
        let m = self.block_count();
        if m == 0 {
            return 0;
        }
        self.boundaries[1..m].partition_point(|&b| b <= k)
    }

    /// Block holding vertex `v`: the one in which it is first visited.
    pub fn block_of_vertex(&self, v: u32) -> usize {
        let m = self.block_count();
        if m == 0 {
            return 0;
        }
        self.id_bounds[1..=m].partition_point(|&b| b <= v).min(m - 1)
    }

    /// True for times past the last cut time.
    pub fn is_provisional(&self, k: usize) -> bool {
        self.last_cut.is_none_or(|t| k > t)
    }

    fn local_index(&self, j: usize, v: u32) -> u32 {
        if v == self.glue[j] {
            0
        } else {
            v - self.id_bounds[j] + 1
        }
    }
}

/// One block as a standalone unit network; local vertex 0 is the entry glue.
struct LocalBlock {
    globals: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl LocalBlock {
    fn build(graph: &RangeGraph, chain: &BlockDecomposition, j: usize) -> Self {
        let entry = chain.glue[j];
        let (lo, hi) = (chain.id_bounds[j], chain.id_bounds[j + 1]);
        let mut globals = Vec::with_capacity((hi - lo) as usize + 1);
        globals.push(entry);
        globals.extend(lo..hi);
        let mut edges = Vec::new();
        for v in lo..hi {
            for &w in graph.neighbors(v) {
                if w == entry {
                    edges.push((0, v - lo + 1));
                } else if w > v && w < hi {
                    edges.push((v - lo + 1, w - lo + 1));
                }
            }
        }
        Self { globals, edges }
    }

    fn len(&self) -> usize {
        self.globals.len()
    }

    fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.globals.len()
    }

    fn network(&self) -> Network {
        Network::unit(self.len(), &self.edges)
    }

    fn distances_from(&self, source: u32) -> Vec<u32> {
        bfs(self.len(), &self.edges, source)
    }
}

fn bfs(n: usize, edges: &[(u32, u32)], source: u32) -> Vec<u32> {
    let mut offsets = vec![0usize; n + 1];
    for &(a, b) in edges {
        offsets[a as usize + 1] += 1;
        offsets[b as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut adj = vec![0u32; offsets[n]];
    for &(a, b) in edges {
        adj[fill[a as usize]] = b;
        fill[a as usize] += 1;
        adj[fill[b as usize]] = a;
        fill[b as usize] += 1;
    }
    let mut dist = vec![u32::MAX; n];
    dist[source as usize] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[offsets[v as usize]..offsets[v as usize + 1]] {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[v as usize] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Whole-graph breadth-first distances from `source`.
pub fn graph_distances(graph: &RangeGraph, source: u32) -> Vec<u32> {
    let n = graph.vertex_count();
    let mut dist = vec![u32::MAX; n];
    dist[source as usize] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in graph.neighbors(v) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[v as usize] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// `d_G(0, ·)` for every vertex.
pub fn distance_field(graph: &RangeGraph) -> Vec<u32> {
    graph_distances(graph, graph.vertex_at(graph.time_offset()))
}

/// Resistance and distance across each block and their running sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMetrics {
    pub resistance: Vec<f64>,
    pub distance: Vec<u32>,
    /// `prefix_resistance[j]`: resistance from the origin to glue vertex `j`.
    pub prefix_resistance: Vec<f64>,
    pub prefix_distance: Vec<u64>,
}

struct BlockValues {
    across_r: f64,
    across_d: u32,
    targets_r: Vec<f64>,
    targets_d: Vec<u32>,
}

fn solve_block(
    graph: &RangeGraph,
    chain: &BlockDecomposition,
    j: usize,
    targets: &[u32],
    want_resistance: bool,
    cfg: &SolverConfig,
) -> Result<BlockValues> {
    let exit = chain.local_index(j, chain.glue[j + 1]);
    if chain.id_bounds[j + 1] - chain.id_bounds[j] == 1 && targets.is_empty() {
        // Single edge from entry to exit.
        return Ok(BlockValues { across_r: 1.0, across_d: 1, targets_r: Vec::new(), targets_d: Vec::new() });
    }
    let block = LocalBlock::build(graph, chain, j);
    let local: Vec<u32> = targets.iter().map(|&v| chain.local_index(j, v)).collect();
    let dist = block.distances_from(0);
    let targets_d = local.iter().map(|&t| dist[t as usize]).collect();
    let across_d = dist[exit as usize];
    if !want_resistance {
        return Ok(BlockValues { across_r: 0.0, across_d, targets_r: Vec::new(), targets_d });
    }
    if block.is_tree() {
        let targets_r = local.iter().map(|&t| dist[t as usize] as f64).collect();
        return Ok(BlockValues { across_r: across_d as f64, across_d, targets_r, targets_d });
    }
    let mut all = local;
    all.push(exit);
    let mut values = effective_resistances(&block.network(), 0, &all, cfg)?;
    let across_r = values.pop().unwrap();
    Ok(BlockValues { across_r, across_d, targets_r: values, targets_d })
}

/// Per-block values with targets grouped by block.
fn chain_pass(
    graph: &RangeGraph,
    chain: &BlockDecomposition,
    grouped: &[Vec<u32>],
    want_resistance: bool,
    cfg: &SolverConfig,
) -> Result<(ChainMetrics, Vec<BlockValues>)> {
    let m = chain.block_count();
    let values: Vec<BlockValues> = (0..m)
        .into_par_iter()
        .with_min_len(256)
        .map(|j| solve_block(graph, chain, j, &grouped[j], want_resistance, cfg))
        .collect::<Result<_>>()?;
    let mut metrics = ChainMetrics {
        resistance: values.iter().map(|b| b.across_r).collect(),
        distance: values.iter().map(|b| b.across_d).collect(),
        prefix_resistance: Vec::with_capacity(m + 1),
        prefix_distance: Vec::with_capacity(m + 1),
    };
    let (mut r, mut d) = (0.0, 0u64);
    metrics.prefix_resistance.push(r);
    metrics.prefix_distance.push(d);
    for j in 0..m {
        r += metrics.resistance[j];
        d += metrics.distance[j] as u64;
        metrics.prefix_resistance.push(r);
        metrics.prefix_distance.push(d);
    }
    Ok((metrics, values))
}

/// Resistance and distance across every block.
pub fn chain_metrics(graph: &RangeGraph, chain: &BlockDecomposition, cfg: &SolverConfig) -> Result<ChainMetrics> {
    let grouped = vec![Vec::new(); chain.block_count()];
    Ok(chain_pass(graph, chain, &grouped, true, cfg)?.0)
}

/// Profiles of both metrics from the origin along the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricProfile {
    pub grid: Vec<usize>,
    pub resistance: Vec<f64>,
    pub distance: Vec<u64>,
    /// Running maxima along the grid.
    pub past_max_resistance: Vec<f64>,
    pub past_max_distance: Vec<u64>,
    pub provisional: Vec<bool>,
}

fn check_grid(graph: &RangeGraph, grid: &[usize]) -> Result<()> {
    for &k in grid {
        if k < graph.time_offset() || k > graph.horizon() {
            return Err(Error::BeyondHorizon { time: k, horizon: graph.horizon() });
        }
    }
    Ok(())
}

fn profile_values(
    graph: &RangeGraph,
    cuts: &CutTimeSet,
    grid: &[usize],
    want_resistance: bool,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Vec<u64>)> {
    check_grid(graph, grid)?;
    let chain = decompose_blocks(graph, cuts);
    if chain.block_count() == 0 {
        return Ok((vec![0.0; grid.len()], vec![0; grid.len()]));
    }
    let mut grouped = vec![Vec::new(); chain.block_count()];
    let mut slot = Vec::with_capacity(grid.len());
    for &k in grid {
        let j = chain.block_of_time(k);
        slot.push((j, grouped[j].len()));
        grouped[j].push(graph.vertex_at(k));
    }
    let (metrics, values) = chain_pass(graph, &chain, &grouped, want_resistance, cfg)?;
    let mut resistance = Vec::with_capacity(grid.len());
    let mut distance = Vec::with_capacity(grid.len());
    for &(j, i) in &slot {
        if want_resistance {
            resistance.push(metrics.prefix_resistance[j] + values[j].targets_r[i]);
        }
        distance.push(metrics.prefix_distance[j] + values[j].targets_d[i] as u64);
    }
    Ok((resistance, distance))
}

/// `R_G(0, S_k)` for each `k` in `grid`, computed block by block.
pub fn resistance_profile(graph: &RangeGraph, cuts: &CutTimeSet, grid: &[usize], cfg: &SolverConfig) -> Result<Vec<f64>> {
    Ok(profile_values(graph, cuts, grid, true, cfg)?.0)
}

/// `d_G(0, S_k)` for each `k` in `grid`, computed block by block.
pub fn distance_profile(graph: &RangeGraph, cuts: &CutTimeSet, grid: &[usize]) -> Result<Vec<u64>> {
    Ok(profile_values(graph, cuts, grid, false, &SolverConfig::default())?.1)
}

/// Both profiles plus running maxima and provisional flags.
pub fn metric_profile(graph: &RangeGraph, cuts: &CutTimeSet, grid: &[usize], cfg: &SolverConfig) -> Result<MetricProfile> {
    let (resistance, distance) = profile_values(graph, cuts, grid, true, cfg)?;
    let chain = decompose_blocks(graph, cuts);
    let mut past_max_resistance = Vec::with_capacity(grid.len());
    let mut past_max_distance = Vec::with_capacity(grid.len());
    let (mut mr, mut md) = (f64::NEG_INFINITY, 0u64);
    for (&r, &d) in resistance.iter().zip(&distance) {
        mr = mr.max(r);
        md = md.max(d);
        past_max_resistance.push(mr);
        past_max_distance.push(md);
    }
    let provisional = grid.iter().map(|&k| chain.is_provisional(k) || cuts.is_provisional(k)).collect();
    Ok(MetricProfile { grid: grid.to_vec(), resistance, distance, past_max_resistance, past_max_distance, provisional })
}

/// Every time from the graph's start to its horizon.
pub fn full_grid(graph: &RangeGraph) -> Vec<usize> {
    (graph.time_offset()..=graph.horizon()).collect()
}

/// Unit-resistor network of a whole range graph.
pub fn graph_network(graph: &RangeGraph) -> Network {
    let mut edges = Vec::with_capacity(graph.edge_count());
    for v in 0..graph.vertex_count() as u32 {
        for &w in graph.neighbors(v) {
            if w > v {
                edges.push((v, w));
            }
        }
    }
    Network::unit(graph.vertex_count(), &edges)
}

/// Effective resistance from `source` to each target on a single block graph
/// (or any connected range graph), without using cut times.
pub fn block_laplacian_resistance(graph: &RangeGraph, source: u32, targets: &[u32], cfg: &SolverConfig) -> Result<Vec<f64>> {
    effective_resistances(&graph_network(graph), source, targets, cfg)
}

fn oracle_inverse(graph: &RangeGraph, ground: u32) -> Result<DMatrix<f64>> {
    let n = graph.vertex_count();
    if n > ORACLE_CAP {
        return Err(Error::CapExceeded { horizon: n, cap: ORACLE_CAP });
    }
    if ground as usize >= n {
        return Err(Error::UnknownVertex(ground as usize));
    }
    let m = n - 1;
    let idx = |v: u32| if v < ground { v as usize } else { v as usize - 1 };
    let mut lap = DMatrix::<f64>::zeros(m, m);
    for v in 0..n as u32 {
        if v == ground {
            continue;
        }
        lap[(idx(v), idx(v))] = graph.degree(v) as f64;
        for &w in graph.neighbors(v) {
            if w != ground {
                lap[(idx(v), idx(w))] = -1.0;
            }
        }
    }
    let chol = lap
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("graph Laplacian is not positive definite".into()))?;
    Ok(chol.inverse())
}

/// Reference resistance between two vertices from a dense factorization of
/// the whole grounded Laplacian.
pub fn oracle_resistance(graph: &RangeGraph, u: u32, v: u32) -> Result<f64> {
    Ok(oracle_resistances(graph, u, &[v])?[0])
}

/// Reference resistances from `source` to each target.
pub fn oracle_resistances(graph: &RangeGraph, source: u32, targets: &[u32]) -> Result<Vec<f64>> {
    let inv = oracle_inverse(graph, source)?;
    targets
        .iter()
        .map(|&t| {
            if t as usize >= graph.vertex_count() {
                return Err(Error::UnknownVertex(t as usize));
            }
            Ok(match t.cmp(&source) {
                std::cmp::Ordering::Equal => 0.0,
                std::cmp::Ordering::Less => inv[(t as usize, t as usize)],
                std::cmp::Ordering::Greater => inv[(t as usize - 1, t as usize - 1)],
            })
        })
        .collect()
}

/// Largest gap between the running maximum and the current value, for
/// resistance and for distance.
pub fn past_max_deviation(profile: &MetricProfile) -> (f64, u64) {
    let r = profile
        .past_max_resistance
        .iter()
        .zip(&profile.resistance)
        .map(|(m, v)| m - v)
        .fold(0.0, f64::max);
    let d = profile.past_max_distance.iter().zip(&profile.distance).map(|(m, v)| m - v).max().unwrap_or(0);
    (r, d)
}

/// `R_G(0, v)` for every vertex of the blocks whose entry glue lies
/// strictly inside `limit` (other entries are `+inf`).
fn vertex_resistances(
    graph: &RangeGraph,
    chain: &BlockDecomposition,
    prefix: &[f64],
    limit: f64,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let mut out = vec![f64::INFINITY; graph.vertex_count()];
    out[chain.glue[0] as usize] = 0.0;
    let reachable: Vec<usize> = (0..chain.block_count()).filter(|&j| prefix[j] < limit).collect();
    let per_block: Vec<(usize, Vec<f64>)> = reachable
        .par_iter()
        .map(|&j| {
            let block = LocalBlock::build(graph, chain, j);
            let targets: Vec<u32> = (1..block.len() as u32).collect();
            let vals = if block.is_tree() {
                let d = block.distances_from(0);
                targets.iter().map(|&t| d[t as usize] as f64).collect()
            } else {
                effective_resistances(&block.network(), 0, &targets, cfg)?
            };
            Ok((j, vals))
        })
        .collect::<Result<_>>()?;
    for (j, vals) in per_block {
        let base = prefix[j];
        for (i, r) in vals.into_iter().enumerate() {
            out[(chain.id_bounds[j] + i as u32) as usize] = base + r;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceBall {
    pub center: u32,
    pub radius: f64,
    /// Sorted vertex ids with resistance to the center below the radius.
    pub members: Vec<u32>,
    /// Cut times whose cut vertex lies in the ball.
    pub cut_vertices_inside: usize,
    /// Some member lies past the last cut time, where membership in the
    /// infinite graph's ball is not settled by the finite horizon.
    pub touches_horizon: bool,
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRadius(radius))
    }
}

/// `B_G(0, radius)` on the finite range graph.
pub fn resistance_ball(graph: &RangeGraph, cuts: &CutTimeSet, radius: f64, cfg: &SolverConfig) -> Result<ResistanceBall> {
    check_radius(radius)?;
    let chain = decompose_blocks(graph, cuts);
    let metrics = chain_metrics(graph, &chain, cfg)?;
    ball_from_chain(graph, cuts, &chain, &metrics.prefix_resistance, radius, cfg)
}

fn ball_from_chain(
    graph: &RangeGraph,
    cuts: &CutTimeSet,
    chain: &BlockDecomposition,
    prefix: &[f64],
    radius: f64,
    cfg: &SolverConfig,
) -> Result<ResistanceBall> {
    let resist = vertex_resistances(graph, chain, prefix, radius, cfg)?;
    let members: Vec<u32> = (0..graph.vertex_count() as u32).filter(|&v| resist[v as usize] < radius).collect();
    let cut_vertices_inside = cuts
        .times()
        .iter()
        .filter(|&&t| resist[graph.vertex_at(t as usize) as usize] < radius)
        .count();
    let touches_horizon = members.iter().any(|&v| chain.is_provisional(graph.first_visit(v)));
    Ok(ResistanceBall { center: chain.glue[0], radius, members, cut_vertices_inside, touches_horizon })
}

/// `R_G(0, B_G(0, radius)^c)`: the ball's complement shorted into one node.
pub fn resistance_across_ball(graph: &RangeGraph, cuts: &CutTimeSet, radius: f64, cfg: &SolverConfig) -> Result<f64> {
    let ball = resistance_ball(graph, cuts, radius, cfg)?;
    resistance_across(graph, &ball, cfg)
}

/// Resistance from the ball's center to everything outside it.
pub fn resistance_across(graph: &RangeGraph, ball: &ResistanceBall, cfg: &SolverConfig) -> Result<f64> {
    if ball.members.len() == graph.vertex_count() {
        return Err(Error::EmptyComplement { radius: ball.radius });
    }
    // Node 0 is the shorted complement, members follow in id order.
    let mut local = vec![0u32; graph.vertex_count()];
    for (i, &v) in ball.members.iter().enumerate() {
        local[v as usize] = i as u32 + 1;
    }
    let mut edges = Vec::new();
    for &v in &ball.members {
        for &w in graph.neighbors(v) {
            let lw = local[w as usize];
            if lw == 0 || w > v {
                edges.push((local[v as usize], lw));
            }
        }
    }
    let net = Network::unit(ball.members.len() + 1, &edges);
    Ok(effective_resistances(&net, 0, &[local[ball.center as usize]], cfg)?[0])
}

/// Blocks up to this size keep their dense grounded inverse, so that any
/// pair inside them costs a lookup.
const INVERSE_MAX: usize = 2000;

/// Resistances from one block's entry and exit glue to each of its vertices.
struct BlockPairs {
    to_entry: Vec<f64>,
    to_exit: Vec<f64>,
    net: Network,
    inverse: Option<Vec<f64>>,
}

impl BlockPairs {
    fn new(graph: &RangeGraph, chain: &BlockDecomposition, j: usize) -> Result<Self> {
        let block = LocalBlock::build(graph, chain, j);
        if block.len() > ORACLE_CAP {
            return Err(Error::CapExceeded { horizon: block.len(), cap: ORACLE_CAP });
        }
        let net = block.network();
        let exit = chain.local_index(j, chain.glue[j + 1]) as usize;
        let n = block.len();
        let entry = GroundedCholesky::factor(&net, 0)?;
        if n <= INVERSE_MAX {
            let g = entry.inverse();
            let to_entry = (0..n).map(|v| g[v * n + v]).collect();
            let to_exit = (0..n).map(|v| pair(&g, n, exit, v)).collect();
            return Ok(Self { to_entry, to_exit, net, inverse: Some(g) });
        }
        let to_entry = (0..n as u32).map(|v| entry.resistance_to_ground(v)).collect();
        let exit_f = GroundedCholesky::factor(&net, exit as u32)?;
        let to_exit = (0..n as u32).map(|v| exit_f.resistance_to_ground(v)).collect();
        Ok(Self { to_entry, to_exit, net, inverse: None })
    }
}

fn pair(g: &[f64], n: usize, u: usize, v: usize) -> f64 {
    if u == v {
        0.0
    } else {
        (g[u * n + u] + g[v * n + v] - 2.0 * g[u * n + v]).max(0.0)
    }
}

/// Resistance between arbitrary pairs of vertices, glued across blocks:
/// `R(u, v)` is the piece from `u` to its block's exit, the full blocks in
/// between, and the piece from the entry of `v`'s block to `v`. Blocks are
/// factored densely on first use.
pub struct PairwiseResistance<'a> {
    graph: &'a RangeGraph,
    chain: BlockDecomposition,
    prefix: Vec<f64>,
    blocks: Vec<OnceLock<BlockPairs>>,
}

/// Resistances from one fixed center.
pub struct CenterView<'p, 'a> {
    owner: &'p PairwiseResistance<'a>,
    block: usize,
    local: usize,
    within: Vec<f64>,
}

impl<'a> PairwiseResistance<'a> {
    pub fn new(graph: &'a RangeGraph, cuts: &CutTimeSet, cfg: &SolverConfig) -> Result<Self> {
        let chain = decompose_blocks(graph, cuts);
        let prefix = chain_metrics(graph, &chain, cfg)?.prefix_resistance;
        let blocks = (0..chain.block_count()).map(|_| OnceLock::new()).collect();
        Ok(Self { graph, chain, prefix, blocks })
    }

    fn block(&self, j: usize) -> Result<&BlockPairs> {
        if let Some(b) = self.blocks[j].get() {
            return Ok(b);
        }
        let built = BlockPairs::new(self.graph, &self.chain, j)?;
        Ok(self.blocks[j].get_or_init(|| built))
    }

    fn locate(&self, v: u32) -> Result<(usize, usize)> {
        if v as usize >= self.graph.vertex_count() {
            return Err(Error::UnknownVertex(v as usize));
        }
        let j = self.chain.block_of_vertex(v);
        Ok((j, self.chain.local_index(j, v) as usize))
    }

    pub fn from(&self, center: u32) -> Result<CenterView<'_, 'a>> {
        let (block, local) = self.locate(center)?;
        if self.chain.block_count() == 0 {
            return Ok(CenterView { owner: self, block, local, within: vec![0.0] });
        }
        let b = self.block(block)?;
        let n = b.net.vertex_count();
        let within = match &b.inverse {
            Some(g) => (0..n).map(|v| pair(g, n, local, v)).collect(),
            None => {
                let f = GroundedCholesky::factor(&b.net, local as u32)?;
                (0..n as u32).map(|v| f.resistance_to_ground(v)).collect()
            }
        };
        Ok(CenterView { owner: self, block, local, within })
    }

    /// `R(u, v)` with the dense factorization grounded at `u`.
    pub fn resistance(&self, u: u32, v: u32) -> Result<f64> {
        self.from(u)?.to(v)
    }
}

impl CenterView<'_, '_> {
    pub fn to(&self, v: u32) -> Result<f64> {
        let p = self.owner;
        let (vj, vi) = p.locate(v)?;
        let (cj, ci) = (self.block, self.local);
        Ok(match vj.cmp(&cj) {
            std::cmp::Ordering::Equal => self.within[vi],
            std::cmp::Ordering::Greater => {
                p.block(cj)?.to_exit[ci] + p.prefix[vj] - p.prefix[cj + 1] + p.block(vj)?.to_entry[vi]
            }
            std::cmp::Ordering::Less => {
                p.block(vj)?.to_exit[vi] + p.prefix[cj] - p.prefix[vj + 1] + p.block(cj)?.to_entry[ci]
            }
        })
    }
}

/// Size of a greedy cover of `B_G(0, r)` by resistance balls of radius
/// `2r/3`. Each new center is the uncovered ball vertex with the earliest
/// first visit, so the origin is always the first center.
pub fn covering_number(graph: &RangeGraph, cuts: &CutTimeSet, radius: f64, cfg: &SolverConfig) -> Result<usize> {
    check_radius(radius)?;
    let pairs = PairwiseResistance::new(graph, cuts, cfg)?;
    let ball = ball_from_chain(graph, cuts, &pairs.chain, &pairs.prefix, radius, cfg)?;
    let small = 2.0 * radius / 3.0;
    // Members are sorted by id, which is first-visit order.
    let mut covered = vec![false; ball.members.len()];
    let mut centers = 0;
    while let Some(next) = covered.iter().position(|&c| !c) {
        centers += 1;
        let view = pairs.from(ball.members[next])?;
        for (slot, &v) in ball.members.iter().enumerate() {
            if !covered[slot] && view.to(v)? < small {
                covered[slot] = true;
            }
        }
    }
    Ok(centers)
}
