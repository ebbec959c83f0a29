//! Resistor networks and the solvers behind effective resistance.
//!
//! Edges carry conductances (unit resistors have conductance 1). A query
//! first strips the network down with exact series/parallel/leaf
//! reductions that keep every terminal, then solves the grounded Laplacian
//! of what is left: dense Cholesky up to [`SolverConfig::dense_max`]
//! unknowns, Jacobi-preconditioned conjugate gradient above that.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative residual at which conjugate gradient stops.
    pub tolerance: f64,
    /// Iteration cap is `max_iter_factor * unknowns`.
    pub max_iter_factor: usize,
    /// Largest reduced system handled by dense Cholesky.
    pub dense_max: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iter_factor: 20, dense_max: 3000 }
    }
}

/// Conductance-weighted undirected network on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    edges: Vec<(u32, u32, f64)>,
}

impl Network {
    pub fn new(n: usize, edges: Vec<(u32, u32, f64)>) -> Self {
        Self { n, edges }
    }

    pub fn unit(n: usize, edges: &[(u32, u32)]) -> Self {
        Self { n, edges: edges.iter().map(|&(a, b)| (a, b, 1.0)).collect() }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    fn check(&self, v: u32) -> Result<()> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v as usize))
        }
    }
}

/// Adjacency lists with merged parallel edges.
fn merged_adjacency(net: &Network) -> Vec<Vec<(u32, f64)>> {
    let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); net.n];
    for &(a, b, c) in &net.edges {
        if a != b {
            add_conductance(&mut adj, a, b, c);
        }
    }
    adj
}

fn add_conductance(adj: &mut [Vec<(u32, f64)>], a: u32, b: u32, c: f64) {
    match adj[a as usize].iter_mut().find(|(x, _)| *x == b) {
        Some(slot) => {
            slot.1 += c;
            adj[b as usize].iter_mut().find(|(x, _)| *x == a).unwrap().1 += c;
        }
        None => {
            adj[a as usize].push((b, c));
            adj[b as usize].push((a, c));
        }
    }
}

fn detach(adj: &mut [Vec<(u32, f64)>], from: u32, v: u32) {
    let list = &mut adj[from as usize];
    if let Some(i) = list.iter().position(|(x, _)| *x == v) {
        list.swap_remove(i);
    }
}

/// Result of [`reduce`]: the smaller network and where each terminal went.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub network: Network,
    pub terminal_ids: Vec<u32>,
}

/// Removes non-terminal leaves and isolated vertices, and splices out
/// non-terminal degree-2 vertices (series law), merging parallel edges.
/// Effective resistances between terminals are unchanged.
pub fn reduce(net: &Network, terminals: &[u32]) -> Reduced {
    let mut adj = merged_adjacency(net);
    let mut is_terminal = vec![false; net.n];
    for &t in terminals {
        is_terminal[t as usize] = true;
    }
    let mut alive = vec![true; net.n];
    let mut queue: Vec<u32> = (0..net.n as u32)
        .filter(|&v| !is_terminal[v as usize] && adj[v as usize].len() <= 2)
        .collect();
    while let Some(v) = queue.pop() {
        let vi = v as usize;
        if !alive[vi] || is_terminal[vi] {
            continue;
        }
        match adj[vi].len() {
            0 => alive[vi] = false,
            1 => {
                let (u, _) = adj[vi][0];
                detach(&mut adj, u, v);
                adj[vi].clear();
                alive[vi] = false;
                if !is_terminal[u as usize] && adj[u as usize].len() <= 2 {
                    queue.push(u);
                }
            }
            2 => {
                let (u, cu) = adj[vi][0];
                let (w, cw) = adj[vi][1];
                detach(&mut adj, u, v);
                detach(&mut adj, w, v);
                adj[vi].clear();
                alive[vi] = false;
                add_conductance(&mut adj, u, w, cu * cw / (cu + cw));
                for x in [u, w] {
                    if !is_terminal[x as usize] && adj[x as usize].len() <= 2 {
                        queue.push(x);
                    }
                }
            }
            _ => {}
        }
    }
    let mut new_id = vec![u32::MAX; net.n];
    let mut count = 0u32;
    for v in 0..net.n {
        if alive[v] {
            new_id[v] = count;
            count += 1;
        }
    }
    let mut edges = Vec::new();
    for (v, list) in adj.iter().enumerate() {
        if !alive[v] {
            continue;
        }
        for &(w, c) in list {
            if (v as u32) < w {
                edges.push((new_id[v], new_id[w as usize], c));
            }
        }
    }
    Reduced {
        network: Network::new(count as usize, edges),
        terminal_ids: terminals.iter().map(|&t| new_id[t as usize]).collect(),
    }
}

/// Dense Cholesky factor of a grounded weighted Laplacian.
pub struct GroundedCholesky {
    m: usize,
    ground: usize,
    lower: Vec<f64>,
}

impl GroundedCholesky {
    pub fn factor(net: &Network, ground: u32) -> Result<Self> {
        net.check(ground)?;
        let n = net.n;
        let m = n - 1;
        let ground = ground as usize;
        let idx = |v: usize| if v < ground { v } else { v - 1 };
        let mut a = vec![0.0; m * m];
        for &(u, v, c) in &net.edges {
            let (u, v) = (u as usize, v as usize);
            if u == v {
                continue;
            }
            if u != ground {
                a[idx(u) * m + idx(u)] += c;
            }
            if v != ground {
                a[idx(v) * m + idx(v)] += c;
            }
            if u != ground && v != ground {
                a[idx(u) * m + idx(v)] -= c;
                a[idx(v) * m + idx(u)] -= c;
            }
        }
        for j in 0..m {
            let mut diag = a[j * m + j];
            for k in 0..j {
                diag -= a[j * m + k] * a[j * m + k];
            }
            if diag <= 0.0 {
                return Err(Error::InvalidParameter("network is disconnected".into()));
            }
            let diag = diag.sqrt();
            a[j * m + j] = diag;
            for i in j + 1..m {
                let mut s = a[i * m + j];
                let (ri, rj) = (&a[i * m..i * m + j], &a[j * m..j * m + j]);
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                a[i * m + j] = s / diag;
            }
        }
        Ok(Self { m, ground, lower: a })
    }

    fn index(&self, v: u32) -> Option<usize> {
        let v = v as usize;
        match v.cmp(&self.ground) {
            std::cmp::Ordering::Less => Some(v),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(v - 1),
        }
    }

    /// `L^{-1} e_v` restricted to indices `>= v` (zeros before).
    fn forward_unit(&self, start: usize) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        y[start] = 1.0 / self.lower[start * m + start];
        for i in start + 1..m {
            let row = &self.lower[i * m..i * m + i];
            let s: f64 = (start..i).map(|k| row[k] * y[k]).sum();
            y[i] = -s / self.lower[i * m + i];
        }
        y
    }

    /// Resistance between the ground and `v`: the diagonal of the inverse.
    pub fn resistance_to_ground(&self, v: u32) -> f64 {
        match self.index(v) {
            None => 0.0,
            Some(i) => self.forward_unit(i)[i..].iter().map(|x| x * x).sum(),
        }
    }

    /// Resistance between two arbitrary vertices,
    /// `G_uu + G_vv - 2 G_uv` with `G` the grounded inverse.
    pub fn resistance_between(&self, u: u32, v: u32) -> f64 {
        match (self.index(u), self.index(v)) {
            (None, _) => self.resistance_to_ground(v),
            (_, None) => self.resistance_to_ground(u),
            (Some(i), Some(j)) if i == j => 0.0,
            (Some(i), Some(j)) => {
                let (yi, yj) = (self.forward_unit(i), self.forward_unit(j));
                let guu: f64 = yi.iter().map(|x| x * x).sum();
                let gvv: f64 = yj.iter().map(|x| x * x).sum();
                let guv: f64 = yi.iter().zip(&yj).map(|(a, b)| a * b).sum();
                (guu + gvv - 2.0 * guv).max(0.0)
            }
        }
    }

    /// The grounded inverse as an `n x n` row-major matrix over all vertices,
    /// with zeros in the ground's row and column.
    pub fn inverse(&self) -> Vec<f64> {
        let (m, n) = (self.m, self.m + 1);
        let cols: Vec<Vec<f64>> = (0..m).map(|i| self.forward_unit(i)).collect();
        let vertex = |i: usize| if i < self.ground { i } else { i + 1 };
        let mut g = vec![0.0; n * n];
        for i in 0..m {
            for j in i..m {
                let x: f64 = cols[i][j..].iter().zip(&cols[j][j..]).map(|(a, b)| a * b).sum();
                let (a, b) = (vertex(i), vertex(j));
                g[a * n + b] = x;
                g[b * n + a] = x;
            }
        }
        g
    }

    /// Voltages for a unit current injected at `v` and extracted at ground.
    pub fn potentials(&self, v: u32) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m + 1];
        let Some(i) = self.index(v) else { return out };
        let mut y = self.forward_unit(i);
        for r in (0..m).rev() {
            let mut s = y[r];
            for k in r + 1..m {
                s -= self.lower[k * m + r] * y[k];
            }
            y[r] = s / self.lower[r * m + r];
        }
        for (idx, val) in y.into_iter().enumerate() {
            let vtx = if idx < self.ground { idx } else { idx + 1 };
            out[vtx] = val;
        }
        out
    }
}

/// Grounded weighted Laplacian in CSR form for conjugate gradient.
struct GroundedCsr {
    ground: usize,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
    diag: Vec<f64>,
}

impl GroundedCsr {
    fn new(net: &Network, ground: u32) -> Self {
        let adj = merged_adjacency(net);
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        let mut diag = vec![0.0; net.n];
        for (v, list) in adj.iter().enumerate() {
            for &(w, c) in list {
                diag[v] += c;
                cols.push(w);
                weights.push(c);
            }
            offsets.push(cols.len());
        }
        Self { ground: ground as usize, offsets, cols, weights, diag }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for v in 0..x.len() {
            if v == self.ground {
                out[v] = 0.0;
                continue;
            }
            let mut s = self.diag[v] * x[v];
            for k in self.offsets[v]..self.offsets[v + 1] {
                let w = self.cols[k] as usize;
                if w != self.ground {
                    s -= self.weights[k] * x[w];
                }
            }
            out[v] = s;
        }
    }
}

/// Jacobi-preconditioned CG for `L_g x = b` with `x_g = 0`.
fn conjugate_gradient(sys: &GroundedCsr, rhs: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let n = rhs.len();
    let unknowns = n.saturating_sub(1).max(1);
    let max_iter = cfg.max_iter_factor * unknowns;
    let norm_b = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if norm_b == 0.0 {
        return Ok(x);
    }
    let precondition = |r: &[f64], z: &mut [f64]| {
        for v in 0..n {
            z[v] = if v == sys.ground || sys.diag[v] == 0.0 { 0.0 } else { r[v] / sys.diag[v] };
        }
    };
    let mut r = rhs.to_vec();
    r[sys.ground] = 0.0;
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut residual = 1.0;
    for iteration in 0..max_iter {
        sys.apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for v in 0..n {
            x[v] += alpha * p[v];
            r[v] -= alpha * ap[v];
        }
        residual = r.iter().map(|v| v * v).sum::<f64>().sqrt() / norm_b;
        if residual <= cfg.tolerance {
            return Ok(x);
        }
        precondition(&r, &mut z);
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for v in 0..n {
            p[v] = z[v] + beta * p[v];
        }
        let _ = iteration;
    }
    Err(Error::SolverNonConvergence { iterations: max_iter, residual, tolerance: cfg.tolerance })
}

/// Effective resistance from `source` to each target.
pub fn effective_resistances(net: &Network, source: u32, targets: &[u32], cfg: &SolverConfig) -> Result<Vec<f64>> {
    net.check(source)?;
    for &t in targets {
        net.check(t)?;
    }
    let mut terminals = Vec::with_capacity(targets.len() + 1);
    terminals.push(source);
    terminals.extend_from_slice(targets);
    let reduced = reduce(net, &terminals);
    let red = &reduced.network;
    let src = reduced.terminal_ids[0];
    let tgt = &reduced.terminal_ids[1..];
    if red.n <= 1 {
        return Ok(vec![0.0; targets.len()]);
    }
    if red.n - 1 <= cfg.dense_max {
        let chol = GroundedCholesky::factor(red, src)?;
        return Ok(tgt.iter().map(|&t| chol.resistance_to_ground(t)).collect());
    }
    let sys = GroundedCsr::new(red, src);
    let mut out = Vec::with_capacity(tgt.len());
    for &t in tgt {
        if t == src {
            out.push(0.0);
            continue;
        }
        let mut rhs = vec![0.0; red.n];
        rhs[t as usize] = 1.0;
        out.push(conjugate_gradient(&sys, &rhs, cfg)?[t as usize]);
    }
    Ok(out)
}

/// Effective resistance from `source` to the set `ground` shorted together.
pub fn resistance_to_set(net: &Network, source: u32, ground: &[u32], cfg: &SolverConfig) -> Result<f64> {
    net.check(source)?;
    if ground.is_empty() {
        return Err(Error::InvalidParameter("ground set is empty".into()));
    }
    let mut merged = vec![u32::MAX; net.n];
    for &g in ground {
        net.check(g)?;
        if g == source {
            return Ok(0.0);
        }
        merged[g as usize] = 0;
    }
    // Vertex 0 of the collapsed network is the shorted ground set.
    let mut next = 1u32;
    for slot in merged.iter_mut() {
        if *slot == u32::MAX {
            *slot = next;
            next += 1;
        }
    }
    let edges = net
        .edges
        .iter()
        .map(|&(a, b, c)| (merged[a as usize], merged[b as usize], c))
        .filter(|&(a, b, _)| a != b)
        .collect();
    let collapsed = Network::new(next as usize, edges);
    Ok(effective_resistances(&collapsed, 0, &[merged[source as usize]], cfg)?[0])
}

/// Largest network accepted by [`exact_resistance`].
pub const EXACT_CAP: usize = 64;

/// Exact effective resistance over the rationals by Gaussian elimination on
/// the grounded Laplacian. Meant for small fixtures.
pub fn exact_resistance(n: usize, edges: &[(u32, u32)], source: u32, target: u32) -> Result<BigRational> {
    if n > EXACT_CAP {
        return Err(Error::CapExceeded { horizon: n, cap: EXACT_CAP });
    }
    if source as usize >= n || target as usize >= n {
        return Err(Error::UnknownVertex(source.max(target) as usize));
    }
    if source == target {
        return Ok(BigRational::zero());
    }
    let keep: Vec<usize> = (0..n).filter(|&v| v != source as usize).collect();
    let pos = |v: usize| keep.iter().position(|&k| k == v);
    let m = keep.len();
    let mut a = vec![vec![BigRational::zero(); m + 1]; m];
    let one = BigRational::one();
    for &(u, v) in edges {
        let (u, v) = (u as usize, v as usize);
        if u == v {
            continue;
        }
        if let Some(i) = pos(u) {
            a[i][i] += &one;
        }
        if let Some(j) = pos(v) {
            a[j][j] += &one;
        }
        if let (Some(i), Some(j)) = (pos(u), pos(v)) {
            a[i][j] -= &one;
            a[j][i] -= &one;
        }
    }
    let t = pos(target as usize).unwrap();
    a[t][m] = one.clone();
    for col in 0..m {
        let pivot = (col..m)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidParameter("network is disconnected".into()))?;
        a.swap(col, pivot);
        let inv = one.clone() / a[col][col].clone();
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone() * &inv;
                for c in col..=m {
                    let delta = factor.clone() * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    Ok(a[t][m].clone() / a[t][t].clone())
}

/// Convenience constructor for exact fixture values.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
