//! Browser bindings. Each operation takes plain numbers and returns JSON,
//! so the page needs no serializer of its own. The `*_json` functions are
//! the native entry points; the exported wrappers only convert errors.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rangewalk::cut_structure::{count_cut_times, find_cut_times};
use rangewalk::lattice_walk::{generate_trajectory, MAX_DIMENSION};
use rangewalk::network::SolverConfig;
use rangewalk::range_graph::{build_range_graph, mu_measure_prefix};
use rangewalk::range_walker::heat_kernel_estimate;
use rangewalk::resistance_metrics::metric_profile;
use rangewalk::scaling_lab::walk_time;
use rangewalk::stats::gaussian_profile;

/// Largest trajectory a page request may build.
pub const MAX_STEPS: usize = 200_000;
pub const MAX_KERNEL_N: usize = 400;
pub const MAX_REPLICAS: u64 = 20_000;

type Out = Result<String, String>;

fn check(dimension: usize, steps: usize) -> Result<(), String> {
    if dimension == 0 || dimension > MAX_DIMENSION {
        return Err(format!("dimension must be in 1..={MAX_DIMENSION}"));
    }
    if steps == 0 || steps > MAX_STEPS {
        return Err(format!("steps must be in 1..={MAX_STEPS}"));
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Out {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Projection {
    x: Vec<i32>,
    y: Vec<i32>,
    cuts: Vec<u32>,
}

/// First two coordinates of `S_0..S_steps` and the cut times.
pub fn walk_projection_json(dimension: usize, steps: usize, seed: u64) -> Out {
    check(dimension, steps)?;
    let g = build_range_graph(&generate_trajectory(dimension, steps, seed).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let cuts = find_cut_times(&g);
    let (mut x, mut y) = (Vec::with_capacity(steps + 1), Vec::with_capacity(steps + 1));
    for k in 0..=steps {
        let c = g.coords(g.vertex_at(k));
        x.push(c[0]);
        y.push(c.get(1).copied().unwrap_or(0));
    }
    json(&Projection { x, y, cuts: cuts.times().to_vec() })
}

#[derive(Serialize)]
struct Profile {
    n: Vec<usize>,
    resistance: Vec<f64>,
    distance: Vec<u64>,
    cut_count: Vec<usize>,
}

/// `R(0, S_n)`, `d(0, S_n)` and the cut count up to `n` on `points`
/// log-spaced times.
pub fn metric_profile_json(dimension: usize, steps: usize, seed: u64, points: usize) -> Out {
    check(dimension, steps)?;
    let points = points.clamp(2, 200);
    let mut grid: Vec<usize> = (0..points)
        .map(|i| (steps as f64).powf(i as f64 / (points - 1) as f64).round() as usize)
        .collect();
    grid.dedup();
    let g = build_range_graph(&generate_trajectory(dimension, steps, seed).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let cuts = find_cut_times(&g);
    let p = metric_profile(&g, &cuts, &grid, &SolverConfig::default()).map_err(|e| e.to_string())?;
    json(&Profile {
        cut_count: grid.iter().map(|&n| count_cut_times(&cuts, n).count).collect(),
        n: grid,
        resistance: p.resistance,
        distance: p.distance,
    })
}

#[derive(Serialize)]
struct Kernel {
    x: Vec<f64>,
    estimate: Vec<f64>,
    stderr: Vec<f64>,
    limit: Vec<f64>,
    lambda: f64,
    psi: f64,
    steps: u64,
}

/// `lambda n p_n(0, S_{floor(n x)})` at walk time `n^2 psi(n)` for one
/// environment, next to the limit profile at `t = 1`. Lambda and psi are
/// read off the same environment.
pub fn heat_kernel_json(dimension: usize, n: usize, replicas: u64, seed: u64) -> Out {
    if !(2..=MAX_KERNEL_N).contains(&n) {
        return Err(format!("n must be in 2..={MAX_KERNEL_N}"));
    }
    if replicas == 0 || replicas > MAX_REPLICAS {
        return Err(format!("replicas must be in 1..={MAX_REPLICAS}"));
    }
    let horizon = 8 * n;
    check(dimension, horizon)?;
    let g = build_range_graph(&generate_trajectory(dimension, horizon, seed).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let cuts = find_cut_times(&g);
    let lambda = mu_measure_prefix(&g, horizon).map_err(|e| e.to_string())? as f64 / horizon as f64;
    let r = metric_profile(&g, &cuts, &[n], &SolverConfig::default()).map_err(|e| e.to_string())?.resistance[0];
    let psi = lambda * r / n as f64;
    let steps = walk_time(1.0, n as f64, psi);
    let x: Vec<f64> = (0..=12).map(|i| i as f64 * 0.25).collect();
    let targets: Vec<u32> = x.iter().map(|&x| g.vertex_at((n as f64 * x).floor() as usize)).collect();
    let est = heat_kernel_estimate(&g, steps, &targets, replicas, seed ^ 0x9e37_79b9).map_err(|e| e.to_string())?;
    let scale = lambda * n as f64;
    json(&Kernel {
        limit: x.iter().map(|&x| gaussian_profile(x, 1.0)).collect(),
        x,
        estimate: est.values.iter().map(|v| v * scale).collect(),
        stderr: est.stderr.iter().map(|v| v * scale).collect(),
        lambda,
        psi,
        steps,
    })
}

fn js(r: Out) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = walkProjection)]
pub fn walk_projection(dimension: u32, steps: u32, seed: u32) -> Result<String, JsError> {
    js(walk_projection_json(dimension as usize, steps as usize, seed as u64))
}

#[wasm_bindgen(js_name = metricProfile)]
pub fn metric_profile_js(dimension: u32, steps: u32, seed: u32, points: u32) -> Result<String, JsError> {
    js(metric_profile_json(dimension as usize, steps as usize, seed as u64, points as usize))
}

#[wasm_bindgen(js_name = heatKernel)]
pub fn heat_kernel(dimension: u32, n: u32, replicas: u32, seed: u32) -> Result<String, JsError> {
    js(heat_kernel_json(dimension as usize, n as usize, replicas as u64, seed as u64))
}
