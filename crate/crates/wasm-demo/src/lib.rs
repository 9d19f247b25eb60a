//! Browser bindings: an Ising landscape plot, an annealing run with its
//! endpoint histogram, and graph bounds for a path with user-chosen weights.
//!
//! Each export wraps a plain Rust function so the logic is testable natively.

use std::sync::Arc;

use annealed_walk::annealing::{run_schedule, AnnealingSchedule, LandscapeCache};
use annealed_walk::diagnostics::{hitting_time_exact, tv_distance};
use annealed_walk::governing::{ising_power_law, GoverningFunction, GridPoint, IsingDensity};
use annealed_walk::graph_walk::{
    graph_kernel, hitting_time_bound, k_dominance, k_exact, k_sufficient, run_length_bound_for,
    schedule_from_hitting_bound, RegularGraph, VertexDensity,
};
use annealed_walk::grid_walk::{grid_stationary, GridLandscape};
use annealed_walk::seed::derive_seed;
use wasm_bindgen::prelude::*;

/// Largest grid the page accepts; keeps a run under a second or so.
pub const MAX_N: usize = 400;
pub const MAX_REPLICAS: usize = 2000;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Normalised law proportional to `f^K` on `{0, 1/n, ..., 1}`.
pub fn landscape(alpha: f64, beta: f64, n: usize, exponent: f64) -> Result<Vec<f64>, String> {
    if n == 0 || n > MAX_N {
        return Err(format!("n must lie in 1..={MAX_N}"));
    }
    if !(exponent >= 0.0) || !exponent.is_finite() {
        return Err("exponent must be finite and non-negative".into());
    }
    let ising = IsingDensity::new(alpha, beta).map_err(err)?;
    Ok(ising_power_law(&ising, n, exponent))
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct AnnealOutcome {
    histogram: Vec<f64>,
    exact: Vec<f64>,
    tv: f64,
    steps: f64,
}

#[wasm_bindgen]
impl AnnealOutcome {
    /// Endpoint frequencies over `0..=n`.
    #[wasm_bindgen(getter)]
    pub fn histogram(&self) -> Vec<f64> {
        self.histogram.clone()
    }

    /// Stationary law at exponent `n`.
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.exact.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn tv(&self) -> f64 {
        self.tv
    }

    /// Total walk steps over all replicas.
    #[wasm_bindgen(getter)]
    pub fn steps(&self) -> f64 {
        self.steps
    }
}

/// Runs the ladder `K = 2, 4, ..., k_max` (stage length `K^2 1.6^K` on the
/// grid of resolution `K`) and a `n log n` finish at exponent `n`, starting
/// every replica at 0.
pub fn anneal(alpha: f64, beta: f64, n: usize, k_max: usize, replicas: usize, seed: u64) -> Result<AnnealOutcome, String> {
    if !(2..=MAX_N).contains(&n) {
        return Err(format!("n must lie in 2..={MAX_N}"));
    }
    if replicas == 0 || replicas > MAX_REPLICAS {
        return Err(format!("replicas must lie in 1..={MAX_REPLICAS}"));
    }
    if k_max < 2 || k_max > n.min(16) {
        return Err(format!("k_max must lie in 2..={}", n.min(16)));
    }
    let density: GoverningFunction = Arc::new(IsingDensity::new(alpha, beta).map_err(err)?);
    let ladder: Vec<usize> = (2..=k_max).step_by(2).collect();
    let schedule = AnnealingSchedule::coarse_geometric_ladder(n, &ladder, 1.6, 1.0).map_err(err)?;
    let cache = LandscapeCache::new(density.clone(), &schedule).map_err(err)?;
    let start = GridPoint::origin(1, n).map_err(err)?;
    let mut histogram = vec![0.0; n + 1];
    for r in 0..replicas {
        let (end, _) = run_schedule(&cache, &schedule, &start, derive_seed(seed, &[r as u64])).map_err(err)?;
        histogram[end.coords()[0]] += 1.0 / replicas as f64;
    }
    let exact = grid_stationary(&GridLandscape::new(density, n).map_err(err)?, n as f64).map_err(err)?;
    Ok(AnnealOutcome {
        tv: tv_distance(&histogram, &exact).map_err(err)?,
        steps: schedule.total_steps() as f64 * replicas as f64,
        histogram,
        exact,
    })
}

#[wasm_bindgen]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathBounds {
    pub k_sufficient: f64,
    pub k_dominance: f64,
    pub k_exact: f64,
    /// Exponent used for the rows below (the dominance exponent).
    pub exponent: f64,
    pub mass_at_max: f64,
    pub hitting_bound: f64,
    pub hitting_exact: f64,
    pub steps: f64,
    pub run_length: f64,
}

/// Bounds for the walk on a path whose vertex weights are `f` (positive).
pub fn path_bounds(f: &[f64], eps: f64) -> Result<PathBounds, String> {
    if f.len() < 2 || f.len() > 500 {
        return Err("need between 2 and 500 vertex weights".into());
    }
    if f.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err("vertex weights must be positive and finite".into());
    }
    let density = VertexDensity::new(f.iter().map(|v| v.ln()).collect()).map_err(err)?;
    let graph = RegularGraph::path(f.len()).map_err(err)?;
    let k = k_dominance(&density, eps).map_err(err)?;
    let target = density.argmax();
    let r0 = graph.max_unit_resistance().map_err(err)?;
    let hitting_bound = hitting_time_bound(&graph, &density, k, target, r0).map_err(err)?;
    let exact = hitting_time_exact(&graph_kernel(&graph, &density, k).map_err(err)?, target).map_err(err)?;
    Ok(PathBounds {
        k_sufficient: k_sufficient(&density, eps).map_err(err)?,
        k_dominance: k,
        k_exact: k_exact(&density, eps).map_err(err)?,
        exponent: k,
        mass_at_max: density.powered_law(k)[target],
        hitting_bound,
        hitting_exact: exact.iter().copied().fold(0.0, f64::max),
        steps: schedule_from_hitting_bound(hitting_bound, eps).map_err(err)?,
        run_length: run_length_bound_for(&graph, &density, eps, r0).map_err(err)?,
    })
}

#[wasm_bindgen]
pub fn ising_landscape(alpha: f64, beta: f64, n: usize, exponent: f64) -> Result<Vec<f64>, JsError> {
    landscape(alpha, beta, n, exponent).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn anneal_histogram(
    alpha: f64,
    beta: f64,
    n: usize,
    k_max: usize,
    replicas: usize,
    seed: u32,
) -> Result<AnnealOutcome, JsError> {
    anneal(alpha, beta, n, k_max, replicas, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn graph_bounds(f: Vec<f64>, eps: f64) -> Result<PathBounds, JsError> {
    path_bounds(&f, eps).map_err(|e| JsError::new(&e))
}
