//! Annealing schedules: a fixed-`K` stage followed by a finish at `f^n`, the
//! coarse-to-fine variant, and the adaptive search over `K`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::governing::{log_peak_ratio, GoverningFunction, GridPoint, Lattice};
use crate::graph_walk::{GraphChain, RegularGraph, VertexDensity};
use crate::grid_walk::{GridChain, GridLandscape};
use crate::seed::derive_seed;
use crate::{Error, Result};

/// `ceil(5 d K f(c)^K n^2 log(48 f(c) / delta))` as a real number, evaluated in
/// log domain. `log_fc` is `log(max f / min f)`.
pub fn t0_bound(d: usize, exponent: f64, log_fc: f64, delta: f64, n: usize) -> Result<f64> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidParameter("d and n must be positive".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {delta}")));
    }
    if !(exponent >= 0.0) || !exponent.is_finite() || !(log_fc >= 0.0) || !log_fc.is_finite() {
        return Err(Error::InvalidParameter("exponent and log f(c) must be finite and >= 0".into()));
    }
    if exponent == 0.0 {
        return Ok(0.0);
    }
    let log_factor = 48f64.ln() + log_fc - delta.ln();
    let log_t = 5f64.ln()
        + (d as f64).ln()
        + exponent.ln()
        + exponent * log_fc
        + 2.0 * (n as f64).ln()
        + log_factor.ln();
    let t = log_t.exp();
    if !t.is_finite() {
        return Err(Error::Overflow(
            "first-stage length; use the coarse-fine preset instead".into(),
        ));
    }
    Ok(t.ceil())
}

/// [`t0_bound`] as a step count.
pub fn t0_steps(d: usize, exponent: f64, log_fc: f64, delta: f64, n: usize) -> Result<u64> {
    let t = t0_bound(d, exponent, log_fc, delta, n)?;
    if t >= u64::MAX as f64 {
        return Err(Error::Overflow(format!(
            "first stage needs {t:e} steps; use the coarse-fine preset instead"
        )));
    }
    Ok(t as u64)
}

/// `5 d K^3 f(c)^K log(16 f(c) / K)`, or `None` when the logarithm is not positive.
pub fn coarse_stage_bound(d: usize, exponent: f64, log_fc: f64) -> Option<f64> {
    let log_term = 16f64.ln() + log_fc - exponent.ln();
    if !(log_term > 0.0) {
        return None;
    }
    Some(5.0 * d as f64 * exponent.powi(3) * (exponent * log_fc).exp() * log_term)
}

/// Lower bound on `K` for a density that is smooth at its maximum `c`, with
/// `f(a)` the best competing local maximum:
/// `(1/2) (log(-f''(c)) - log(7 eps delta^2)) / (log f(c) - log f(a))`.
pub fn k_estimate_smooth(f_c: f64, f_a: f64, f_second: f64, eps: f64, delta: f64) -> Result<f64> {
    if !(f_c > f_a) || !(f_a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need f(c) > f(a) > 0, got f(c)={f_c}, f(a)={f_a}"
        )));
    }
    if !(f_second < 0.0) {
        return Err(Error::InvalidParameter("f''(c) must be negative".into()));
    }
    if !(eps > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParameter("eps and delta must be positive".into()));
    }
    Ok(0.5 * ((-f_second).ln() - (7.0 * eps * delta * delta).ln()) / (f_c.ln() - f_a.ln()))
}

/// `ceil(q n log n)`.
pub fn finish_steps(n: usize, q_finish: f64) -> u64 {
    let n = n as f64;
    (q_finish * n * n.ln()).ceil().max(1.0) as u64
}

/// One stage: exponent `K` on `B_N^d` for `T` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealingStage {
    #[serde(rename = "K")]
    pub exponent: f64,
    #[serde(rename = "N")]
    pub resolution: usize,
    #[serde(rename = "T")]
    pub steps: u64,
}

/// Ordered stages run as one chain; the state is rounded onto each new grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub stages: Vec<AnnealingStage>,
}

impl AnnealingSchedule {
    pub fn new(stages: Vec<AnnealingStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidParameter("schedule has no stages".into()));
        }
        for (i, s) in stages.iter().enumerate() {
            if s.steps == 0 || s.resolution == 0 || !s.exponent.is_finite() || s.exponent < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "stage {i} needs T >= 1, N >= 1 and a finite K >= 0"
                )));
            }
        }
        Ok(Self { stages })
    }

    pub fn total_steps(&self) -> u64 {
        self.stages.iter().map(|s| s.steps).sum()
    }

    /// `K` on `B_n` for `t0` steps, then `f^n` for `ceil(q n log n)` steps.
    pub fn two_stage(n: usize, exponent: f64, t0: u64, q_finish: f64) -> Result<Self> {
        let mut stages = Vec::new();
        if t0 > 0 {
            stages.push(AnnealingStage {
                exponent,
                resolution: n,
                steps: t0,
            });
        }
        stages.push(AnnealingStage {
            exponent: n as f64,
            resolution: n,
            steps: finish_steps(n, q_finish),
        });
        Self::new(stages)
    }

    /// Two stages with the first length from [`t0_steps`].
    pub fn from_t0_bound(
        density: &GoverningFunction,
        n: usize,
        exponent: f64,
        delta: f64,
        q_finish: f64,
    ) -> Result<Self> {
        let d = density.dim();
        let log_fc = log_peak_ratio(density.as_ref(), Lattice::new(d, n))?;
        let t0 = t0_steps(d, exponent, log_fc, delta, n)?;
        Self::two_stage(n, exponent, t0, q_finish)
    }

    /// First stage on `B_K^d` for `min(T0, 5 d K^3 f(c)^K log(16 f(c)/K))` steps,
    /// then `f^n` on `B_n^d`.
    pub fn coarse_to_fine(
        density: &GoverningFunction,
        n: usize,
        exponent: f64,
        delta: f64,
        q_finish: f64,
    ) -> Result<Self> {
        if exponent > n as f64 {
            return Err(Error::InvalidParameter("coarse grid needs K <= n".into()));
        }
        let d = density.dim();
        let log_fc = log_peak_ratio(density.as_ref(), Lattice::new(d, n))?;
        let t0 = t0_bound(d, exponent, log_fc, delta, n)?;
        let coarse = coarse_stage_bound(d, exponent, log_fc).map_or(t0, |c| c.ceil().min(t0));
        if coarse >= u64::MAX as f64 {
            return Err(Error::Overflow(format!("coarse stage needs {coarse:e} steps")));
        }
        let resolution = (exponent.round() as usize).clamp(1, n);
        Self::new(vec![
            AnnealingStage {
                exponent,
                resolution,
                steps: (coarse as u64).max(1),
            },
            AnnealingStage {
                exponent: n as f64,
                resolution: n,
                steps: finish_steps(n, q_finish),
            },
        ])
    }

    /// `K` on `B_K^d` for `ceil(K^2 b^K)` steps, then `f^n` for `ceil(q n log n)`.
    pub fn coarse_geometric(n: usize, exponent: usize, base: f64, q_finish: f64) -> Result<Self> {
        if exponent == 0 || exponent > n {
            return Err(Error::InvalidParameter(format!("need 1 <= K <= n, got K={exponent}")));
        }
        let k = exponent as f64;
        Self::new(vec![
            AnnealingStage {
                exponent: k,
                resolution: exponent,
                steps: (k * k * base.powf(k)).ceil() as u64,
            },
            AnnealingStage {
                exponent: n as f64,
                resolution: n,
                steps: finish_steps(n, q_finish),
            },
        ])
    }

    /// One chain through `K` on `B_K^d` for `ceil(K^2 b^K)` steps for each listed
    /// `K` in turn, then `f^n` for `ceil(q n log n)`.
    pub fn coarse_geometric_ladder(n: usize, exponents: &[usize], base: f64, q_finish: f64) -> Result<Self> {
        let mut stages = Vec::with_capacity(exponents.len() + 1);
        for &exponent in exponents {
            let single = Self::coarse_geometric(n, exponent, base, q_finish)?;
            stages.push(single.stages[0]);
        }
        stages.push(AnnealingStage {
            exponent: n as f64,
            resolution: n,
            steps: finish_steps(n, q_finish),
        });
        Self::new(stages)
    }
}

/// Token-step accounting for the Ising experiment over several `K`:
/// `replicas * (sum_K K^2 b^K + n log n)`.
pub fn coarse_geometric_budget(n: usize, exponents: &[usize], base: f64, replicas: usize) -> f64 {
    let coarse: f64 = exponents
        .iter()
        .map(|&k| (k * k) as f64 * base.powf(k as f64))
        .sum();
    let nf = n as f64;
    replicas as f64 * (coarse + nf * nf.ln())
}

/// What happened in one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageLog {
    pub stage: usize,
    pub exponent: f64,
    pub resolution: usize,
    pub steps: u64,
    pub end_state: GridPoint,
}

/// Landscapes per resolution, shared by all replicas of a schedule.
#[derive(Debug, Clone)]
pub struct LandscapeCache {
    density: GoverningFunction,
    by_resolution: BTreeMap<usize, GridLandscape>,
}

impl LandscapeCache {
    pub fn new(density: GoverningFunction, schedule: &AnnealingSchedule) -> Result<Self> {
        let mut by_resolution = BTreeMap::new();
        for s in &schedule.stages {
            if let std::collections::btree_map::Entry::Vacant(e) = by_resolution.entry(s.resolution) {
                e.insert(GridLandscape::new(density.clone(), s.resolution)?);
            }
        }
        Ok(Self {
            density,
            by_resolution,
        })
    }

    pub fn get(&self, resolution: usize) -> Result<GridLandscape> {
        match self.by_resolution.get(&resolution) {
            Some(l) => Ok(l.clone()),
            None => GridLandscape::new(self.density.clone(), resolution),
        }
    }
}

/// Runs a schedule as one chain from `start` (rounded onto the first grid).
pub fn run_schedule(
    cache: &LandscapeCache,
    schedule: &AnnealingSchedule,
    start: &GridPoint,
    seed: u64,
) -> Result<(GridPoint, Vec<StageLog>)> {
    let first = schedule.stages[0];
    let landscape = cache.get(first.resolution)?;
    let start = start.rescale(first.resolution)?;
    let mut chain = GridChain::new(landscape, first.exponent, &start, seed)?;
    let mut log = Vec::with_capacity(schedule.stages.len());
    for (i, stage) in schedule.stages.iter().enumerate() {
        if i > 0 {
            chain.set_exponent(stage.exponent)?;
            if stage.resolution != chain.landscape().n() {
                chain.switch_landscape(cache.get(stage.resolution)?)?;
            }
        }
        let end_state = chain.run(stage.steps);
        log.push(StageLog {
            stage: i,
            exponent: stage.exponent,
            resolution: stage.resolution,
            steps: stage.steps,
            end_state,
        });
    }
    Ok((chain.state(), log))
}

/// Independent replicas; replica `r` uses `derive_seed(seed, [r])`.
pub fn run_schedule_replicas(
    density: GoverningFunction,
    schedule: &AnnealingSchedule,
    start: &GridPoint,
    seed: u64,
    replicas: usize,
) -> Result<Vec<GridPoint>> {
    let cache = LandscapeCache::new(density, schedule)?;
    (0..replicas)
        .into_par_iter()
        .map(|r| run_schedule(&cache, schedule, start, derive_seed(seed, &[r as u64])).map(|x| x.0))
        .collect()
}

/// `f^K` on `B_n^d` for `t0` steps from `start`, then `f^n` for `ceil(q n log n)` steps.
pub fn run_two_stage(
    density: GoverningFunction,
    n: usize,
    exponent: f64,
    t0: u64,
    q_finish: f64,
    start: &GridPoint,
    seed: u64,
) -> Result<GridPoint> {
    let schedule = AnnealingSchedule::two_stage(n, exponent, t0, q_finish)?;
    let cache = LandscapeCache::new(density, &schedule)?;
    Ok(run_schedule(&cache, &schedule, start, seed)?.0)
}

/// Coarse stage on `B_K^d`, then `f^n` on `B_n^d`.
pub fn run_coarse_to_fine(
    density: GoverningFunction,
    n: usize,
    exponent: f64,
    delta: f64,
    q_finish: f64,
    start: &GridPoint,
    seed: u64,
) -> Result<GridPoint> {
    let schedule = AnnealingSchedule::coarse_to_fine(&density, n, exponent, delta, q_finish)?;
    let cache = LandscapeCache::new(density, &schedule)?;
    Ok(run_schedule(&cache, &schedule, start, seed)?.0)
}

/// How many steps each sample gets at exponent `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum BudgetRule {
    Fixed { steps: u64 },
    /// `ceil(scale * exp(q K))` with `q = log Q` for a known bound `Q` on `f`.
    KnownBound { scale: f64, q: f64 },
    /// As `KnownBound` with `Q` replaced by `K`, i.e. `ceil(scale * K^K)`.
    Escalating { scale: f64 },
}

impl BudgetRule {
    pub fn steps(&self, exponent: f64) -> Result<u64> {
        let raw = match *self {
            BudgetRule::Fixed { steps } => return Ok(steps.max(1)),
            BudgetRule::KnownBound { scale, q } => scale * (q * exponent).exp(),
            BudgetRule::Escalating { scale } => scale * exponent.max(1.0).powf(exponent),
        };
        if !raw.is_finite() || raw >= u64::MAX as f64 {
            return Err(Error::Overflow(format!("per-sample budget at K={exponent}")));
        }
        Ok((raw.ceil() as u64).max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    /// Samples per exponent.
    pub samples: usize,
    /// Stop once one cell holds at least this fraction of the samples.
    pub fraction: f64,
    pub budget: BudgetRule,
    /// Exponents tried in order.
    pub exponents: Vec<f64>,
    /// Box case: cells per axis of the partition of `[0,1]^d`.
    pub cells_per_axis: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            fraction: 0.8,
            budget: BudgetRule::Escalating { scale: 1.0 },
            exponents: (1..=20).map(f64::from).collect(),
            cells_per_axis: 5,
        }
    }
}

impl AdaptiveConfig {
    fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.5 && self.fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "aggregation fraction must lie in (1/2, 1], got {}",
                self.fraction
            )));
        }
        if self.samples == 0 || self.exponents.is_empty() || self.cells_per_axis == 0 {
            return Err(Error::InvalidParameter(
                "need samples, exponents and a non-empty partition".into(),
            ));
        }
        Ok(())
    }
}

/// Where the adaptive search samples.
#[derive(Debug, Clone)]
pub enum SearchTarget {
    Graph {
        graph: Arc<RegularGraph>,
        density: VertexDensity,
        start: usize,
    },
    Box {
        density: GoverningFunction,
        n: usize,
        /// Run exponent `K` on `B_K^d` instead of `B_n^d`.
        coarse: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRound {
    pub exponent: f64,
    pub steps_per_sample: u64,
    /// Largest share of samples in one cell.
    pub top_fraction: f64,
    pub top_cell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveOutcome {
    pub exponent: f64,
    pub converged: bool,
    /// Cell (graph: vertex) of each sample in the last round.
    pub cells: Vec<usize>,
    pub rounds: Vec<AdaptiveRound>,
    pub total_steps: u64,
}

fn box_cell(point: &GridPoint, cells: usize) -> usize {
    point.to_unit().iter().rev().fold(0, |acc, &x| {
        acc * cells + ((x * cells as f64) as usize).min(cells - 1)
    })
}

/// Tries `K` in order until one cell (graph: one vertex) holds the configured
/// fraction of the samples.
pub fn adaptive_k_search(target: &SearchTarget, config: &AdaptiveConfig, seed: u64) -> Result<AdaptiveOutcome> {
    config.validate()?;
    let mut rounds = Vec::new();
    let mut total_steps = 0u64;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for (ki, &k) in config.exponents.iter().enumerate() {
        let steps = config.budget.steps(k)?;
        let seeds: Vec<u64> = (0..config.samples)
            .map(|s| derive_seed(seed, &[ki as u64, s as u64]))
            .collect();
        let cells: Vec<usize> = match target {
            SearchTarget::Graph {
                graph,
                density,
                start,
            } => seeds
                .par_iter()
                .map(|&s| {
                    GraphChain::new(graph.clone(), density, k, *start, s).map(|mut c| c.run(steps))
                })
                .collect::<Result<_>>()?,
            SearchTarget::Box { density, n, coarse } => {
                let res = if *coarse {
                    (k.round() as usize).clamp(1, *n)
                } else {
                    *n
                };
                let landscape = GridLandscape::new(density.clone(), res)?;
                let origin = GridPoint::origin(density.dim(), res)?;
                seeds
                    .par_iter()
                    .map(|&s| {
                        GridChain::new(landscape.clone(), k, &origin, s)
                            .map(|mut c| box_cell(&c.run(steps), config.cells_per_axis))
                    })
                    .collect::<Result<_>>()?
            }
        };
        total_steps = total_steps.saturating_add(steps.saturating_mul(config.samples as u64));
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &cells {
            *counts.entry(c).or_default() += 1;
        }
        let (&top_cell, &top) = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .expect("at least one sample");
        let top_fraction = top as f64 / config.samples as f64;
        rounds.push(AdaptiveRound {
            exponent: k,
            steps_per_sample: steps,
            top_fraction,
            top_cell,
        });
        if top_fraction >= config.fraction {
            return Ok(AdaptiveOutcome {
                exponent: k,
                converged: true,
                cells,
                rounds,
                total_steps,
            });
        }
        if best.as_ref().is_none_or(|(f, _)| top_fraction > *f) {
            best = Some((top_fraction, cells));
        }
    }
    let last = rounds.last().expect("at least one round");
    Ok(AdaptiveOutcome {
        exponent: last.exponent,
        converged: false,
        cells: best.map(|b| b.1).unwrap_or_default(),
        rounds,
        total_steps,
    })
}

/// Cost of stopping at `k_hat` with `exp(qK)` budgets and `K = 1, 2, ...`:
/// `scale * samples * sum_{K <= k_hat} exp(qK)`.
pub fn adaptive_cost_exact(scale: f64, samples: usize, q: f64, k_hat: usize) -> f64 {
    scale * samples as f64 * (1..=k_hat).map(|k| (q * k as f64).exp()).sum::<f64>()
}

/// The closed form `scale * samples * exp(q k_hat) / q`.
pub fn adaptive_cost_closed_form(scale: f64, samples: usize, q: f64, k_hat: usize) -> f64 {
    scale * samples as f64 * (q * k_hat as f64).exp() / q
}

/// Geometric-series bound `scale * samples * exp(q k_hat) / (1 - exp(-q))`,
/// which always dominates [`adaptive_cost_exact`].
pub fn adaptive_cost_geometric(scale: f64, samples: usize, q: f64, k_hat: usize) -> f64 {
    scale * samples as f64 * (q * k_hat as f64).exp() / (1.0 - (-q).exp())
}
