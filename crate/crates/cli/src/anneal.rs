use std::io::Write;
use std::path::PathBuf;

use annealed_walk::annealing::{
    adaptive_k_search, run_schedule, AdaptiveConfig, AdaptiveOutcome, AnnealingSchedule, AnnealingStage, BudgetRule,
    LandscapeCache, SearchTarget,
};
use annealed_walk::governing::{GoverningFunction, GridPoint};
use annealed_walk::seed::derive_seed;
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{install_threads, persist, resolve_seed, CommonArgs, DensityArgs};
use crate::output::{create, write_histogram, write_points};
use crate::sample::{need, start_point};
use crate::CliError;

pub const PRESETS: [&str; 4] = ["theorem-main", "coarse-fine", "paper-ising", "adaptive"];

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub density: DensityArgs,
    /// Schedule file with `density`, `d`, `n`, and `stages` or `preset`.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// theorem-main | coarse-fine | paper-ising | adaptive
    #[arg(long)]
    pub preset: Option<String>,
    /// Explicit stages (config or schedule file only).
    #[arg(skip)]
    pub stages: Option<Vec<AnnealingStage>>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension check against the density.
    #[arg(long)]
    pub d: Option<usize>,
    /// First-stage exponent K.
    #[arg(long)]
    pub exponent: Option<f64>,
    /// paper-ising and adaptive: largest K tried (K = 2, 4, ..., k_max).
    #[arg(long)]
    pub k_max: Option<usize>,
    /// paper-ising: coarse stage length K^2 base^K.
    #[arg(long)]
    pub base: Option<f64>,
    /// Finish stage length q n log n.
    #[arg(long)]
    pub q_finish: Option<f64>,
    /// Failure probability in the first-stage bound.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub start: Option<Vec<usize>>,
    /// adaptive: samples per exponent.
    #[arg(long)]
    pub samples: Option<usize>,
    /// adaptive: share of samples one cell must hold.
    #[arg(long)]
    pub fraction: Option<f64>,
    /// adaptive: per-sample budget scale * base^K.
    #[arg(long)]
    pub budget_scale: Option<f64>,
    /// adaptive: cells per axis of the partition of [0,1]^d.
    #[arg(long)]
    pub cells_per_axis: Option<usize>,
}

/// Contents of a `--schedule` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScheduleFile {
    density: Option<DensityArgs>,
    d: Option<usize>,
    n: Option<usize>,
    stages: Option<Vec<AnnealingStage>>,
    preset: Option<String>,
    exponent: Option<f64>,
    k_max: Option<usize>,
    base: Option<f64>,
    q_finish: Option<f64>,
    delta: Option<f64>,
}

impl AnnealArgs {
    /// Fills fields left unset by flags and config from the schedule file.
    fn with_schedule_file(&self) -> Result<Self, CliError> {
        let mut a = self.clone();
        let Some(path) = &self.schedule else { return Ok(a) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read schedule {}: {e}", path.display())))?;
        let file: ScheduleFile =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad schedule file: {e}")))?;
        if a.density.density.is_none() {
            if let Some(dens) = file.density {
                a.density = dens;
            }
        }
        a.d = a.d.or(file.d);
        a.n = a.n.or(file.n);
        a.stages = a.stages.or(file.stages);
        a.preset = a.preset.or(file.preset);
        a.exponent = a.exponent.or(file.exponent);
        a.k_max = a.k_max.or(file.k_max);
        a.base = a.base.or(file.base);
        a.q_finish = a.q_finish.or(file.q_finish);
        a.delta = a.delta.or(file.delta);
        Ok(a)
    }
}

fn even_ladder(k_max: usize) -> Vec<usize> {
    (2..=k_max).step_by(2).collect()
}

struct Plan {
    schedule: AnnealingSchedule,
    adaptive: Option<AdaptiveOutcome>,
}

fn plan(a: &AnnealArgs, density: &GoverningFunction, n: usize, seed: u64) -> Result<Plan, CliError> {
    let q = a.q_finish.unwrap_or(1.0);
    let delta = a.delta.unwrap_or(0.1);
    let base = a.base.unwrap_or(1.6);
    let k_max = a.k_max.unwrap_or(12);
    let plain = |schedule| Plan {
        schedule,
        adaptive: None,
    };
    match (a.preset.as_deref(), &a.stages) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either stages or a preset, not both".into())),
        (None, Some(stages)) => Ok(plain(AnnealingSchedule::new(stages.clone())?)),
        (None, None) => Err(CliError::Usage(format!("missing --preset (one of {})", PRESETS.join(", ")))),
        (Some("theorem-main"), None) => Ok(plain(AnnealingSchedule::from_t0_bound(
            density,
            n,
            need(a.exponent, "exponent")?,
            delta,
            q,
        )?)),
        (Some("coarse-fine"), None) => Ok(plain(AnnealingSchedule::coarse_to_fine(
            density,
            n,
            need(a.exponent, "exponent")?,
            delta,
            q,
        )?)),
        (Some("paper-ising"), None) => {
            let schedule = match a.exponent {
                Some(k) if k.fract() != 0.0 || k < 1.0 => {
                    return Err(CliError::Usage("paper-ising needs a whole exponent".into()))
                }
                Some(k) => AnnealingSchedule::coarse_geometric(n, k as usize, base, q)?,
                None => AnnealingSchedule::coarse_geometric_ladder(n, &even_ladder(k_max), base, q)?,
            };
            Ok(plain(schedule))
        }
        (Some("adaptive"), None) => {
            let config = AdaptiveConfig {
                samples: a.samples.unwrap_or(100),
                fraction: a.fraction.unwrap_or(0.8),
                budget: BudgetRule::KnownBound {
                    scale: a.budget_scale.unwrap_or(100.0),
                    q: base.ln(),
                },
                exponents: even_ladder(k_max).into_iter().map(|k| k as f64).collect(),
                cells_per_axis: a.cells_per_axis.unwrap_or(5),
            };
            let target = SearchTarget::Box {
                density: density.clone(),
                n,
                coarse: true,
            };
            let outcome = adaptive_k_search(&target, &config, derive_seed(seed, &[u64::MAX]))?;
            let k = (outcome.exponent.round() as usize).clamp(1, n);
            Ok(Plan {
                schedule: AnnealingSchedule::coarse_geometric(n, k, base, q)?,
                adaptive: Some(outcome),
            })
        }
        (Some(other), None) => Err(CliError::Usage(format!(
            "unknown preset `{other}` (one of {})",
            PRESETS.join(", ")
        ))),
    }
}

pub fn run(args: &AnnealArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    install_threads(args.common.threads)?;
    let a = args.with_schedule_file()?;
    let seed = resolve_seed(a.common.seed)?;
    let n = need(a.n, "n")?;
    let density = a.density.build()?;
    if let Some(d) = a.d {
        if d != density.dim() {
            return Err(CliError::Usage(format!("d = {d} but the density has dimension {}", density.dim())));
        }
    }
    let replicas = a.replicas.unwrap_or(1);
    let start = start_point(a.start.as_ref(), density.dim(), n)?;
    let plan = plan(&a, &density, n, seed)?;
    let schedule = &plan.schedule;
    let cache = LandscapeCache::new(density.clone(), schedule)?;
    let started = std::time::Instant::now();
    let points: Vec<GridPoint> = (0..replicas)
        .into_par_iter()
        .map(|r| Ok(run_schedule(&cache, schedule, &start, derive_seed(seed, &[r as u64]))?.0))
        .collect::<Result<_, CliError>>()?;
    let per_replica = schedule.total_steps();
    eprintln!(
        "anneal: {} stages, {per_replica} steps per replica, {} total, {:.2}s",
        schedule.stages.len(),
        per_replica.saturating_mul(replicas as u64),
        started.elapsed().as_secs_f64()
    );
    write_points(stdout, density.dim(), &points)?;
    if let Some(dir) = &a.common.out {
        let mut resolved = a.clone();
        resolved.common.seed = Some(seed);
        resolved.schedule = None;
        resolved.preset = None;
        resolved.stages = Some(schedule.stages.clone());
        persist(Some(dir), "anneal", &resolved)?;
        write_points(&mut create(dir, "samples.csv")?, density.dim(), &points)?;
        let mut log = create(dir, "stages.csv")?;
        writeln!(log, "stage,exponent,resolution,steps,replicas,total_steps")?;
        for (i, s) in schedule.stages.iter().enumerate() {
            writeln!(
                log,
                "{i},{},{},{},{replicas},{}",
                s.exponent,
                s.resolution,
                s.steps,
                s.steps.saturating_mul(replicas as u64)
            )?;
        }
        let last = schedule.stages.last().expect("schedules are non-empty");
        let tv = write_histogram(&mut create(dir, "histogram.csv")?, &cache.get(last.resolution)?, last.exponent, &points)?;
        if let Some(tv) = tv {
            eprintln!("anneal: TV(empirical, exact at final exponent) = {tv:.4}");
        }
        if let Some(outcome) = &plan.adaptive {
            let mut w = create(dir, "adaptive.csv")?;
            writeln!(w, "exponent,steps_per_sample,top_fraction,top_cell")?;
            for r in &outcome.rounds {
                writeln!(w, "{},{},{},{}", r.exponent, r.steps_per_sample, r.top_fraction, r.top_cell)?;
            }
        }
    }
    if let Some(outcome) = &plan.adaptive {
        eprintln!(
            "anneal: adaptive search stopped at K = {} ({}converged, {} search steps)",
            outcome.exponent,
            if outcome.converged { "" } else { "not " },
            outcome.total_steps
        );
    }
    Ok(())
}
