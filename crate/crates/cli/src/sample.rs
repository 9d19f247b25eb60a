use std::io::Write;

use annealed_walk::governing::GridPoint;
use annealed_walk::grid_walk::{GridChain, GridLandscape, StepTrace};
use annealed_walk::seed::derive_seed;
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{install_threads, persist, resolve_seed, CommonArgs, DensityArgs};
use crate::output::{create, write_histogram, write_points};
use crate::CliError;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub density: DensityArgs,
    /// Grid resolution: the walk lives on {0..n}^d.
    #[arg(long)]
    pub n: Option<usize>,
    /// Exponent K (default n).
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Steps per replica.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Start point in lattice coordinates (default the origin).
    #[arg(long, value_delimiter = ',')]
    pub start: Option<Vec<usize>>,
    /// Record replica 0 every this many steps into trace.csv.
    #[arg(long)]
    pub trace_every: Option<u64>,
    /// Keep at most this many trace rows (oldest dropped).
    #[arg(long)]
    pub trace_capacity: Option<usize>,
}

pub(crate) fn start_point(start: Option<&Vec<usize>>, d: usize, n: usize) -> Result<GridPoint, CliError> {
    match start {
        Some(c) if c.len() != d => Err(CliError::Usage(format!("--start needs {d} coordinates"))),
        Some(c) => Ok(GridPoint::new(c.clone(), n)?),
        None => Ok(GridPoint::origin(d, n)?),
    }
}

pub(crate) fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

pub fn run(args: &SampleArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    install_threads(args.common.threads)?;
    let seed = resolve_seed(args.common.seed)?;
    let n = need(args.n, "n")?;
    let steps = need(args.steps, "steps")?;
    let replicas = args.replicas.unwrap_or(1);
    let density = args.density.build()?;
    let exponent = args.exponent.unwrap_or(n as f64);
    let landscape = GridLandscape::new(density.clone(), n)?;
    let start = start_point(args.start.as_ref(), density.dim(), n)?;
    if args.trace_every.is_some() && args.common.out.is_none() {
        return Err(CliError::Usage("--trace-every needs --out".into()));
    }
    let trace = match args.trace_every {
        Some(every) => Some(StepTrace::new(every, args.trace_capacity.unwrap_or(100_000))?),
        None => None,
    };
    let started = std::time::Instant::now();
    let runs: Vec<(GridPoint, Option<String>)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut chain = GridChain::new(landscape.clone(), exponent, &start, derive_seed(seed, &[r as u64]))?;
            if r == 0 {
                if let Some(t) = &trace {
                    chain = chain.with_trace(t.clone());
                }
            }
            let end = chain.run(steps);
            let csv = chain.trace().map(|t| t.to_csv(density.dim()));
            Ok((end, csv))
        })
        .collect::<Result<_, CliError>>()?;
    eprintln!(
        "sample: {replicas} replicas x {steps} steps in {:.2}s",
        started.elapsed().as_secs_f64()
    );
    let points: Vec<GridPoint> = runs.iter().map(|r| r.0.clone()).collect();
    write_points(stdout, density.dim(), &points)?;
    if let Some(dir) = &args.common.out {
        let mut resolved = args.clone();
        resolved.common.seed = Some(seed);
        persist(Some(dir), "sample", &resolved)?;
        write_points(&mut create(dir, "samples.csv")?, density.dim(), &points)?;
        let tv = write_histogram(&mut create(dir, "histogram.csv")?, &landscape, exponent, &points)?;
        if let Some(tv) = tv {
            eprintln!("sample: TV(empirical, exact) = {tv:.4}");
        }
        if let Some(csv) = runs.first().and_then(|r| r.1.clone()) {
            std::fs::write(dir.join("trace.csv"), csv)?;
        }
    }
    Ok(())
}
