use std::io::Write;
use std::path::PathBuf;

use annealed_walk::diagnostics::{hitting_time_exact, ReportRow, DENSE_CAP};
use annealed_walk::graph_walk::{
    graph_kernel, hitting_time_bound, k_dominance, k_exact, k_sufficient, run_length_bound_for,
    schedule_from_hitting_bound, GraphFile, RegularGraph, VertexDensity,
};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::config::{install_threads, persist, CommonArgs};
use crate::output::{create, finish_report};
use crate::CliError;

/// Exact end-of-run masses are computed when `|V| * T * nnz` stays below this.
pub const EVOLVE_WORK_CAP: f64 = 2e8;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Graph file: `vertices N` then `u v weight` lines.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Vertex density file: `v logf` lines.
    #[arg(long)]
    pub density: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Exponent for the hitting bound and run length (default: the dominance exponent).
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Resistance constant in the hitting bound (default: largest unit resistance).
    #[arg(long)]
    pub r0: Option<f64>,
    /// Also report T for this externally supplied hitting-time bound.
    #[arg(long)]
    pub hitting_bound: Option<f64>,
}

fn load(args: &BoundsArgs) -> Result<(RegularGraph, VertexDensity), CliError> {
    let graph_path = args.graph.as_ref().ok_or_else(|| CliError::Usage("missing --graph".into()))?;
    let density_path = args.density.as_ref().ok_or_else(|| CliError::Usage("missing --density".into()))?;
    let file = GraphFile::from_file(graph_path).map_err(|e| CliError::Usage(format!("{}: {e}", graph_path.display())))?;
    let graph = file.regular_graph()?;
    let density = VertexDensity::from_file(density_path, graph.vertices())
        .map_err(|e| CliError::Usage(format!("{}: {e}", density_path.display())))?;
    Ok((graph, density))
}

/// All report rows for one graph and density.
pub fn report(args: &BoundsArgs) -> Result<Vec<ReportRow>, CliError> {
    let (graph, density) = load(args)?;
    let eps = args.eps.unwrap_or(0.05);
    let nan = f64::NAN;
    let mut rows = Vec::new();
    let gap = density.f1() - density.f2();
    let unique = density.unique_max();
    rows.push(ReportRow::new("gap", "f1-f2", gap, 0.0, unique && gap > 0.0));
    let r0 = match args.r0 {
        Some(r) => r,
        None => graph.max_unit_resistance()?,
    };
    rows.push(ReportRow::new("r0", "max unit resistance", r0, nan, true));
    let inst = format!("eps={eps}");
    if !unique || !(gap > 0.0) {
        for q in ["k_sufficient", "k_dominance", "k_exact"] {
            rows.push(ReportRow::new(q, "undefined: no unique maximum", nan, nan, false));
        }
    } else {
        let ks = k_sufficient(&density, eps)?;
        let kd = k_dominance(&density, eps)?;
        let ke = k_exact(&density, eps)?;
        rows.push(ReportRow::new("k_sufficient", &inst, ks, nan, true));
        rows.push(ReportRow::new("k_dominance", &inst, kd, nan, true));
        rows.push(ReportRow::new("k_exact", &inst, ke, ks, ke <= ks * (1.0 + 1e-12)));
    }
    let exponent = match args.exponent {
        Some(k) => Some(k),
        None if unique && gap > 0.0 => Some(k_dominance(&density, eps)?),
        None => None,
    };
    if let Some(k) = exponent {
        let v1 = density.argmax();
        let kinst = format!("K={k}");
        let mass = density.powered_law(k)[v1];
        rows.push(ReportRow::new("stationary_mass_max", &kinst, mass, 1.0 - eps, mass >= 1.0 - eps));
        let bound = hitting_time_bound(&graph, &density, k, v1, r0)?;
        rows.push(ReportRow::new("hitting_time_bound", &kinst, bound, nan, true));
        let steps = schedule_from_hitting_bound(bound, eps)?;
        rows.push(ReportRow::new("schedule_steps", format!("T=bound/eps,{kinst}"), steps.ceil(), nan, true));
        if graph.vertices() <= DENSE_CAP {
            let chain = graph_kernel(&graph, &density, k)?;
            let h = hitting_time_exact(&chain, v1)?;
            let worst = h.iter().copied().fold(0.0, f64::max);
            rows.push(ReportRow::new(
                "hitting_time_exact_max",
                &kinst,
                worst,
                bound,
                worst <= bound,
            ));
            let nnz: usize = chain.rows().iter().map(Vec::len).sum();
            let t = steps.ceil();
            if (graph.vertices() as f64) * t * nnz as f64 <= EVOLVE_WORK_CAP {
                let worst_mass = (0..graph.vertices())
                    .map(|s| {
                        let mut mu = vec![0.0; graph.vertices()];
                        mu[s] = 1.0;
                        chain.evolve(&mu, t as usize)[v1]
                    })
                    .fold(1.0, f64::min);
                rows.push(ReportRow::new(
                    "end_mass_exact_min",
                    format!("T={t},{kinst}"),
                    worst_mass,
                    1.0 - 2.0 * eps,
                    worst_mass >= 1.0 - 2.0 * eps,
                ));
            }
        }
    }
    if let Some(b) = args.hitting_bound {
        let steps = schedule_from_hitting_bound(b, eps)?;
        rows.push(ReportRow::new("schedule_steps_supplied", format!("T=bound/eps,bound={b}"), steps.ceil(), nan, true));
    }
    let r_g = graph.max_unit_resistance()?;
    let t4 = run_length_bound_for(&graph, &density, eps, r_g)?;
    rows.push(ReportRow::new("run_length_bound", &inst, t4, nan, t4.is_finite()));
    Ok(rows)
}

pub fn run(args: &BoundsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    install_threads(args.common.threads)?;
    let rows = report(args)?;
    if let Some(dir) = &args.common.out {
        persist(Some(dir), "bounds", args)?;
        let mut w = create(dir, "report.csv")?;
        annealed_walk::diagnostics::write_report(&mut w, &rows)?;
    }
    finish_report(stdout, &rows)
}
