use std::io::Write;
use std::sync::Arc;

use annealed_walk::diagnostics::{
    conductance_profile, hitting_time_exact, l2_contraction_check, mixing_time_exact,
    random_lazy_reversible, relaxation_time, return_probability_margin, scaled_profile_bound, tv_distance,
    ExactChain, ReportRow,
};
use annealed_walk::governing::{
    ising_power_law, lattice_log_f, lumped_ising_reference, GaussianBump, GoverningFunction, IsingDensity, Lattice,
};
use annealed_walk::graph_walk::{
    graph_kernel, hitting_time_bound, RegularGraph, StarNetwork, VertexDensity, WeightedNetwork,
};
use annealed_walk::grid_walk::{exact_grid_kernel, GridLandscape};
use annealed_walk::lda::{enumerate_update_kernel, Corpus, GibbsState, Hyper};
use annealed_walk::seed::{derive_seed, rng_from_seed};
use clap::Args;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{install_threads, persist, resolve_seed, CommonArgs, DensityArgs};
use crate::output::{create, finish_report};
use crate::CliError;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Optional extra grid instance checked with the same battery.
    #[command(flatten)]
    #[serde(flatten)]
    pub density: DensityArgs,
    /// Resolution of the grid instances.
    #[arg(long)]
    pub n: Option<usize>,
    /// Exponent of the extra instance (default n).
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Largest exact state space accepted.
    #[arg(long)]
    pub max_states: Option<usize>,
    /// Longest horizon for return probabilities.
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Iteration cap for exact mixing times.
    #[arg(long)]
    pub mixing_cap: Option<usize>,
    /// Add a non-lazy 2-cycle to the battery (it must fail).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub inject_non_lazy: Option<bool>,
}

/// Grid instance used in the mixing comparison.
pub struct MixingEntry {
    pub instance: String,
    pub states: usize,
    pub relaxation_time: f64,
    pub mixing_time: String,
}

struct Battery {
    rows: Vec<ReportRow>,
    mixing: Vec<MixingEntry>,
    max_states: usize,
    t_max: usize,
    mixing_cap: usize,
}

const TOL: f64 = 1e-10;

impl Battery {
    fn push(&mut self, q: &str, inst: &str, value: f64, bound: f64, pass: bool) {
        self.rows.push(ReportRow::new(q, inst, value, bound, pass));
    }

    fn check_size(&self, states: usize) -> Result<(), CliError> {
        if states > self.max_states {
            return Err(annealed_walk::Error::StateSpaceTooLarge {
                states,
                cap: self.max_states,
            }
            .into());
        }
        Ok(())
    }

    /// Stationarity, balance, laziness, spectrum, return probabilities and L2 contraction.
    fn chain_checks(&mut self, chain: &ExactChain, inst: &str) -> Result<f64, CliError> {
        self.check_size(chain.len())?;
        let residual = chain.stationarity_residual();
        self.push("stationarity_residual", inst, residual, TOL, residual < TOL);
        let balance = chain.detailed_balance_violation();
        self.push("detailed_balance", inst, balance, TOL, balance < TOL);
        let lazy = chain.min_diagonal();
        self.push("min_holding", inst, lazy, 0.5, lazy >= 0.5 - 1e-12);
        let spectrum = chain.spectrum()?;
        let min_eig = spectrum.last().copied().unwrap_or(1.0);
        self.push("min_eigenvalue", inst, min_eig, -TOL, min_eig >= -TOL);
        let margin = return_probability_margin(chain, self.t_max);
        self.push("return_probability_margin", inst, margin, -1e-12, margin >= -1e-12);
        let tau = relaxation_time(chain)?;
        self.push("relaxation_time", inst, tau, f64::NAN, true);
        let mut start = vec![0.0; chain.len()];
        start[0] = 1.0;
        for t in [1, 10, 50] {
            let ok = l2_contraction_check(chain, t, &start)?;
            self.push("l2_contraction", &format!("{inst},t={t}"), t as f64, f64::NAN, ok);
        }
        Ok(tau)
    }

    fn grid_instance(&mut self, name: &str, density: GoverningFunction, n: usize, exponent: f64) -> Result<(), CliError> {
        let landscape = GridLandscape::new(density, n)?;
        let kernel = exact_grid_kernel(&landscape, exponent, self.max_states)?;
        let inst = format!("{name},n={n},K={exponent}");
        let tau = self.chain_checks(&kernel.chain, &inst)?;
        let mix = mixing_time_exact(&kernel.chain, 0.25, self.mixing_cap)?;
        self.push("mixing_time", &inst, mix.steps() as f64, f64::NAN, true);
        self.mixing.push(MixingEntry {
            instance: inst,
            states: kernel.chain.len(),
            relaxation_time: tau,
            mixing_time: mix.to_string(),
        });
        Ok(())
    }

    fn conductance(&mut self, d: usize, n: usize, density: GoverningFunction, exponent: f64) -> Result<(), CliError> {
        let landscape = GridLandscape::new(density.clone(), n)?;
        let governed = exact_grid_kernel(&landscape, exponent, self.max_states)?.chain;
        let flat = exact_grid_kernel(&landscape, 0.0, self.max_states)?.chain;
        let exact = conductance_profile(&governed)?;
        let reference = conductance_profile(&flat)?;
        let logs = lattice_log_f(density.as_ref(), Lattice::new(d, n))?;
        let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_ratio = exponent * (hi - lo);
        let mean = logs.iter().map(|l| (exponent * (l - lo)).exp()).sum::<f64>() / logs.len() as f64;
        for u in [0.1, 0.25, 0.5] {
            let inst = format!("d={d},n={n},K={exponent},u={u}");
            let phi = exact.at(u);
            let bound = scaled_profile_bound(&reference, u, mean, log_ratio);
            self.push("conductance_vs_flat", &inst, phi, bound, phi >= bound * (1.0 - 1e-9));
        }
        Ok(())
    }
}

fn unimodal() -> GoverningFunction {
    Arc::new(GaussianBump::new(vec![0.4], 4.0).expect("valid bump"))
}

fn bimodal() -> GoverningFunction {
    Arc::new(IsingDensity::new(0.5, 5.0).expect("valid Ising parameters"))
}

/// Runs the battery; the mixing comparison table comes back alongside the rows.
pub fn battery(args: &DiagnoseArgs, seed: u64) -> Result<(Vec<ReportRow>, Vec<MixingEntry>), CliError> {
    let n = args.n.unwrap_or(40);
    let mut b = Battery {
        rows: Vec::new(),
        mixing: Vec::new(),
        max_states: args.max_states.unwrap_or(annealed_walk::diagnostics::DENSE_CAP),
        t_max: args.t_max.unwrap_or(100),
        mixing_cap: args.mixing_cap.unwrap_or(200_000),
    };

    b.grid_instance("unimodal", unimodal(), n, n as f64)?;
    b.grid_instance("bimodal", bimodal(), n, n as f64)?;
    let uni: f64 = b.rows.iter().rev().find(|r| r.quantity == "mixing_time" && r.instance.starts_with("unimodal")).map_or(f64::NAN, |r| r.value);
    let bi: f64 = b.rows.iter().rev().find(|r| r.quantity == "mixing_time" && r.instance.starts_with("bimodal")).map_or(f64::NAN, |r| r.value);
    b.push("mixing_ratio_bimodal_unimodal", &format!("n={n}"), bi / uni, 10.0, bi >= 10.0 * uni);
    if args.density.density.is_some() {
        let density = args.density.build()?;
        let exponent = args.exponent.unwrap_or(n as f64);
        b.grid_instance("custom", density, n, exponent)?;
    }

    b.conductance(1, 15, unimodal(), 3.0)?;
    b.conductance(1, 15, bimodal(), 2.0)?;
    b.conductance(2, 3, Arc::new(GaussianBump::new(vec![0.3, 0.6], 2.0)?), 2.0)?;

    let mut rng = rng_from_seed(derive_seed(seed, &[1]));
    for i in 0..50 {
        let states = rng.gen_range(2..=10);
        let chain = random_lazy_reversible(states, 0.6, &mut rng)?;
        let margin = return_probability_margin(&chain, b.t_max);
        b.push("return_probability_margin", &format!("random chain {i}"), margin, -1e-12, margin >= -1e-12);
    }
    if args.inject_non_lazy.unwrap_or(false) {
        let cycle = ExactChain::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
        let margin = return_probability_margin(&cycle, b.t_max);
        b.push("return_probability_margin", "non-lazy 2-cycle", margin, -1e-12, margin >= -1e-12);
    }

    let path = RegularGraph::path(3)?;
    let example = VertexDensity::new(vec![2f64.ln(), 0.0, 3f64.ln()])?;
    for k in [0.0, 1.0, 8.0] {
        let inst = format!("path3 (2,1,3),K={k}");
        let governed = graph_kernel(&path, &example, k)?;
        let star = StarNetwork::new(&path, &example, k)?.trace_kernel()?;
        let gap = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (governed.entry(i, j) - star.entry(i, j)).abs())
            .fold(0.0, f64::max);
        b.push("star_trace_gap", &inst, gap, 1e-12, gap < 1e-12);
        let h = hitting_time_exact(&governed, 2)?;
        let worst = h.iter().copied().fold(0.0, f64::max);
        let bound = hitting_time_bound(&path, &example, k, 2, path.max_unit_resistance()?)?;
        b.push("hitting_time_exact_max", &inst, worst, bound, worst <= bound);
    }
    for i in 0..20 {
        let v = rng.gen_range(2..=8);
        let mut edges: Vec<(usize, usize, f64)> = (1..v).map(|x| (rng.gen_range(0..x), x, rng.gen_range(0.1..3.0))).collect();
        for _ in 0..v {
            let (x, y) = (rng.gen_range(0..v), rng.gen_range(0..v));
            edges.push((x, y, rng.gen_range(0.1..3.0)));
        }
        let net = WeightedNetwork::new(v, edges)?;
        let walk = net.walk_chain()?;
        let (x, y) = (0, v - 1);
        let c = net.commute_time(x, y)?;
        let h = hitting_time_exact(&walk, y)?[x] + hitting_time_exact(&walk, x)?[y];
        let rel = (h - c).abs() / c;
        b.push("commute_identity", &format!("random network {i}"), rel, 1e-9, rel < 1e-9);
    }

    for (alpha, beta) in [(0.0, 0.0), (0.0, 1.0)] {
        let mut prev = f64::INFINITY;
        for m in [50, 100, 200] {
            let density = IsingDensity::new(alpha, beta)?;
            let tv = tv_distance(&lumped_ising_reference(m, alpha, beta)?, &ising_power_law(&density, m, m as f64))?;
            let inst = format!("ising({alpha},{beta}),n={m}");
            b.push("lumped_tv_decreasing", &inst, tv, prev, tv < prev);
            prev = tv;
        }
        b.push("lumped_tv", &format!("ising({alpha},{beta}),n=200"), prev, 0.01, prev < 0.01);
    }

    let mut lda_rng = rng_from_seed(derive_seed(seed, &[2]));
    let corpus = Arc::new(Corpus::new(vec![vec![0, 1, 1, 2], vec![2, 0, 1]], 3)?);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut state = GibbsState::uniform(corpus.clone(), 3, Hyper { alpha: 0.7, beta: 0.4 }, &mut lda_rng)?;
        for (d, doc) in corpus.docs().iter().enumerate() {
            for i in 0..doc.len() {
                let a = state.annealed_weights(d, i, 1.0);
                let s = state.standard_weights(d, i);
                for (x, y) in a.iter().zip(&s) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    b.push("lda_unit_sigma_gap", "random states", worst, 0.0, worst == 0.0);
    let tiny = Arc::new(Corpus::new(vec![vec![0, 1], vec![1]], 2)?);
    let (p, states) = enumerate_update_kernel(tiny.clone(), 2, Hyper::default(), 1.0)?;
    let logs = states
        .iter()
        .map(|z| GibbsState::from_assignment(tiny.clone(), 2, Hyper::default(), z.clone())?.log_posterior_k2())
        .collect::<Result<Vec<f64>, _>>()?;
    let rows = p
        .iter()
        .map(|r| r.iter().enumerate().filter(|e| *e.1 > 0.0).map(|(j, &v)| (j, v)).collect())
        .collect();
    let violation = ExactChain::from_rows_with_log_weights(rows, &logs)?.detailed_balance_violation();
    b.push("lda_detailed_balance", "3-token corpus", violation, TOL, violation < TOL);

    Ok((b.rows, b.mixing))
}

pub fn run(args: &DiagnoseArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    install_threads(args.common.threads)?;
    let seed = resolve_seed(args.common.seed)?;
    let (rows, mixing) = battery(args, seed)?;
    if let Some(dir) = &args.common.out {
        let mut resolved = args.clone();
        resolved.common.seed = Some(seed);
        persist(Some(dir), "diagnose", &resolved)?;
        annealed_walk::diagnostics::write_report(&mut create(dir, "report.csv")?, &rows)?;
        let mut w = create(dir, "mixing.csv")?;
        writeln!(w, "instance,states,relaxation_time,mixing_time")?;
        for m in &mixing {
            writeln!(w, "\"{}\",{},{},{}", m.instance, m.states, m.relaxation_time, m.mixing_time)?;
        }
    }
    for m in &mixing {
        eprintln!(
            "diagnose: {:<32} states {:>5}  tau2 {:>12.1}  tmix(0.25) {}",
            m.instance, m.states, m.relaxation_time, m.mixing_time
        );
    }
    finish_report(stdout, &rows)
}
