//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to see
//! the lines when everything passes.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use annealed_walk::annealing::{k_estimate_smooth, run_schedule_replicas, t0_bound, AnnealingSchedule};
use annealed_walk::diagnostics::{
    hitting_time_exact, mixing_time_exact, random_lazy_reversible, return_probability_margin, tv_distance,
    ExactChain,
};
use annealed_walk::governing::{
    ising_power_law, lumped_ising_reference, GaussianBump, GoverningFunction, GridPoint, IsingDensity,
};
use annealed_walk::graph_walk::{
    graph_kernel, k_sufficient, run_length_bound, GraphChain, RegularGraph, VertexDensity, WeightedNetwork,
};
use annealed_walk::grid_walk::{exact_grid_kernel, grid_stationary, GridChain, GridLandscape};
use annealed_walk::lda::{
    enumerate_update_kernel, run_kappa_sweep, toy_mode_catalog, Corpus, GibbsState, Hyper, ModeRef, StartState,
    SweepConfig, ToyMode,
};
use annealed_walk::seed::{derive_seed, rng_from_seed};
use annealed_walk_cli::bounds::{report, BoundsArgs};
use rand::Rng;
use rayon::prelude::*;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn row_value(rows: &[annealed_walk::diagnostics::ReportRow], quantity: &str) -> Option<f64> {
    rows.iter().find(|r| r.quantity == quantity).map(|r| r.value)
}

fn example1_bounds() -> Outcome {
    let started = Instant::now();
    let args = BoundsArgs {
        graph: Some(fixture("example1.graph")),
        density: Some(fixture("example1.density")),
        eps: Some(0.05),
        ..Default::default()
    };
    let rows = match report(&args) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("bounds failed: {e}")),
    };
    let target_k = 0.05f64.ln() / (2.0f64 / 3.0).ln();
    let k = row_value(&rows, "k_dominance").unwrap_or(f64::NAN);
    let bound = row_value(&rows, "hitting_time_bound").unwrap_or(f64::NAN);
    let t = row_value(&rows, "schedule_steps").unwrap_or(f64::NAN);
    let t4 = row_value(&rows, "run_length_bound").unwrap_or(f64::NAN);
    let elapsed = started.elapsed().as_secs_f64();
    let k_ok = k < 7.39 && (k - target_k).abs() < 1e-2;
    let bound_ok = bound < 671.0;
    let t_ok = t == 13_420.0;
    let t4_ok = rel(t4, 52_600.0) < 0.01;
    outcome(
        k_ok && bound_ok && t_ok && t4_ok && elapsed < 1.0,
        format!(
            "K={k:.4} [{}], hitting bound={bound:.1} (<671) [{}], T={t} (13420) [{}], run length={t4:.0} (52600 +-1%) [{}], {elapsed:.3}s",
            ok(k_ok),
            ok(bound_ok),
            ok(t_ok),
            ok(t4_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "miss"
    }
}

fn example1_density() -> VertexDensity {
    VertexDensity::new(vec![2f64.ln(), 0.0, 3f64.ln()]).unwrap()
}

fn example1_empirical() -> Outcome {
    let graph = Arc::new(RegularGraph::path(3).unwrap());
    let density = example1_density();
    let replicas = 2000u64;
    let hits: usize = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut chain = GraphChain::new(graph.clone(), &density, 8.0, 0, derive_seed(SEED, &[2, r])).unwrap();
            usize::from(chain.run(13_420) == 2)
        })
        .sum();
    let frac = hits as f64 / replicas as f64;
    outcome(frac >= 0.88, format!("fraction at vertex 3 = {frac:.4} (>= 0.88)"))
}

fn path100() -> (RegularGraph, VertexDensity) {
    let n = 100;
    let mut lf = vec![0.0; n];
    lf[0] = 2f64.ln();
    lf[n - 1] = 3f64.ln();
    (RegularGraph::path(n).unwrap(), VertexDensity::new(lf).unwrap())
}

fn example2_hitting() -> Outcome {
    let (graph, density) = path100();
    let n = 100usize;
    let k = (n as f64).log2();
    let limit = 6.0 * (n * n) as f64;
    let chain = graph_kernel(&graph, &density, k).unwrap();
    let h = hitting_time_exact(&chain, n - 1).unwrap();
    let (worst_start, worst) = h
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let graph = Arc::new(graph);
    let total: u64 = (0..200u64)
        .into_par_iter()
        .map(|r| {
            let mut c = GraphChain::new(graph.clone(), &density, k, worst_start, derive_seed(SEED, &[3, r])).unwrap();
            while c.state() != n - 1 {
                c.step();
            }
            c.steps_taken()
        })
        .sum();
    let mean = total as f64 / 200.0;
    outcome(
        worst <= limit && mean <= limit,
        format!("K=log2 n, exact max hitting time={worst:.0} from vertex {}, empirical mean={mean:.0}, limit 6n^2={limit}", worst_start + 1),
    )
}

fn random_network(rng: &mut impl Rng) -> WeightedNetwork {
    let v = rng.gen_range(2..=12);
    let mut edges = Vec::new();
    for i in 1..v {
        edges.push((rng.gen_range(0..i), i, rng.gen_range(0.1..3.0)));
    }
    for _ in 0..rng.gen_range(0..v) {
        let (a, b) = (rng.gen_range(0..v), rng.gen_range(0..v));
        edges.push((a, b, rng.gen_range(0.1..3.0)));
    }
    WeightedNetwork::new(v, edges).unwrap()
}

fn commute_identity() -> Outcome {
    let mut rng = rng_from_seed(derive_seed(SEED, &[4]));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let net = random_network(&mut rng);
        let chain = net.walk_chain().unwrap();
        let hits: Vec<Vec<f64>> = (0..net.vertices()).map(|t| hitting_time_exact(&chain, t).unwrap()).collect();
        for u in 0..net.vertices() {
            for v in (u + 1)..net.vertices() {
                let c = hits[v][u] + hits[u][v];
                let err = (c - net.commute_time(u, v).unwrap()).abs() / c;
                worst = worst.max(err);
            }
        }
    }
    outcome(worst < 1e-9, format!("worst relative error {worst:.2e} over 100 graphs (< 1e-9)"))
}

fn return_probability() -> Outcome {
    let mut rng = rng_from_seed(derive_seed(SEED, &[5]));
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let states = rng.gen_range(2..=10);
        let p = rng.gen_range(0.2..1.0);
        let chain = random_lazy_reversible(states, p, &mut rng).unwrap();
        worst = worst.min(return_probability_margin(&chain, 100));
    }
    let flip = ExactChain::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let control = return_probability_margin(&flip, 100);
    outcome(
        worst >= -1e-12 && control < -1e-12,
        format!("min margin over 50 lazy chains={worst:.3e} (>= -1e-12), non-lazy 2-cycle margin={control:.3} (must fail)"),
    )
}

fn unimodal_trend() -> Outcome {
    let density: GoverningFunction = Arc::new(GaussianBump::new(vec![0.4], 4.0).unwrap());
    let mut ratios = Vec::new();
    for n in [20usize, 40, 80, 160] {
        let landscape = GridLandscape::new(density.clone(), n).unwrap();
        let kernel = exact_grid_kernel(&landscape, n as f64, 1000).unwrap();
        let t = mixing_time_exact(&kernel.chain, 0.25, 10_000_000).unwrap();
        if !t.is_exact() {
            return outcome(false, format!("mixing time not reached at n={n}"));
        }
        ratios.push(t.steps() as f64 / (n as f64 * (n as f64).ln()));
    }
    let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
    let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
    outcome(
        hi / lo <= 2.0,
        format!("tmix/(n ln n) for n=20,40,80,160: {ratios:.3?}, spread {:.3} (<= 2)", hi / lo),
    )
}

fn multimodal_gap() -> Outcome {
    let n = 100;
    let density: GoverningFunction = Arc::new(IsingDensity::new(0.5, 5.0).unwrap());
    let landscape = GridLandscape::new(density, n).unwrap();
    let start = GridPoint::origin(1, n).unwrap();
    let highest: Vec<usize> = (0..20u64)
        .into_par_iter()
        .map(|r| {
            let mut c = GridChain::new(landscape.clone(), n as f64, &start, derive_seed(SEED, &[7, r])).unwrap();
            let mut top = 0;
            for _ in 0..10_000_000u64 {
                top = top.max(c.step()[0]);
            }
            top
        })
        .collect();
    let top = highest.iter().copied().max().unwrap_or(0);
    outcome(
        2 * top < n,
        format!("highest x reached by 20 replicas of 1e7 steps: {}", top as f64 / n as f64),
    )
}

fn endpoint_tv(exponents: &[usize], pi: &[f64], density: &GoverningFunction, n: usize, stream: u64) -> (f64, f64) {
    let schedule = AnnealingSchedule::coarse_geometric_ladder(n, exponents, 1.6, 1.0).unwrap();
    let replicas = 200;
    let ends = run_schedule_replicas(
        density.clone(),
        &schedule,
        &GridPoint::origin(1, n).unwrap(),
        derive_seed(SEED, &[8, stream]),
        replicas,
    )
    .unwrap();
    let mut hist = vec![0.0; n + 1];
    for p in &ends {
        hist[p.coords()[0]] += 1.0 / replicas as f64;
    }
    let steps = schedule.total_steps() as f64 * replicas as f64;
    (tv_distance(&hist, pi).unwrap(), steps)
}

fn ising_annealing() -> Outcome {
    let n = 100;
    let density: GoverningFunction = Arc::new(IsingDensity::new(0.5, 5.0).unwrap());
    let pi = grid_stationary(&GridLandscape::new(density.clone(), n).unwrap(), n as f64).unwrap();
    let (tv12, steps12) = endpoint_tv(&[2, 4, 6, 8, 10, 12], &pi, &density, n, 12);
    let (tv8, steps8) = endpoint_tv(&[2, 4, 6, 8], &pi, &density, n, 8);
    outcome(
        tv12 <= 0.10 && tv8 <= 0.15,
        format!(
            "TV through K=12: {tv12:.4} (<= 0.10, {steps12:.2e} steps); through K=8: {tv8:.4} (<= 0.15, {steps8:.2e} steps)"
        ),
    )
}

fn lumped_agreement() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (alpha, beta) in [(0.0, 0.0), (0.0, 1.0)] {
        let ising = IsingDensity::new(alpha, beta).unwrap();
        let tvs: Vec<f64> = [50usize, 100, 200]
            .iter()
            .map(|&n| {
                let mu = lumped_ising_reference(n, alpha, beta).unwrap();
                tv_distance(&mu, &ising_power_law(&ising, n, n as f64)).unwrap()
            })
            .collect();
        pass &= tvs[0] > tvs[1] && tvs[1] > tvs[2] && tvs[2] < 0.01;
        parts.push(format!("({alpha},{beta}): {tvs:.5?}"));
    }
    outcome(pass, format!("TV at n=50,100,200 {}", parts.join(", ")))
}

fn lda_balance() -> Outcome {
    let corpus = Arc::new(Corpus::new(vec![vec![0, 1, 2, 1], vec![2, 2, 0]], 3).unwrap());
    let mut rng = rng_from_seed(derive_seed(SEED, &[10]));
    let mut gap: f64 = 0.0;
    for trial in 0..20 {
        let hyper = Hyper {
            alpha: 0.2 + 0.1 * trial as f64,
            beta: 0.5,
        };
        let mut s = GibbsState::uniform(corpus.clone(), 3, hyper, &mut rng).unwrap();
        for d in 0..corpus.docs().len() {
            for i in 0..corpus.docs()[d].len() {
                let a = s.annealed_weights(d, i, 1.0);
                let b = s.standard_weights(d, i);
                gap = gap.max(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
            }
        }
    }
    let mut violation: f64 = 0.0;
    let tiny = Arc::new(Corpus::new(vec![vec![0, 1], vec![1]], 2).unwrap());
    for (topics, hyper) in [(2, Hyper::default()), (3, Hyper { alpha: 0.7, beta: 0.4 })] {
        {
            let (p, states) = enumerate_update_kernel(tiny.clone(), topics, hyper, 1.0).unwrap();
            let logs: Vec<f64> = states
                .iter()
                .map(|z| GibbsState::from_assignment(tiny.clone(), topics, hyper, z.clone()).unwrap().log_posterior())
                .collect();
            let rows = p
                .iter()
                .map(|r| r.iter().enumerate().filter(|e| *e.1 > 0.0).map(|(j, &v)| (j, v)).collect())
                .collect();
            let chain = ExactChain::from_rows_with_log_weights(rows, &logs).unwrap();
            violation = violation.max(chain.detailed_balance_violation());
        }
    }
    outcome(
        gap == 0.0 && violation < 1e-10,
        format!("max |annealed(1) - standard| = {gap:e} (== 0), detailed balance violation {violation:.2e} (< 1e-10)"),
    )
}

fn best_fraction(records: &[annealed_walk::lda::SweepRecord], catalog: &[ModeRef], kappa: f64, mode: ToyMode) -> f64 {
    let runs: Vec<_> = records.iter().filter(|r| r.kappa == kappa).collect();
    let hits = runs
        .iter()
        .filter(|r| r.end_mode.map(|i| catalog[i].name == mode.name()).unwrap_or(false))
        .count();
    hits as f64 / runs.len() as f64
}

fn lda_regimes() -> Outcome {
    let n = 1200;
    let corpus = Arc::new(Corpus::toy(n).unwrap());
    let catalog = toy_mode_catalog(corpus.clone()).unwrap();
    let tolerance = annealed_walk::lda::default_tolerance(&catalog);
    let steps = (n * n) as u64;
    let base = SweepConfig {
        kappas: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        runs: 100,
        stage1_steps: 5 * steps,
        stage2_steps: steps,
        topics: 2,
        hyper: Hyper::default(),
        start: StartState::Given(ToyMode::Second.assignment(&corpus)),
        catalog: catalog.clone(),
        tolerance,
    };
    let sweep = run_kappa_sweep(corpus.clone(), &base, derive_seed(SEED, &[11, 0])).unwrap();
    let baseline_cfg = SweepConfig {
        kappas: vec![n as f64],
        start: StartState::Uniform,
        ..base.clone()
    };
    let baseline = run_kappa_sweep(corpus, &baseline_cfg, derive_seed(SEED, &[11, 1])).unwrap();
    let reference = best_fraction(&baseline, &catalog, n as f64, ToyMode::Best);
    let mut pass = true;
    let mut parts = Vec::new();
    for &k in &base.kappas {
        let best = best_fraction(&sweep, &catalog, k, ToyMode::Best);
        let stay = best_fraction(&sweep, &catalog, k, ToyMode::Second);
        let good = if k <= 4.0 {
            (best - reference).abs() <= 0.15
        } else if k <= 16.0 {
            best >= 0.9
        } else {
            stay >= 0.9
        };
        pass &= good;
        parts.push(format!("k={k}: best {best:.2} second {stay:.2} [{}]", ok(good)));
    }
    outcome(pass, format!("uniform-start baseline best {reference:.2}; {}", parts.join("; ")))
}

fn t0_hand(d: f64, k: f64, lfc: f64, delta: f64, n: f64) -> f64 {
    (5.0 * d * k * (k * lfc).exp() * n * n * ((48.0 * lfc.exp()) / delta).ln()).ceil()
}

fn bound_regression() -> Outcome {
    let mut worst: f64 = 0.0;
    for &(d, k, lfc, delta, n) in &[
        (1usize, 10.0, 2f64.ln(), 0.1, 100usize),
        (2, 3.5, 0.4, 0.05, 50),
        (3, 1.0, 1.2, 0.2, 10),
        (1, 12.0, 0.832, 0.1, 100),
        (4, 0.5, 3.0, 0.01, 1000),
    ] {
        let got = t0_bound(d, k, lfc, delta, n).unwrap();
        worst = worst.max(rel(got, t0_hand(d as f64, k, lfc, delta, n as f64)));
    }
    for (lf, eps) in [
        (vec![2f64.ln(), 0.0, 3f64.ln()], 0.05),
        (vec![0.0, 1.0, 0.5, 2.0], 0.1),
        (vec![0.3, 0.1, 0.2], 0.01),
        (vec![5.0, 0.0, 0.0, 0.0, 4.0, 0.0], 0.2),
        (vec![1.0, 0.0], 0.5),
    ] {
        let mut sorted = lf.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let hand = (lf.len() as f64 / eps).ln() / (sorted[0] - sorted[1]);
        worst = worst.max(rel(k_sufficient(&VertexDensity::new(lf).unwrap(), eps).unwrap(), hand));
    }
    for &(fc, fa, f2, eps, delta) in &[
        (3.0f64, 2.0f64, -1.0f64, 0.01f64, 0.1f64),
        (5.0, 1.0, -10.0, 0.05, 0.2),
        (1.5, 1.4, -0.3, 0.001, 0.1),
        (2.0, 0.5, -4.0, 0.1, 0.5),
        (10.0, 9.0, -100.0, 0.01, 0.01),
    ] {
        let hand = 0.5 * ((-f2).ln() - (7.0 * eps * delta * delta).ln()) / (fc / fa).ln();
        worst = worst.max(rel(k_estimate_smooth(fc, fa, f2, eps, delta).unwrap(), hand));
    }
    for &(deg, r, v, f1, f2, eps) in &[
        (2usize, 2.0, 3usize, 3f64.ln(), 2f64.ln(), 0.05),
        (2, 99.0, 100, 3f64.ln(), 2f64.ln(), 0.05),
        (3, 1.5, 8, 1.0, 0.2, 0.1),
        (4, 0.75, 16, 2.0, 1.9, 0.01),
        (2, 5.0, 6, 0.5, 0.0, 0.2),
    ] {
        let hand = 2.0 * deg as f64 * r * (v as f64 / eps).powf(f1 / (f1 - f2));
        worst = worst.max(rel(run_length_bound(deg, r, v, f1, f2, eps, true).unwrap(), hand));
    }
    let ising = IsingDensity::new(0.0, 3.0).unwrap();
    let values: Vec<f64> = (0..=100_000).map(|i| ising.log_f_scalar(i as f64 / 100_000.0)).collect();
    let lfc = values.iter().copied().fold(f64::MIN, f64::max) - values.iter().copied().fold(f64::MAX, f64::min);
    let per_n2 = |k: f64, delta: f64| t0_bound(1, k, lfc, delta, 1).unwrap();
    let coarse = per_n2(53.0, 0.1);
    let fine = per_n2(80.0, 0.01);
    let hand_ok = worst < 1e-9;
    let coarse_ok = rel(coarse, 21_400.0) < 0.02;
    let fine_ok = rel(fine, 6.1e6) < 0.02;
    outcome(
        hand_ok && coarse_ok && fine_ok,
        format!(
            "20 hand values worst rel err {worst:.1e} [{}]; ising(0,3) K=53: {coarse:.0} n^2 vs 21400 [{}]; K=80: {fine:.3e} n^2 vs 6.1e6 [{}]",
            ok(hand_ok),
            ok(coarse_ok),
            ok(fine_ok)
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("example-1 exact numbers", example1_bounds),
        ("example-1 empirical guarantee", example1_empirical),
        ("example-2 hitting bound", example2_hitting),
        ("commute-time identity", commute_identity),
        ("return-probability lemma", return_probability),
        ("unimodal n log n trend", unimodal_trend),
        ("multimodal exponential gap", multimodal_gap),
        ("ising annealing end-to-end", ising_annealing),
        ("lumped-measure agreement", lumped_agreement),
        ("lda unit-sigma equivalence and balance", lda_balance),
        ("lda toy kappa regimes", lda_regimes),
        ("bound-formula regression", bound_regression),
    ];
    println!();
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let o = check();
        println!(
            "{} criterion {:>2} {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            started.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
