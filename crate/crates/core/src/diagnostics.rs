//! Exact computations on enumerable chains: stationary laws, distances,
//! spectra, hitting times, conductance profiles and mixing times.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::math::{log_sum_exp, normalize_log_weights};
use crate::{Error, Result};

/// Largest chain handed to dense linear algebra (LU, eigen decomposition).
pub const DENSE_CAP: usize = 6000;
/// Largest chain whose conductance profile is computed over all subsets.
pub const SUBSET_CAP: usize = 20;

const STOCHASTIC_TOL: f64 = 1e-12;

/// A finite chain with sparse rows and its stationary law.
#[derive(Debug, Clone)]
pub struct ExactChain {
    rows: Vec<Vec<(usize, f64)>>,
    pi: Vec<f64>,
    log_pi: Vec<f64>,
}

impl ExactChain {
    fn validate_rows(rows: &mut [Vec<(usize, f64)>]) -> Result<()> {
        let len = rows.len();
        if len == 0 {
            return Err(Error::InvalidParameter("chain has no states".into()));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            row.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            let mut sum = 0.0;
            for &(j, p) in row.iter() {
                if j >= len || !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "bad transition {i} -> {j} with probability {p}"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidParameter(format!(
                    "row {i} sums to {sum}, not 1"
                )));
            }
        }
        Ok(())
    }

    /// Rows plus unnormalised log stationary weights (e.g. `K log f`).
    pub fn from_rows_with_log_weights(
        mut rows: Vec<Vec<(usize, f64)>>,
        log_weights: &[f64],
    ) -> Result<Self> {
        Self::validate_rows(&mut rows)?;
        if log_weights.len() != rows.len() {
            return Err(Error::SupportMismatch(rows.len(), log_weights.len()));
        }
        if log_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("stationary weights must be positive".into()));
        }
        let pi = normalize_log_weights(log_weights);
        let lse = log_sum_exp(log_weights);
        let log_pi = log_weights.iter().map(|w| w - lse).collect();
        Ok(Self { rows, pi, log_pi })
    }

    /// Rows with a known stationary vector.
    pub fn with_stationary(mut rows: Vec<Vec<(usize, f64)>>, pi: Vec<f64>) -> Result<Self> {
        Self::validate_rows(&mut rows)?;
        if pi.len() != rows.len() {
            return Err(Error::SupportMismatch(rows.len(), pi.len()));
        }
        let total: f64 = pi.iter().sum();
        if pi.iter().any(|&p| !(p > 0.0) || !p.is_finite()) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("stationary vector must be a positive law".into()));
        }
        let log_pi = pi.iter().map(|p| p.ln()).collect();
        let chain = Self { rows, pi, log_pi };
        let residual = chain.stationarity_residual();
        if residual > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "supplied law is not stationary (residual {residual:e})"
            )));
        }
        Ok(chain)
    }

    /// Rows only; the stationary law is found by a dense linear solve.
    pub fn from_rows(mut rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        Self::validate_rows(&mut rows)?;
        let len = rows.len();
        if len > DENSE_CAP {
            return Err(Error::StateSpaceTooLarge {
                states: len,
                cap: DENSE_CAP,
            });
        }
        // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1
        let mut a = DMatrix::<f64>::zeros(len, len);
        for (i, row) in rows.iter().enumerate() {
            for &(j, p) in row {
                a[(j, i)] += p;
            }
            a[(i, i)] -= 1.0;
        }
        for i in 0..len {
            a[(len - 1, i)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(len);
        b[len - 1] = 1.0;
        let pi = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Singular("stationary law is not unique".into()))?;
        if pi.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Singular("chain is not irreducible".into()));
        }
        let pi: Vec<f64> = pi.iter().copied().collect();
        let log_pi = pi.iter().map(|p| p.ln()).collect();
        Ok(Self { rows, pi, log_pi })
    }

    pub fn from_dense(p: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(dense_to_rows(p)?)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn log_pi(&self) -> &[f64] {
        &self.log_pi
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(k, _)| k)
            .map_or(0.0, |pos| row[pos].1)
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                m[(i, j)] = p;
            }
        }
        m
    }

    /// `out = mu P`.
    pub fn propagate_into(&self, mu: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (row, &m) in self.rows.iter().zip(mu) {
            if m == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j] += m * p;
            }
        }
    }

    pub fn propagate(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.propagate_into(mu, &mut out);
        out
    }

    /// `mu P^t`.
    pub fn evolve(&self, mu: &[f64], t: usize) -> Vec<f64> {
        let mut cur = mu.to_vec();
        let mut next = vec![0.0; self.len()];
        for _ in 0..t {
            self.propagate_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// `|| pi P - pi ||_1`.
    pub fn stationarity_residual(&self) -> f64 {
        self.propagate(&self.pi)
            .iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// `max |pi(x) P(x,y) - pi(y) P(y,x)|`.
    pub fn detailed_balance_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                let v = (self.pi[i] * p - self.pi[j] * self.entry(j, i)).abs();
                worst = worst.max(v);
            }
        }
        worst
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.len()).map(|i| self.entry(i, i)).fold(f64::INFINITY, f64::min)
    }

    /// The symmetrised kernel `D^{1/2} P D^{-1/2}` with `D = diag(pi)`.
    fn symmetrised(&self) -> Result<DMatrix<f64>> {
        let n = self.len();
        if n > DENSE_CAP {
            return Err(Error::StateSpaceTooLarge {
                states: n,
                cap: DENSE_CAP,
            });
        }
        let mut s = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                s[(i, j)] = p * (0.5 * (self.log_pi[i] - self.log_pi[j])).exp();
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (s[(i, j)] - s[(j, i)]).abs();
                let scale = s[(i, j)].abs().max(s[(j, i)].abs()).max(1e-300);
                if gap > 1e-8 * scale && gap > 1e-13 {
                    worst = worst.max(gap);
                }
            }
        }
        if worst > 0.0 {
            return Err(Error::NonReversible(worst));
        }
        Ok(s.clone().transpose() * 0.5 + s * 0.5)
    }

    /// Eigenvalues of a reversible chain, in decreasing order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let s = self.symmetrised()?;
        let mut eig: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        Ok(eig)
    }
}

fn dense_to_rows(p: &[Vec<f64>]) -> Result<Vec<Vec<(usize, f64)>>> {
    let n = p.len();
    if p.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("transition matrix must be square".into()));
    }
    Ok(p.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect()
        })
        .collect())
}

/// `(1/2) sum |mu - nu|`.
pub fn tv_distance(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::SupportMismatch(mu.len(), nu.len()));
    }
    Ok(0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `E_pi[|nu/pi - 1|^p]^{1/p}`.
pub fn lp_distance(nu: &[f64], pi: &[f64], p: f64) -> Result<f64> {
    if nu.len() != pi.len() {
        return Err(Error::SupportMismatch(nu.len(), pi.len()));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must be in [1, inf), got {p}")));
    }
    if pi.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidParameter("reference law has a zero entry".into()));
    }
    let sum: f64 = nu
        .iter()
        .zip(pi)
        .map(|(&v, &w)| w * (v / w - 1.0).abs().powf(p))
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// `1 / (1 - lambda_2)`; infinite when the second eigenvalue is 1.
pub fn relaxation_time(chain: &ExactChain) -> Result<f64> {
    if chain.len() == 1 {
        return Ok(0.0);
    }
    let eig = chain.spectrum()?;
    let gap = 1.0 - eig[1];
    Ok(if gap <= 1e-13 { f64::INFINITY } else { 1.0 / gap })
}

/// Checks `||mu_0 P^t - pi||_2 <= exp(-t / tau_2) ||mu_0 - pi||_2`.
pub fn l2_contraction_check(chain: &ExactChain, t: usize, initial: &[f64]) -> Result<bool> {
    let tau = relaxation_time(chain)?;
    let before = lp_distance(initial, chain.pi(), 2.0)?;
    let after = lp_distance(&chain.evolve(initial, t), chain.pi(), 2.0)?;
    let factor = if tau.is_infinite() { 1.0 } else { (-(t as f64) / tau).exp() };
    Ok(after <= factor * before + 1e-9)
}

/// `min_{s, t <= t_max} (P^t(s,s) - pi(s))`.
pub fn return_probability_margin(chain: &ExactChain, t_max: usize) -> f64 {
    (0..chain.len())
        .into_par_iter()
        .map(|s| {
            let mut mu = vec![0.0; chain.len()];
            mu[s] = 1.0;
            let mut next = vec![0.0; chain.len()];
            let mut worst = 1.0 - chain.pi()[s];
            for _ in 0..t_max {
                chain.propagate_into(&mu, &mut next);
                std::mem::swap(&mut mu, &mut next);
                worst = f64::min(worst, mu[s] - chain.pi()[s]);
            }
            worst
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Checks `P^t(s,s) >= pi(s)` for every state and every `t <= t_max`.
pub fn return_probability_check(chain: &ExactChain, t_max: usize) -> bool {
    return_probability_margin(chain, t_max) >= -1e-12
}

/// Expected hitting times of `target` from every state.
pub fn hitting_time_exact(chain: &ExactChain, target: usize) -> Result<Vec<f64>> {
    let n = chain.len();
    if target >= n {
        return Err(Error::InvalidParameter(format!("target {target} outside 0..{n}")));
    }
    if n > DENSE_CAP {
        return Err(Error::StateSpaceTooLarge {
            states: n,
            cap: DENSE_CAP,
        });
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let index = |i: usize| if i < target { i } else { i - 1 };
    let m = n - 1;
    let mut a = DMatrix::<f64>::identity(m, m);
    for (i, row) in chain.rows().iter().enumerate() {
        if i == target {
            continue;
        }
        for &(j, p) in row {
            if j != target {
                a[(index(i), index(j))] -= p;
            }
        }
    }
    let b = DVector::from_element(m, 1.0);
    let h = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular(format!("state {target} is not reachable")))?;
    if h.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return Err(Error::Singular(format!("state {target} is not reachable")));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(if i == target { 0.0 } else { h[index(i)] });
    }
    Ok(out)
}

/// `Phi(u) = min { Q(A, A^c) / pi(A) : 0 < pi(A) <= u }` as a step function.
#[derive(Debug, Clone)]
pub struct ConductanceProfile {
    masses: Vec<f64>,
    running_min: Vec<f64>,
}

impl ConductanceProfile {
    /// `Phi(u)`; infinite when no set has mass at most `u`.
    pub fn at(&self, u: f64) -> f64 {
        let k = self.masses.partition_point(|&m| m <= u * (1.0 + 1e-12));
        if k == 0 {
            f64::INFINITY
        } else {
            self.running_min[k - 1]
        }
    }

    /// Breakpoints `(pi(A), Phi(pi(A)))`.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.masses.iter().copied().zip(self.running_min.iter().copied())
    }
}

/// Exact profile by enumeration of all proper non-empty subsets.
pub fn conductance_profile(chain: &ExactChain) -> Result<ConductanceProfile> {
    let n = chain.len();
    if n > SUBSET_CAP {
        return Err(Error::StateSpaceTooLarge {
            states: n,
            cap: SUBSET_CAP,
        });
    }
    let pi = chain.pi();
    // flow[i][j] = pi_i P_ij, symmetric for reversible chains
    let flow: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| pi[i] * chain.entry(i, j)).collect())
        .collect();
    let total = 1usize << n;
    let mut inside = vec![false; n];
    let mut mass = 0.0;
    let mut cut = 0.0;
    let mut entries = Vec::with_capacity(total.saturating_sub(2));
    // Gray-code walk: each step toggles one state
    for g in 1..total {
        let bit = g.trailing_zeros() as usize;
        let joining = !inside[bit];
        let mut delta = 0.0;
        for j in 0..n {
            if j == bit {
                continue;
            }
            let edge = flow[bit][j];
            if inside[j] {
                delta += if joining { -edge } else { edge };
            } else {
                delta += if joining { edge } else { -edge };
            }
        }
        cut += delta;
        inside[bit] = joining;
        mass += if joining { pi[bit] } else { -pi[bit] };
        let members = (g ^ (g >> 1)).count_ones() as usize;
        if members > 0 && members < n {
            entries.push((mass, cut.max(0.0) / mass));
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    let (masses, running_min) = entries
        .into_iter()
        .map(|(m, phi)| {
            best = best.min(phi);
            (m, best)
        })
        .unzip();
    Ok(ConductanceProfile {
        masses,
        running_min,
    })
}

/// Closed-form conductance lower bound for a walk on `B_n^d` governed by
/// `f^K`: `d / (n u^{1/d}) * exp(-K log f(c))`.
pub fn lattice_conductance_bound(d: usize, n: usize, u: f64, exponent: f64, log_fc: f64) -> f64 {
    d as f64 / (n as f64 * u.powf(1.0 / d as f64)) * (-exponent * log_fc).exp()
}

/// Profile bound for a governed walk from the profile of a reference walk on
/// the same graph: every set `A` has `Phi(A) >= Phi_ref(A) / r`, and
/// `pi(A) <= u` forces `pi_ref(A) <= u * mass_scale`. Here `log_ratio = log r`
/// is the log of the largest ratio of stationary weights and `mass_scale` is
/// the mean weight divided by the smallest one. The scaled mass is never below
/// the lightest reference set, so rounding below it is clamped away.
pub fn scaled_profile_bound(reference: &ConductanceProfile, u: f64, mass_scale: f64, log_ratio: f64) -> f64 {
    let floor = reference.masses.first().copied().unwrap_or(0.0);
    reference.at((u * mass_scale).clamp(floor, 1.0)) * (-log_ratio).exp()
}

/// Random lazy chain reversible with respect to a random `pi`: each pair is
/// joined with probability `edge_prob` by a random conductance, and moves are
/// scaled so that every row holds at least one half.
pub fn random_lazy_reversible<R: Rng>(states: usize, edge_prob: f64, rng: &mut R) -> Result<ExactChain> {
    if states == 0 {
        return Err(Error::InvalidParameter("need at least one state".into()));
    }
    let raw: Vec<f64> = (0..states).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let pi: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mut c = vec![vec![0.0; states]; states];
    for i in 0..states {
        for j in i + 1..states {
            if rng.gen::<f64>() < edge_prob {
                let w = rng.gen_range(0.01..1.0);
                c[i][j] = w;
                c[j][i] = w;
            }
        }
    }
    let scale = (0..states)
        .map(|i| c[i].iter().sum::<f64>() / pi[i])
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let rows = (0..states)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = (0..states)
                .filter(|&j| j != i && c[i][j] > 0.0)
                .map(|j| (j, c[i][j] / (2.0 * pi[i] * scale)))
                .collect();
            let moved: f64 = row.iter().map(|e| e.1).sum();
            row.push((i, 1.0 - moved));
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    ExactChain::with_stationary(rows, pi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingTime {
    Exact(usize),
    /// The cap was reached before every start got within `eps`.
    AtLeast(usize),
}

impl MixingTime {
    pub fn steps(self) -> usize {
        match self {
            MixingTime::Exact(t) | MixingTime::AtLeast(t) => t,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, MixingTime::Exact(_))
    }
}

impl fmt::Display for MixingTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixingTime::Exact(t) => write!(f, "{t}"),
            MixingTime::AtLeast(t) => write!(f, ">={t}"),
        }
    }
}

/// Smallest `t` with `max_x ||P^t(x, .) - pi||_TV < eps`.
pub fn mixing_time_exact(chain: &ExactChain, eps: f64, max_steps: usize) -> Result<MixingTime> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must be in (0,1), got {eps}")));
    }
    let n = chain.len();
    let pi = chain.pi();
    let per_start: Vec<Option<usize>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut mu = vec![0.0; n];
            mu[s] = 1.0;
            let mut next = vec![0.0; n];
            for t in 0..=max_steps {
                let tv = 0.5 * mu.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>();
                if tv < eps {
                    return Some(t);
                }
                if t < max_steps {
                    chain.propagate_into(&mu, &mut next);
                    std::mem::swap(&mut mu, &mut next);
                }
            }
            None
        })
        .collect();
    Ok(if per_start.iter().any(Option::is_none) {
        MixingTime::AtLeast(max_steps + 1)
    } else {
        MixingTime::Exact(per_start.into_iter().flatten().max().unwrap_or(0))
    })
}

/// Outcome of comparing the relaxation times of two chains on the same states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonBound {
    /// `max Q_b(x,y) / Q_a(x,y)` over edges of `b`.
    pub edge_ratio: f64,
    /// `max pi_a(x) / pi_b(x)`.
    pub mass_ratio: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    /// `edge_ratio * mass_ratio * tau_b`.
    pub bound: f64,
    pub holds: bool,
}

/// Bounds `tau_2(a)` by `tau_2(b)` through edge-flow and mass ratios.
pub fn direct_comparison_bound(a: &ExactChain, b: &ExactChain) -> Result<ComparisonBound> {
    if a.len() != b.len() {
        return Err(Error::SupportMismatch(a.len(), b.len()));
    }
    let mut edge_ratio: f64 = 0.0;
    for (x, row) in b.rows().iter().enumerate() {
        for &(y, p) in row {
            if x == y {
                continue;
            }
            let qb = b.pi()[x] * p;
            let qa = a.pi()[x] * a.entry(x, y);
            if qa == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "edge {x}-{y} of the reference chain is missing from the compared chain"
                )));
            }
            edge_ratio = edge_ratio.max(qb / qa);
        }
    }
    let mass_ratio = a
        .log_pi()
        .iter()
        .zip(b.log_pi())
        .map(|(la, lb)| (la - lb).exp())
        .fold(0.0, f64::max);
    let tau_a = relaxation_time(a)?;
    let tau_b = relaxation_time(b)?;
    let bound = edge_ratio * mass_ratio * tau_b;
    Ok(ComparisonBound {
        edge_ratio,
        mass_ratio,
        tau_a,
        tau_b,
        bound,
        holds: tau_a <= bound * (1.0 + 1e-9),
    })
}

pub const REPORT_HEADER: &str = "quantity,instance,value,bound,pass";

/// One checked inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub instance: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(
        quantity: impl Into<String>,
        instance: impl Into<String>,
        value: f64,
        bound: f64,
        pass: bool,
    ) -> Self {
        Self {
            quantity: quantity.into(),
            instance: instance.into(),
            value,
            bound,
            pass,
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_report<W: Write>(mut out: W, rows: &[ReportRow]) -> std::io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.quantity),
            csv_field(&r.instance),
            r.value,
            r.bound,
            r.pass
        )?;
    }
    Ok(())
}
